//! Zero-energy scattering and the Neumann-localized radial eigenproblem.
//!
//! Both problems are solved for `u(r) = r f(r)`, which satisfies
//! `-u'' + ½ λ V(r) u = ν u` (with `ν = 0` for the scattering problem).
//! On the support of `V` the equation is integrated with fixed-step RK4,
//! with a node on every breakpoint of the profile. Outside the support the
//! free solution is used in closed form.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::HermiteTable;
use crate::potentials::RadialPotential;
use crate::quadrature::{integrate_pieces, QuadOptions};

/// Magnitude at which the linear ODE state is renormalized.
const RESCALE_AT: f64 = 1e150;

#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    /// RK4 steps per length `min(b, R)`.
    pub steps_per_support: usize,
    /// Refinement stops once successive results change by less than this.
    pub refine_tol: f64,
    pub max_refinements: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            steps_per_support: 4096,
            refine_tol: 1e-10,
            max_refinements: 8,
        }
    }
}

/// Right-hand side coefficient `q(r) = ½ λ V(r) - ν` evaluated strictly
/// inside the piece `[lo, hi]`, so discontinuous profiles are sampled from
/// the correct side at breakpoints.
fn coefficient(pot: &RadialPotential, lambda: f64, nu: f64, r: f64, lo: f64, hi: f64) -> f64 {
    let eps = 1e-12 * (hi - lo);
    let rr = r.clamp(lo + eps, hi - eps);
    0.5 * lambda * pot.value(rr) - nu
}

/// RK4 for `u'' = q(r) u` across consecutive pieces. `pieces` are visited in
/// order and may run backwards (`hi < lo`). Returns the final state and,
/// when `record` is set, every node `(r, u, u')` including both ends.
/// The state is rescaled by a positive factor whenever it grows past
/// `RESCALE_AT`; recorded values are rescaled consistently.
fn rk4_pieces(
    pot: &RadialPotential,
    lambda: f64,
    nu: f64,
    pieces: &[(f64, f64)],
    h_max: f64,
    mut state: (f64, f64),
    mut record: Option<&mut Vec<(f64, f64, f64)>>,
) -> (f64, f64) {
    if let Some(rec) = record.as_deref_mut() {
        rec.push((pieces[0].0, state.0, state.1));
    }
    for &(start, end) in pieces {
        let (lo, hi) = if start < end { (start, end) } else { (end, start) };
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let steps = (len / h_max).ceil().max(1.0) as usize;
        let h = (end - start) / steps as f64;
        let q = |r: f64| coefficient(pot, lambda, nu, r, lo, hi);
        for k in 0..steps {
            let r = start + h * k as f64;
            let (u, v) = state;
            let q0 = q(r);
            let qm = q(r + 0.5 * h);
            let q1 = q(r + h);
            let k1u = v;
            let k1v = q0 * u;
            let k2u = v + 0.5 * h * k1v;
            let k2v = qm * (u + 0.5 * h * k1u);
            let k3u = v + 0.5 * h * k2v;
            let k3v = qm * (u + 0.5 * h * k2u);
            let k4u = v + h * k3v;
            let k4v = q1 * (u + h * k3u);
            state = (
                u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
                v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
            );
            let r_next = if k + 1 == steps { end } else { start + h * (k + 1) as f64 };
            let mag = state.0.abs().max(state.1.abs());
            if mag > RESCALE_AT {
                let s = 1.0 / mag;
                state = (state.0 * s, state.1 * s);
                if let Some(rec) = record.as_deref_mut() {
                    for e in rec.iter_mut() {
                        e.1 *= s;
                        e.2 *= s;
                    }
                }
            }
            if let Some(rec) = record.as_deref_mut() {
                rec.push((r_next, state.0, state.1));
            }
        }
    }
    state
}

fn outward_pieces(pot: &RadialPotential) -> Vec<(f64, f64)> {
    pot.breakpoints().windows(2).map(|w| (w[0], w[1])).collect()
}

fn inward_pieces(pot: &RadialPotential) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = outward_pieces(pot).into_iter().map(|(a, b)| (b, a)).collect();
    v.reverse();
    v
}

/// Solution of the zero-energy scattering problem.
#[derive(Debug, Clone)]
pub struct ZeroEnergySolution {
    pub a_lambda: f64,
    pub b: f64,
    pub lambda: f64,
    pub r_out: f64,
    /// Nodes `(r, u, u')` on `[0, r_out]`, normalized so `u'(b) = 1`.
    nodes: Vec<(f64, f64, f64)>,
    pub steps_per_support: usize,
}

impl ZeroEnergySolution {
    pub fn nodes(&self) -> &[(f64, f64, f64)] {
        &self.nodes
    }

    /// `f = u / r` on `[0, b]` as a Hermite table (extended by 1 beyond).
    pub fn profile_table(&self) -> Result<HermiteTable> {
        profile_table(&self.nodes, self.b)
    }
}

fn f_and_df(r: f64, u: f64, du: f64) -> (f64, f64) {
    if r == 0.0 {
        (du, 0.0)
    } else {
        (u / r, (du * r - u) / (r * r))
    }
}

fn profile_table(nodes: &[(f64, f64, f64)], up_to: f64) -> Result<HermiteTable> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut d = Vec::new();
    for &(r, u, du) in nodes.iter().filter(|n| n.0 <= up_to) {
        if x.last().is_some_and(|&last| r <= last) {
            continue;
        }
        let (f, df) = f_and_df(r, u, du);
        x.push(r);
        y.push(f);
        d.push(df);
    }
    HermiteTable::new(x, y, d, 1.0)
}

fn zero_energy_once(pot: &RadialPotential, lambda: f64, steps: usize) -> (f64, Vec<(f64, f64, f64)>) {
    let b = pot.support();
    let h = b / steps as f64;
    let mut rec = Vec::with_capacity(steps + 8);
    let (ub, dub) = rk4_pieces(pot, lambda, 0.0, &outward_pieces(pot), h, (0.0, 1.0), Some(&mut rec));
    let a = b - ub / dub;
    for e in rec.iter_mut() {
        e.1 /= dub;
        e.2 /= dub;
    }
    (a, rec)
}

/// Solves `(-Δ + ½ λ V) f = 0`, `f → 1`, returning the scattering length.
pub fn solve_zero_energy(pot: &RadialPotential, lambda: f64) -> Result<ZeroEnergySolution> {
    solve_zero_energy_with(pot, lambda, RadialOptions::default())
}

pub fn solve_zero_energy_with(
    pot: &RadialPotential,
    lambda: f64,
    opts: RadialOptions,
) -> Result<ZeroEnergySolution> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling must be finite and >= 0, got {lambda}")));
    }
    let b = pot.support();
    if pot.is_zero() || lambda == 0.0 {
        let r_out = 2.0 * b;
        let n = opts.steps_per_support.max(2);
        let nodes = (0..=2 * n)
            .map(|i| {
                let r = r_out * i as f64 / (2 * n) as f64;
                (r, r, 1.0)
            })
            .collect();
        return Ok(ZeroEnergySolution {
            a_lambda: 0.0,
            b,
            lambda,
            r_out,
            nodes,
            steps_per_support: n,
        });
    }
    let mut steps = opts.steps_per_support.max(2);
    let (mut a, mut rec) = zero_energy_once(pot, lambda, steps);
    let mut converged = false;
    for _ in 0..opts.max_refinements {
        let (a2, rec2) = zero_energy_once(pot, lambda, 2 * steps);
        let delta = (a2 - a).abs();
        a = a2;
        rec = rec2;
        steps *= 2;
        if delta < opts.refine_tol {
            converged = true;
            break;
        }
    }
    if !converged || !a.is_finite() {
        return Err(Error::StepUnderflow {
            step: b / steps as f64,
        });
    }
    // exterior: u = r - a exactly
    let r_out = 2.0 * b;
    let h = b / steps as f64;
    let n_ext = ((r_out - b) / h).round() as usize;
    for i in 1..=n_ext {
        let r = b + (r_out - b) * i as f64 / n_ext as f64;
        rec.push((r, r - a, 1.0));
    }
    Ok(ZeroEnergySolution {
        a_lambda: a,
        b,
        lambda,
        r_out,
        nodes: rec,
        steps_per_support: steps,
    })
}

/// `ε(λ) = b - a^λ`.
pub fn epsilon_lambda(pot: &RadialPotential, lambda: f64) -> Result<f64> {
    let z = solve_zero_energy(pot, lambda)?;
    Ok(z.b - z.a_lambda)
}

/// Solution of the Neumann problem on the ball of radius `R`.
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub nu_ell: f64,
    pub r_ball: f64,
    pub b: f64,
    pub lambda: f64,
    pub a_lambda: f64,
    pub bisection_steps: usize,
    pub steps_per_support: usize,
    /// Nodes `(r, f, f')` on `[0, R]`.
    nodes: Vec<(f64, f64, f64)>,
    interior: HermiteTable,
    pub warnings: Vec<String>,
}

/// Exact free solution `-u'' = ν u` with `u(R) = R`, `u'(R) = 1`.
fn exterior_state(nu: f64, r_ball: f64, r: f64) -> (f64, f64) {
    let x = r - r_ball;
    if nu == 0.0 {
        return (r, 1.0);
    }
    let k = nu.sqrt();
    let (s, c) = (k * x).sin_cos();
    (r_ball * c + x * crate::potentials::sinc(k * x), -r_ball * k * s + c)
}

impl NeumannSolution {
    pub fn nodes(&self) -> &[(f64, f64, f64)] {
        &self.nodes
    }

    /// `f_ℓ(r)`, extended by 1 for `r > R`.
    pub fn f(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r_ball {
            1.0
        } else if r >= self.b {
            exterior_state(self.nu_ell, self.r_ball, r).0 / r
        } else {
            self.interior.eval(r)
        }
    }

    /// `w_ℓ = 1 - f_ℓ`.
    pub fn w(&self, r: f64) -> f64 {
        1.0 - self.f(r)
    }

    pub fn dw(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r_ball {
            0.0
        } else if r >= self.b {
            let (u, du) = exterior_state(self.nu_ell, self.r_ball, r);
            -(du * r - u) / (r * r)
        } else {
            -self.interior.eval_deriv(r)
        }
    }

    /// `f_ℓ` on `[0, b]` as a Hermite table, the weight of the modified
    /// mean-field kernel.
    pub fn profile_table(&self) -> HermiteTable {
        self.interior.clone()
    }

    /// Eigenvalue of the problem rescaled to the ball of radius `R / N`.
    pub fn scaled_eigenvalue(&self, n: f64) -> f64 {
        n * n * self.nu_ell
    }
}

/// Shooting mismatch `u(0; ν)` for the inward problem.
fn neumann_mismatch(pot: &RadialPotential, lambda: f64, nu: f64, r_ball: f64, h: f64) -> f64 {
    let b = pot.support();
    let start = exterior_state(nu, r_ball, b);
    let (u0, _) = rk4_pieces(pot, lambda, nu, &inward_pieces(pot), h, start, None);
    u0
}

fn bisect_nu(pot: &RadialPotential, lambda: f64, r_ball: f64, h: f64, hi: f64) -> Result<(f64, usize)> {
    let m_lo = neumann_mismatch(pot, lambda, 0.0, r_ball, h);
    if m_lo == 0.0 {
        return Ok((0.0, 0));
    }
    let m_hi = neumann_mismatch(pot, lambda, hi, r_ball, h);
    if m_lo.signum() == m_hi.signum() {
        return Err(Error::Bracket {
            lo: 0.0,
            hi,
            m_lo,
            m_hi,
        });
    }
    let (mut lo, mut hi) = (0.0f64, hi);
    let s_lo = m_lo.signum();
    let mut iters = 0;
    while iters < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        let m = neumann_mismatch(pot, lambda, mid, r_ball, h);
        iters += 1;
        if m == 0.0 {
            return Ok((mid, iters));
        }
        if m.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iters))
}

pub fn solve_neumann(pot: &RadialPotential, lambda: f64, r_ball: f64) -> Result<NeumannSolution> {
    solve_neumann_with(pot, lambda, r_ball, RadialOptions::default())
}

pub fn solve_neumann_with(
    pot: &RadialPotential,
    lambda: f64,
    r_ball: f64,
    opts: RadialOptions,
) -> Result<NeumannSolution> {
    let b = pot.support();
    if !(r_ball > b) || !r_ball.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ball radius R = {r_ball} must exceed the support radius b = {b}"
        )));
    }
    let zsol = solve_zero_energy_with(pot, lambda, opts)?;
    let a = zsol.a_lambda;
    let hi = 30.0 * if a > 0.0 { a } else { b } / r_ball.powi(3);
    let span = b.min(r_ball);

    let mut steps = opts.steps_per_support.max(2);
    let mut nu;
    let mut iters;
    if pot.is_zero() || lambda == 0.0 {
        nu = 0.0;
        iters = 0;
    } else {
        (nu, iters) = bisect_nu(pot, lambda, r_ball, span / steps as f64, hi)?;
        let mut converged = false;
        for _ in 0..opts.max_refinements {
            let (nu2, it2) = bisect_nu(pot, lambda, r_ball, span / (2 * steps) as f64, hi)?;
            let delta = (nu2 - nu).abs();
            nu = nu2;
            iters = it2;
            steps *= 2;
            if delta <= opts.refine_tol * nu.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StepUnderflow {
                step: span / steps as f64,
            });
        }
    }

    // Tabulate: regular solution on the support, matched in value to the
    // exterior solution at b.
    let h = span / steps as f64;
    let mut rec = Vec::with_capacity(steps + 8);
    let (ub, _) = rk4_pieces(pot, lambda, nu, &outward_pieces(pot), h, (0.0, 1.0), Some(&mut rec));
    let (ext_b, _) = exterior_state(nu, r_ball, b);
    let scale = ext_b / ub;
    let mut nodes: Vec<(f64, f64, f64)> = rec
        .iter()
        .map(|&(r, u, du)| {
            let (f, df) = f_and_df(r, u * scale, du * scale);
            (r, f, df)
        })
        .collect();
    let interior = {
        let mut x = Vec::with_capacity(nodes.len());
        let mut y = Vec::with_capacity(nodes.len());
        let mut d = Vec::with_capacity(nodes.len());
        for &(r, f, df) in &nodes {
            if x.last().is_some_and(|&l| r <= l) {
                continue;
            }
            x.push(r);
            y.push(f);
            d.push(df);
        }
        HermiteTable::new(x, y, d, 1.0)?
    };
    let ext_len = r_ball - b;
    let n_ext = ((ext_len / h).round() as usize).clamp(1, 1 << 20);
    for i in 1..=n_ext {
        let r = if i == n_ext { r_ball } else { b + ext_len * i as f64 / n_ext as f64 };
        let (u, du) = exterior_state(nu, r_ball, r);
        let (f, df) = f_and_df(r, u, du);
        nodes.push((r, f, df));
    }

    let mut warnings = Vec::new();
    let mut worst_drop: f64 = 0.0;
    for w in nodes.windows(2) {
        worst_drop = worst_drop.max(w[0].1 - w[1].1);
    }
    if worst_drop > 1e-10 {
        let msg = format!("f_ell is not monotone: largest decrease {worst_drop:.3e}");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    Ok(NeumannSolution {
        nu_ell: nu,
        r_ball,
        b,
        lambda,
        a_lambda: a,
        bisection_steps: iters,
        steps_per_support: steps,
        nodes,
        interior,
        warnings,
    })
}

/// Ceilings for the constants reported by [`check_scattering_bounds`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCeilings {
    /// `|∫ V f_ℓ - 8π a| <= dev_const · b / R`.
    pub dev_const: f64,
    /// `sup r w(r) / b`.
    pub w_const: f64,
    /// `sup r² |w'(r)| / b`.
    pub dw_const: f64,
}

impl Default for BoundCeilings {
    fn default() -> Self {
        Self {
            dev_const: 20.0,
            w_const: 2.0,
            dw_const: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatteringBoundsReport {
    pub lambda: f64,
    pub r_ball: f64,
    pub a_lambda: f64,
    pub nu_ell: f64,
    pub int_vf: f64,
    pub dev_8pia: f64,
    pub sup_rw: f64,
    pub sup_r2dw: f64,
    pub dev_ok: bool,
    pub w_ok: bool,
    pub dw_ok: bool,
}

impl ScatteringBoundsReport {
    pub fn passed(&self) -> bool {
        self.dev_ok && self.w_ok && self.dw_ok
    }
}

/// `∫_{|x| <= b} λ V f dx` by radial quadrature of a tabulated profile.
pub fn integrate_vf(pot: &RadialPotential, lambda: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    if pot.is_zero() {
        return Ok(0.0);
    }
    let opts = QuadOptions {
        abs_tol: 1e-13,
        ..Default::default()
    };
    let i = integrate_pieces(|r| r * r * pot.value(r) * f(r), &pot.breakpoints(), opts)?;
    Ok(4.0 * PI * lambda * i)
}

/// Integral identity and decay constants of a Neumann profile against the
/// scattering length of the same potential.
pub fn check_scattering_bounds(
    pot: &RadialPotential,
    nsol: &NeumannSolution,
    zsol: &ZeroEnergySolution,
    ceilings: BoundCeilings,
) -> Result<ScatteringBoundsReport> {
    if (nsol.lambda - zsol.lambda).abs() > 1e-12 * nsol.lambda.abs().max(1.0) || nsol.b != zsol.b {
        return Err(Error::InvalidParameter(
            "Neumann and zero-energy solutions belong to different problems".into(),
        ));
    }
    let b = nsol.b;
    let int_vf = integrate_vf(pot, nsol.lambda, &|r| nsol.f(r))?;
    let dev = int_vf - 8.0 * PI * zsol.a_lambda;
    let mut sup_rw: f64 = 0.0;
    let mut sup_r2dw: f64 = 0.0;
    for &(r, f, df) in &nsol.nodes {
        sup_rw = sup_rw.max(r * (1.0 - f) / b);
        sup_r2dw = sup_r2dw.max(r * r * df.abs() / b);
    }
    Ok(ScatteringBoundsReport {
        lambda: nsol.lambda,
        r_ball: nsol.r_ball,
        a_lambda: zsol.a_lambda,
        nu_ell: nsol.nu_ell,
        int_vf,
        dev_8pia: dev,
        sup_rw,
        sup_r2dw,
        dev_ok: dev.abs() <= ceilings.dev_const * b / nsol.r_ball,
        w_ok: sup_rw <= ceilings.w_const,
        dw_ok: sup_r2dw <= ceilings.dw_const,
    })
}
