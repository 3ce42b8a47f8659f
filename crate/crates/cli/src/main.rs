//! Command-line front end: each subcommand reads a config, runs one
//! computation and writes CSV/JSON outputs plus a manifest into `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use gpmix::bogoliubov::{build_kernels, ch_sh, hs_norm_coarse, hs_norm_fft, mu0, pointwise_bound_report, symplectic_residual};
use gpmix::diagnostics::dispersive::dispersive_ratio;
use gpmix::diagnostics::morawetz::{morawetz_inequality_check, morawetz_series};
use gpmix::diagnostics::sweep::{convergence_sweep, fit_line, LambdaSchedule, LimitCoupling, SweepConfig};
use gpmix::dynamics::{gaussian_pair, EvolveOptions, GpParams, GpSystem, RunReport};
use gpmix::field::Field2C;
use gpmix::grid::Grid3;
use gpmix::ground_state::{gaussian_guess, harmonic_trap, minimize, GroundStateProblem};
use gpmix::io::config::{LimitKind, Model, ScheduleKind};
use gpmix::io::manifest::{unix_now, RunManifest};
use gpmix::io::snapshot::{read_snapshot, write_snapshot};
use gpmix::io::table::{write_json, Table};
use gpmix::io::RunConfig;
use gpmix::potentials::{radial_fourier, CouplingSpec, PairTag, RadialPotential};
use gpmix::scattering::{check_scattering_bounds, solve_neumann, solve_zero_energy, BoundCeilings, NeumannSolution};
use gpmix::spectral::Spectral;
use gpmix::{Error, Result};

#[derive(Parser)]
#[command(name = "gpmix", version, about = "Two-component Gross-Pitaevskii toolkit")]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Override a config value, `section.key=value`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scattering lengths, Neumann eigenvalues and profile bounds per pair.
    Scatter {
        /// Coupling strength, overrides `coupling.lambda`
        #[arg(long)]
        lambda: Option<f64>,
        /// Comma-separated ball radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Trapped ground state.
    Groundstate,
    /// Time evolution with per-sample diagnostics.
    Evolve,
    /// Modified-versus-limiting convergence over N.
    Sweep,
    /// Pair-excitation kernels and their hyperbolic series.
    Bogo,
    /// Interaction Morawetz inequality on a run.
    Morawetz,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Scatter { .. } => "scatter",
            Cmd::Groundstate => "groundstate",
            Cmd::Evolve => "evolve",
            Cmd::Sweep => "sweep",
            Cmd::Bogo => "bogo",
            Cmd::Morawetz => "morawetz",
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    files: Vec<PathBuf>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.into());
        self.out.join(name)
    }

    fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.cfg.grid.n, self.cfg.grid.box_length)
    }

    fn potentials(&self) -> Result<[RadialPotential; 3]> {
        Ok([
            self.cfg.potentials[0].build()?,
            self.cfg.potentials[1].build()?,
            self.cfg.potentials[2].build()?,
        ])
    }

    fn masses(&self) -> [f64; 2] {
        [self.cfg.coupling.fraction, 1.0 - self.cfg.coupling.fraction]
    }

    fn initial_field(&self) -> Result<Field2C> {
        match &self.cfg.dynamics.snapshot {
            Some(p) => {
                let f = read_snapshot(p)?;
                if f.grid != self.grid()? {
                    return Err(Error::GridMismatch(format!("snapshot {} does not match [grid]", p.display())));
                }
                Ok(f)
            }
            None => gaussian_pair(self.grid()?, [self.cfg.dynamics.sigma; 2], self.masses()),
        }
    }

    fn neumann(&self, pots: &[RadialPotential; 3]) -> Result<Vec<NeumannSolution>> {
        let c = &self.cfg.coupling;
        pots.iter()
            .map(|p| solve_neumann(p, c.lambda, c.n_particles as f64 * c.ell))
            .collect()
    }

    fn params(&self) -> Result<GpParams> {
        let pots = self.potentials()?;
        let c = &self.cfg.coupling;
        match self.cfg.dynamics.model {
            Model::Limiting => {
                let a: Vec<f64> = pots
                    .iter()
                    .map(|p| solve_zero_energy(p, c.lambda).map(|z| z.a_lambda))
                    .collect::<Result<_>>()?;
                GpParams::limiting(a[0], a[1], a[2], self.masses())
            }
            Model::Modified => {
                let nsol = self.neumann(&pots)?;
                let mut prof = Vec::new();
                for p in 0..3 {
                    let spec = CouplingSpec::new(c.lambda, c.n_particles, PairTag::ALL[p])?;
                    prof.push(radial_fourier(&pots[p], &spec, Some(Arc::new(nsol[p].profile_table())))?);
                }
                let [a, b, d]: [_; 3] = prof.try_into().expect("three profiles");
                Ok(GpParams::modified(a, b, d, self.masses()))
            }
        }
    }

    fn run_dynamics(&self, morawetz: bool) -> Result<(Field2C, RunReport)> {
        let spec = Arc::new(Spectral::new(self.grid()?));
        let sys = GpSystem::new(spec, &self.params()?)?;
        let d = &self.cfg.dynamics;
        let opts = EvolveOptions {
            t_final: d.t_final,
            dt: d.dt,
            sample_every: d.sample_every,
            morawetz,
        };
        sys.evolve(self.initial_field()?, &opts, &mut [])
    }
}

fn scatter(ctx: &mut Ctx, lambda: Option<f64>, radii: Option<Vec<f64>>) -> Result<()> {
    if let Some(l) = lambda {
        ctx.cfg.coupling.lambda = l;
    }
    if let Some(r) = radii {
        ctx.cfg.coupling.radii = r;
    }
    let pots = ctx.potentials()?;
    let lambda = ctx.cfg.coupling.lambda;
    let mut table = Table::new(&[
        "pair", "lambda", "R", "a_lambda", "epsilon", "nu_ell", "int_Vf", "dev_8pia", "sup_rw", "sup_r2dw",
    ]);
    let mut summary = Vec::new();
    for (p, pot) in pots.iter().enumerate() {
        let z = solve_zero_energy(pot, lambda)?;
        let mut nu = Vec::new();
        let mut dev = Vec::new();
        let mut pass = true;
        for &r in &ctx.cfg.coupling.radii {
            let n = solve_neumann(pot, lambda, r)?;
            let rep = check_scattering_bounds(pot, &n, &z, BoundCeilings::default())?;
            pass &= rep.passed();
            nu.push((r.ln(), rep.nu_ell.ln()));
            dev.push((r.ln(), rep.dev_8pia.abs().ln()));
            table.push(vec![
                PairTag::ALL[p].as_str().into(),
                lambda.into(),
                r.into(),
                z.a_lambda.into(),
                (z.b - z.a_lambda).into(),
                rep.nu_ell.into(),
                rep.int_vf.into(),
                rep.dev_8pia.into(),
                rep.sup_rw.into(),
                rep.sup_r2dw.into(),
            ])?;
        }
        summary.push(json!({
            "pair": PairTag::ALL[p].as_str(),
            "a_lambda": z.a_lambda,
            "epsilon": z.b - z.a_lambda,
            "nu_slope": fit_line(&nu).map(|f| f.0),
            "dev_slope": fit_line(&dev).map(|f| f.0),
            "bounds_ok": pass,
        }));
    }
    table.write(&ctx.path("scatter.csv"))?;
    write_json(&summary, &ctx.path("scatter.json"))
}

fn groundstate(ctx: &mut Ctx) -> Result<()> {
    let g = ctx.grid()?;
    let gs = &ctx.cfg.groundstate;
    let a = if gs.interacting {
        let pots = ctx.potentials()?;
        let mut a = [0.0; 3];
        for p in 0..3 {
            a[p] = solve_zero_energy(&pots[p], ctx.cfg.coupling.lambda)?.a_lambda;
        }
        a
    } else {
        [0.0; 3]
    };
    let mut prob = GroundStateProblem::new(harmonic_trap(&g, gs.omega), a, ctx.cfg.coupling.fraction)?;
    prob.tol = gs.tol;
    prob.max_iters = gs.max_iters;
    let spec = Spectral::new(g);
    let guess = gaussian_guess(&g, gs.guess_width);
    let res = minimize(&spec, &prob, guess.clone(), guess)?;
    let mut table = Table::new(&["iteration", "energy"]);
    for (i, e) in res.energies.iter().enumerate() {
        table.push(vec![i.into(), (*e).into()])?;
    }
    table.write(&ctx.path("groundstate_energy.csv"))?;
    write_json(&json!({ "couplings": a, "result": res }), &ctx.path("groundstate.json"))?;
    if ctx.cfg.output.snapshot {
        let f = Field2C::from_arrays(g, res.u, res.v, 0.0)?;
        write_snapshot(&f, &ctx.path("groundstate.bin"))?;
    }
    Ok(())
}

fn evolve(ctx: &mut Ctx) -> Result<()> {
    let (last, rep) = ctx.run_dynamics(false)?;
    let mut table = Table::new(&["t", "mass1", "mass2", "energy", "linf", "l4x", "w1inf", "boundary_density"]);
    for s in &rep.samples {
        table.push(vec![
            s.t.into(),
            s.mass[0].into(),
            s.mass[1].into(),
            s.energy.into(),
            s.linf.into(),
            s.l4x.into(),
            s.w1inf.into(),
            s.boundary_density.into(),
        ])?;
    }
    table.write(&ctx.path("evolve.csv"))?;
    let t = ctx.cfg.dynamics.t_final;
    let disp = dispersive_ratio(&rep, (t.min(1.0), t));
    write_json(
        &json!({
            "steps": rep.steps,
            "dt": rep.dt,
            "truncation_suspect": rep.truncation_suspect,
            "spacetime_l4": rep.spacetime_l4(),
            "dispersive_window": disp.window,
            "dispersive_ratio": disp.ratio,
            "dispersive_warning": disp.warning,
        }),
        &ctx.path("evolve.json"),
    )?;
    if ctx.cfg.output.snapshot {
        write_snapshot(&last, &ctx.path("final.bin"))?;
    }
    Ok(())
}

fn morawetz(ctx: &mut Ctx) -> Result<()> {
    let (_, rep) = ctx.run_dynamics(true)?;
    let series = morawetz_series(&rep);
    let mut table = Table::new(&["t", "V_a", "M_a", "rho2"]);
    for s in &series {
        table.push(vec![s.t.into(), s.v_a.into(), s.m_a.into(), s.rho2.into()])?;
    }
    table.write(&ctx.path("morawetz.csv"))?;
    let report = morawetz_inequality_check(&series);
    write_json(
        &json!({ "report": report, "truncation_suspect": rep.truncation_suspect }),
        &ctx.path("morawetz.json"),
    )
}

fn sweep(ctx: &mut Ctx) -> Result<()> {
    let c = &ctx.cfg;
    let sc = SweepConfig {
        grid: ctx.grid()?,
        dt: c.dynamics.dt,
        t_final: c.dynamics.t_final,
        sample_every: c.dynamics.sample_every,
        potentials: ctx.potentials()?,
        n_list: c.sweep.n_list.clone(),
        schedule: match c.sweep.schedule {
            ScheduleKind::Fixed => LambdaSchedule::Fixed(c.coupling.lambda),
            ScheduleKind::Log => LambdaSchedule::Log { gamma: c.sweep.gamma },
        },
        ell: c.coupling.ell,
        fractions: ctx.masses(),
        sigma: [c.dynamics.sigma; 2],
        limit: match c.sweep.limit {
            LimitKind::ScatteringLength => LimitCoupling::ScatteringLength,
            LimitKind::HardCore => LimitCoupling::HardCore,
        },
        force_identical: false,
        min_fit_n: c.sweep.min_fit_n,
    };
    let res = convergence_sweep(&sc)?;
    let mut table = Table::new(&["N", "lambda", "epsilon_11", "epsilon_22", "epsilon_12", "err_h1", "err_l4", "truncation_suspect"]);
    for r in &res.rows {
        table.push(vec![
            r.n.into(),
            r.lambda.into(),
            r.epsilon[0].into(),
            r.epsilon[1].into(),
            r.epsilon[2].into(),
            r.err_h1.into(),
            r.err_l4.into(),
            r.truncation_suspect.into(),
        ])?;
    }
    table.write(&ctx.path("sweep.csv"))?;
    write_json(&res, &ctx.path("sweep.json"))
}

fn bogo(ctx: &mut Ctx) -> Result<()> {
    let g = ctx.grid()?;
    let spec = Spectral::new(g);
    let f = ctx.initial_field()?;
    let pots = ctx.potentials()?;
    let nsol = ctx.neumann(&pots)?;
    let refs = [&nsol[0], &nsol[1], &nsol[2]];
    let c = &ctx.cfg.coupling;
    let n = c.n_particles;
    let kb = build_kernels(&spec, &f, refs, n, ctx.cfg.bogoliubov.coarse_m)?;
    let pair = ch_sh(&kb)?;
    let fro = gpmix::bogoliubov::frobenius;
    let out = json!({
        "coarse_m": kb.m(),
        "n_particles": n,
        "hs_norm_fft": hs_norm_fft(&spec, &f, refs, n)?,
        "hs_norm_coarse": hs_norm_coarse(&kb),
        "cross_symmetry_defect": kb.cross_symmetry_defect(),
        "series_terms": pair.n_max,
        "series_tail": pair.tail,
        "norm_p": fro(&pair.p),
        "norm_r": fro(&pair.r),
        "symplectic_residual": symplectic_residual(&pair),
        "pointwise": pointwise_bound_report(&kb, ctx.cfg.bogoliubov.ceiling),
        "mu0": mu0(&spec, &f, [&pots[0], &pots[1], &pots[2]], [c.lambda; 3], n)?,
    });
    write_json(&out, &ctx.path("bogo.json"))
}

fn run(cli: Cli) -> Result<()> {
    let started = unix_now();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text)?;
    for s in &cli.set {
        cfg = cfg.with_override(s)?;
    }
    let threads = cli.threads.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&cli.out)?;
    let mut ctx = Ctx {
        cfg,
        out: cli.out.clone(),
        files: Vec::new(),
    };
    let name = cli.cmd.name();
    log::info!("running {name} into {}", cli.out.display());
    match cli.cmd {
        Cmd::Scatter { lambda, radii } => scatter(&mut ctx, lambda, radii)?,
        Cmd::Groundstate => groundstate(&mut ctx)?,
        Cmd::Evolve => evolve(&mut ctx)?,
        Cmd::Sweep => sweep(&mut ctx)?,
        Cmd::Bogo => bogo(&mut ctx)?,
        Cmd::Morawetz => morawetz(&mut ctx)?,
    }
    let canon = ctx.cfg.to_text();
    RunManifest::new(name, &canon, rayon::current_num_threads(), started).finish(Path::new(&ctx.out), &ctx.files)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
