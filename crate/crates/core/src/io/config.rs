//! INI-style run configuration.
//!
//! ```text
//! schema_version = 1
//!
//! [grid]
//! n = 32
//! box_length = 24.0
//!
//! [potential.12]
//! kind = shell
//! v0 = 1.0
//! r0 = 0.25
//! b = 1.0
//! ```
//!
//! Sections may be omitted; missing keys take their defaults. Unknown
//! sections or keys, duplicates and malformed values are errors carrying
//! the offending line. [`RunConfig::to_text`] writes every key, so the
//! canonical form of a file is `parse(x).to_text()`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::potentials::RadialPotential;

pub const SCHEMA_VERSION: u32 = 1;

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Points per axis.
    pub n: usize,
    /// Side of the periodic box.
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    SquareWell { v0: f64, b: f64 },
    Shell { v0: f64, r0: f64, b: f64 },
    /// Two-column `r v` file.
    Table { path: PathBuf },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<RadialPotential> {
        match self {
            PotentialConfig::SquareWell { v0, b } => RadialPotential::square_well(*v0, *b),
            PotentialConfig::Shell { v0, r0, b } => RadialPotential::shell(*v0, *r0, *b),
            PotentialConfig::Table { path } => RadialPotential::from_table_file(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    /// Coupling strength `λ >= 1`.
    pub lambda: f64,
    /// Scaling integer `N`.
    pub n_particles: u64,
    /// Neumann ball radius `ℓ` in the rescaled variable.
    pub ell: f64,
    /// Fraction `𝔫₁` of species 1.
    pub fraction: f64,
    /// Ball radii `R` for the scattering report.
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Cubic couplings `8π a`.
    Limiting,
    /// Convolution with `N³ λ V(N·) f(N·)`.
    Modified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub model: Model,
    pub t_final: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Width of the Gaussian initial data.
    pub sigma: f64,
    /// Initial state file; Gaussians when absent.
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateConfig {
    /// Trap frequency `ω` in `W = ω²|x|²`.
    pub omega: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Width of the Gaussian initial guess.
    pub guess_width: f64,
    /// Use the scattering lengths of the potentials; zero couplings otherwise.
    pub interacting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Fixed,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    ScatteringLength,
    HardCore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfigSection {
    pub n_list: Vec<u64>,
    pub schedule: ScheduleKind,
    /// `γ` in `λ = γ ln N` for the log schedule.
    pub gamma: f64,
    pub limit: LimitKind,
    /// Smallest `N` entering the slope fit.
    pub min_fit_n: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovConfig {
    /// Coarse grid points per axis.
    pub coarse_m: usize,
    /// Ceiling for the pointwise-bound report.
    pub ceiling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Write the final state of `evolve`.
    pub snapshot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schema_version: u32,
    pub grid: GridConfig,
    /// Pairs 11, 22, 12.
    pub potentials: [PotentialConfig; 3],
    pub coupling: CouplingConfig,
    pub dynamics: DynamicsConfig,
    pub groundstate: GroundStateConfig,
    pub sweep: SweepConfigSection,
    pub bogoliubov: BogoliubovConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let well = PotentialConfig::SquareWell { v0: 2.0, b: 1.0 };
        Self {
            schema_version: SCHEMA_VERSION,
            grid: GridConfig { n: 32, box_length: 24.0 },
            potentials: [well.clone(), well.clone(), PotentialConfig::SquareWell { v0: 1.0, b: 1.0 }],
            coupling: CouplingConfig {
                lambda: 1.0,
                n_particles: 8,
                ell: 0.5,
                fraction: 0.5,
                radii: vec![25.0, 50.0, 100.0, 200.0],
            },
            dynamics: DynamicsConfig {
                model: Model::Limiting,
                t_final: 1.0,
                dt: 1e-3,
                sample_every: 10,
                sigma: 1.5,
                snapshot: None,
            },
            groundstate: GroundStateConfig {
                omega: 1.0,
                tol: 1e-13,
                max_iters: 200_000,
                guess_width: 1.0,
                interacting: true,
            },
            sweep: SweepConfigSection {
                n_list: vec![4, 8, 16, 32],
                schedule: ScheduleKind::Fixed,
                gamma: 1.0,
                limit: LimitKind::ScatteringLength,
                min_fit_n: 8,
            },
            bogoliubov: BogoliubovConfig {
                coarse_m: 8,
                ceiling: 10.0,
            },
            output: OutputConfig { snapshot: false },
        }
    }
}

const PAIR_NAMES: [&str; 3] = ["11", "22", "12"];

#[derive(Debug)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn finish(self, name: &str) -> Result<()> {
        if let Some((key, (_, line))) = self.entries.into_iter().min_by_key(|(_, (_, l))| *l) {
            return Err(cfg_err(line, format!("unknown key `{key}` in [{name}]")));
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current = String::new();
    sections.insert(
        current.clone(),
        Section {
            line: 0,
            entries: BTreeMap::new(),
        },
    );
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, "unterminated section header"))?
                .trim()
                .to_string();
            if let Some(prev) = sections.get(&name) {
                return Err(cfg_err(
                    line,
                    format!("section [{name}] repeated (first on line {})", prev.line),
                ));
            }
            sections.insert(
                name.clone(),
                Section {
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = name;
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{s}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(cfg_err(line, "empty key"));
        }
        let sec = sections.get_mut(&current).expect("current section exists");
        if let Some((_, first)) = sec.entries.get(&key) {
            return Err(cfg_err(
                line,
                format!("duplicate key `{key}` on lines {first} and {line}"),
            ));
        }
        sec.entries.insert(key, (value, line));
    }
    Ok(sections)
}

fn parse_num<T: std::str::FromStr>(v: &(String, usize), key: &str, what: &str) -> Result<T> {
    v.0.parse::<T>()
        .map_err(|_| cfg_err(v.1, format!("`{key}` expects {what}, got `{}`", v.0)))
}

fn get_f64(sec: &mut Section, key: &str, default: f64) -> Result<f64> {
    match sec.take(key) {
        None => Ok(default),
        Some(v) => {
            let x: f64 = parse_num(&v, key, "a number")?;
            if !x.is_finite() {
                return Err(cfg_err(v.1, format!("`{key}` must be finite")));
            }
            Ok(x)
        }
    }
}

fn get_usize(sec: &mut Section, key: &str, default: usize) -> Result<usize> {
    sec.take(key).map_or(Ok(default), |v| parse_num(&v, key, "a nonnegative integer"))
}

fn get_u64(sec: &mut Section, key: &str, default: u64) -> Result<u64> {
    sec.take(key).map_or(Ok(default), |v| parse_num(&v, key, "a nonnegative integer"))
}

fn get_bool(sec: &mut Section, key: &str, default: bool) -> Result<bool> {
    sec.take(key).map_or(Ok(default), |v| parse_num(&v, key, "true or false"))
}

fn get_list<T: std::str::FromStr>(sec: &mut Section, key: &str, default: Vec<T>, what: &str) -> Result<Vec<T>> {
    match sec.take(key) {
        None => Ok(default),
        Some((text, line)) => {
            let out: Result<Vec<T>> = text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|_| cfg_err(line, format!("`{key}` expects a comma-separated list of {what}, got `{text}`")))
                })
                .collect();
            let out = out?;
            if out.is_empty() {
                return Err(cfg_err(line, format!("`{key}` must not be empty")));
            }
            Ok(out)
        }
    }
}

fn get_choice<T: Copy>(sec: &mut Section, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
    match sec.take(key) {
        None => Ok(default),
        Some((v, line)) => options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            cfg_err(line, format!("`{key}` must be one of {}, got `{v}`", names.join(", ")))
        }),
    }
}

fn require_f64(sec: &mut Section, key: &str, name: &str) -> Result<f64> {
    let line = sec.line;
    match sec.take(key) {
        None => Err(cfg_err(line, format!("[{name}] is missing required key `{key}`"))),
        Some(v) => parse_num(&v, key, "a number"),
    }
}

fn parse_potential(mut sec: Section, name: &str) -> Result<PotentialConfig> {
    let (kind, kline) = sec
        .take("kind")
        .ok_or_else(|| cfg_err(sec.line, format!("[{name}] is missing required key `kind`")))?;
    let pot = match kind.as_str() {
        "square_well" => PotentialConfig::SquareWell {
            v0: require_f64(&mut sec, "v0", name)?,
            b: require_f64(&mut sec, "b", name)?,
        },
        "shell" => PotentialConfig::Shell {
            v0: require_f64(&mut sec, "v0", name)?,
            r0: require_f64(&mut sec, "r0", name)?,
            b: require_f64(&mut sec, "b", name)?,
        },
        "table" => {
            let (path, _) = sec
                .take("path")
                .ok_or_else(|| cfg_err(sec.line, format!("[{name}] is missing required key `path`")))?;
            PotentialConfig::Table { path: path.into() }
        }
        other => {
            return Err(cfg_err(
                kline,
                format!("`kind` must be one of square_well, shell, table, got `{other}`"),
            ))
        }
    };
    sec.finish(name)?;
    Ok(pot)
}

fn range_check(ok: bool, line: usize, msg: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(cfg_err(line, msg))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = tokenize(text)?;
        let mut cfg = RunConfig::default();
        let empty = |line| Section {
            line,
            entries: BTreeMap::new(),
        };
        let mut pull = |name: &str| sections.remove(name);

        let mut top = pull("").unwrap_or_else(|| empty(0));
        if let Some(v) = top.take("schema_version") {
            let ver: u32 = parse_num(&v, "schema_version", "an integer")?;
            if ver != SCHEMA_VERSION {
                return Err(cfg_err(v.1, format!("unsupported schema_version {ver}, expected {SCHEMA_VERSION}")));
            }
        }
        top.finish("top level")?;

        if let Some(mut s) = pull("grid") {
            let line = s.line;
            cfg.grid.n = get_usize(&mut s, "n", cfg.grid.n)?;
            cfg.grid.box_length = get_f64(&mut s, "box_length", cfg.grid.box_length)?;
            s.finish("grid")?;
            range_check(
                crate::grid::is_supported_size(cfg.grid.n),
                line,
                format!("grid n = {} must be even, >= 8 and 5-smooth", cfg.grid.n),
            )?;
            range_check(cfg.grid.box_length > 0.0, line, "box_length must be > 0".into())?;
        }
        for (p, pair) in PAIR_NAMES.iter().enumerate() {
            let name = format!("potential.{pair}");
            if let Some(s) = pull(&name) {
                cfg.potentials[p] = parse_potential(s, &name)?;
            }
        }
        if let Some(mut s) = pull("coupling") {
            let line = s.line;
            let c = &mut cfg.coupling;
            c.lambda = get_f64(&mut s, "lambda", c.lambda)?;
            c.n_particles = get_u64(&mut s, "n_particles", c.n_particles)?;
            c.ell = get_f64(&mut s, "ell", c.ell)?;
            c.fraction = get_f64(&mut s, "fraction", c.fraction)?;
            c.radii = get_list(&mut s, "radii", c.radii.clone(), "numbers")?;
            s.finish("coupling")?;
            range_check(c.lambda >= 1.0, line, format!("lambda must be >= 1, got {}", c.lambda))?;
            range_check(c.n_particles >= 1, line, "n_particles must be >= 1".into())?;
            range_check(c.ell > 0.0, line, "ell must be > 0".into())?;
            range_check(c.fraction > 0.0 && c.fraction < 1.0, line, "fraction must lie in (0, 1)".into())?;
        }
        if let Some(mut s) = pull("dynamics") {
            let line = s.line;
            let d = &mut cfg.dynamics;
            d.model = get_choice(&mut s, "model", d.model, &[("limiting", Model::Limiting), ("modified", Model::Modified)])?;
            d.t_final = get_f64(&mut s, "t_final", d.t_final)?;
            d.dt = get_f64(&mut s, "dt", d.dt)?;
            d.sample_every = get_usize(&mut s, "sample_every", d.sample_every)?;
            d.sigma = get_f64(&mut s, "sigma", d.sigma)?;
            if let Some((p, _)) = s.take("snapshot") {
                d.snapshot = if p.is_empty() { None } else { Some(p.into()) };
            }
            s.finish("dynamics")?;
            range_check(d.t_final >= 0.0, line, "t_final must be >= 0".into())?;
            range_check(d.dt > 0.0, line, "dt must be > 0".into())?;
            range_check(d.sample_every >= 1, line, "sample_every must be >= 1".into())?;
            range_check(d.sigma > 0.0, line, "sigma must be > 0".into())?;
        }
        if let Some(mut s) = pull("groundstate") {
            let line = s.line;
            let g = &mut cfg.groundstate;
            g.omega = get_f64(&mut s, "omega", g.omega)?;
            g.tol = get_f64(&mut s, "tol", g.tol)?;
            g.max_iters = get_usize(&mut s, "max_iters", g.max_iters)?;
            g.guess_width = get_f64(&mut s, "guess_width", g.guess_width)?;
            g.interacting = get_bool(&mut s, "interacting", g.interacting)?;
            s.finish("groundstate")?;
            range_check(g.tol > 0.0 && g.guess_width > 0.0, line, "tol and guess_width must be > 0".into())?;
        }
        if let Some(mut s) = pull("sweep") {
            let line = s.line;
            let w = &mut cfg.sweep;
            w.n_list = get_list(&mut s, "n_list", w.n_list.clone(), "integers")?;
            w.schedule = get_choice(&mut s, "schedule", w.schedule, &[("fixed", ScheduleKind::Fixed), ("log", ScheduleKind::Log)])?;
            w.gamma = get_f64(&mut s, "gamma", w.gamma)?;
            w.limit = get_choice(
                &mut s,
                "limit",
                w.limit,
                &[("scattering_length", LimitKind::ScatteringLength), ("hard_core", LimitKind::HardCore)],
            )?;
            w.min_fit_n = get_u64(&mut s, "min_fit_n", w.min_fit_n)?;
            s.finish("sweep")?;
            range_check(w.n_list.iter().all(|n| *n >= 1), line, "n_list entries must be >= 1".into())?;
            range_check(w.gamma > 0.0, line, "gamma must be > 0".into())?;
        }
        if let Some(mut s) = pull("bogoliubov") {
            let line = s.line;
            let b = &mut cfg.bogoliubov;
            b.coarse_m = get_usize(&mut s, "coarse_m", b.coarse_m)?;
            b.ceiling = get_f64(&mut s, "ceiling", b.ceiling)?;
            s.finish("bogoliubov")?;
            range_check(
                b.coarse_m >= 2 && b.coarse_m % 2 == 0 && b.coarse_m.pow(3) <= crate::bogoliubov::MAX_COARSE_POINTS,
                line,
                format!("coarse_m must be even with coarse_m^3 <= {}", crate::bogoliubov::MAX_COARSE_POINTS),
            )?;
        }
        if let Some(mut s) = pull("output") {
            cfg.output.snapshot = get_bool(&mut s, "snapshot", cfg.output.snapshot)?;
            s.finish("output")?;
        }
        if let Some((name, s)) = sections.into_iter().min_by_key(|(_, s)| s.line) {
            return Err(cfg_err(s.line, format!("unknown section [{name}]")));
        }
        Ok(cfg)
    }

    /// Canonical text listing every key.
    pub fn to_text(&self) -> String {
        fn list<T: std::fmt::Debug>(v: &[T]) -> String {
            v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
        }
        let mut o = String::new();
        let _ = writeln!(o, "schema_version = {}", self.schema_version);
        let _ = writeln!(o, "\n[grid]\nn = {}\nbox_length = {:?}", self.grid.n, self.grid.box_length);
        for (p, pot) in self.potentials.iter().enumerate() {
            let _ = writeln!(o, "\n[potential.{}]", PAIR_NAMES[p]);
            let _ = match pot {
                PotentialConfig::SquareWell { v0, b } => writeln!(o, "kind = square_well\nv0 = {v0:?}\nb = {b:?}"),
                PotentialConfig::Shell { v0, r0, b } => {
                    writeln!(o, "kind = shell\nv0 = {v0:?}\nr0 = {r0:?}\nb = {b:?}")
                }
                PotentialConfig::Table { path } => writeln!(o, "kind = table\npath = {}", path.display()),
            };
        }
        let c = &self.coupling;
        let _ = writeln!(
            o,
            "\n[coupling]\nlambda = {:?}\nn_particles = {}\nell = {:?}\nfraction = {:?}\nradii = {}",
            c.lambda,
            c.n_particles,
            c.ell,
            c.fraction,
            list(&c.radii)
        );
        let d = &self.dynamics;
        let _ = writeln!(
            o,
            "\n[dynamics]\nmodel = {}\nt_final = {:?}\ndt = {:?}\nsample_every = {}\nsigma = {:?}\nsnapshot = {}",
            match d.model {
                Model::Limiting => "limiting",
                Model::Modified => "modified",
            },
            d.t_final,
            d.dt,
            d.sample_every,
            d.sigma,
            d.snapshot.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let g = &self.groundstate;
        let _ = writeln!(
            o,
            "\n[groundstate]\nomega = {:?}\ntol = {:?}\nmax_iters = {}\nguess_width = {:?}\ninteracting = {}",
            g.omega, g.tol, g.max_iters, g.guess_width, g.interacting
        );
        let w = &self.sweep;
        let _ = writeln!(
            o,
            "\n[sweep]\nn_list = {}\nschedule = {}\ngamma = {:?}\nlimit = {}\nmin_fit_n = {}",
            list(&w.n_list),
            match w.schedule {
                ScheduleKind::Fixed => "fixed",
                ScheduleKind::Log => "log",
            },
            w.gamma,
            match w.limit {
                LimitKind::ScatteringLength => "scattering_length",
                LimitKind::HardCore => "hard_core",
            },
            w.min_fit_n
        );
        let _ = writeln!(
            o,
            "\n[bogoliubov]\ncoarse_m = {}\nceiling = {:?}",
            self.bogoliubov.coarse_m, self.bogoliubov.ceiling
        );
        let _ = writeln!(o, "\n[output]\nsnapshot = {}", self.output.snapshot);
        o
    }

    /// Applies a `section.key=value` override on top of this config.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| cfg_err(0, format!("override `{assignment}` is not `section.key=value`")))?;
        let (section, key) = path
            .trim()
            .rsplit_once('.')
            .ok_or_else(|| cfg_err(0, format!("override `{assignment}` is not `section.key=value`")))?;
        let mut text = self.to_text();
        let header = format!("[{section}]");
        let mut out = String::new();
        let mut inside = false;
        let mut done = false;
        for line in text.lines() {
            if line.starts_with('[') {
                if inside && !done {
                    let _ = writeln!(out, "{} = {}", key.trim(), value.trim());
                    done = true;
                }
                inside = line == header;
            }
            if inside && line.split_once('=').map(|(k, _)| k.trim() == key.trim()).unwrap_or(false) {
                let _ = writeln!(out, "{} = {}", key.trim(), value.trim());
                done = true;
                continue;
            }
            let _ = writeln!(out, "{line}");
        }
        if inside && !done {
            let _ = writeln!(out, "{} = {}", key.trim(), value.trim());
            done = true;
        }
        if !done {
            return Err(cfg_err(0, format!("override names unknown section [{section}]")));
        }
        text = out;
        Self::parse(&text)
    }
}

/// `parse(text).to_text()`.
pub fn normalize(text: &str) -> Result<String> {
    Ok(RunConfig::parse(text)?.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> (usize, String) {
        match e {
            Error::Config { line, message } => (line, message),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn reads_sections() {
        let text = "schema_version = 1\n[grid]\nn = 48\nbox_length = 30\n[potential.12]\nkind = shell\nv0 = 3\nr0 = 0.2\nb = 0.9\n[sweep]\nn_list = 4, 8,16 ,32\nschedule = log\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.grid.n, 48);
        assert_eq!(c.grid.box_length, 30.0);
        assert_eq!(c.potentials[2], PotentialConfig::Shell { v0: 3.0, r0: 0.2, b: 0.9 });
        assert_eq!(c.sweep.n_list, vec![4, 8, 16, 32]);
        assert_eq!(c.sweep.schedule, ScheduleKind::Log);
    }

    #[test]
    fn errors_carry_lines() {
        let (l, m) = line_of(RunConfig::parse("[grid]\nn = 16\nn = 32\n").unwrap_err());
        assert_eq!(l, 3);
        assert!(m.contains("lines 2 and 3"), "{m}");
        let (l, m) = line_of(RunConfig::parse("[grid]\nn = 16\nspacing = 1\n").unwrap_err());
        assert_eq!(l, 3);
        assert!(m.contains("spacing"));
        let (l, _) = line_of(RunConfig::parse("\n[grid]\nbox_length = wide\n").unwrap_err());
        assert_eq!(l, 3);
        let (l, m) = line_of(RunConfig::parse("[coupling]\n[potential.11]\nkind = square_well\nv0 = 1\n").unwrap_err());
        assert_eq!(l, 2);
        assert!(m.contains("`b`"), "{m}");
        let (l, _) = line_of(RunConfig::parse("[grid]\n\n[extra]\n").unwrap_err());
        assert_eq!(l, 3);
        let (l, _) = line_of(RunConfig::parse("schema_version = 2\n").unwrap_err());
        assert_eq!(l, 1);
        let (l, _) = line_of(RunConfig::parse("[grid]\nn = 36\n[grid]\n").unwrap_err());
        assert_eq!(l, 3);
        let (l, _) = line_of(RunConfig::parse("[grid]\nn = 14\n").unwrap_err());
        assert_eq!(l, 1);
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "[sweep]\nn_list = 4,8,16,32\nlimit = hard_core\n[dynamics]\ndt = 0.0005\nsnapshot = init.bin\n";
        let c = RunConfig::parse(text).unwrap();
        let canon = c.to_text();
        assert_eq!(RunConfig::parse(&canon).unwrap(), c);
        assert_eq!(normalize(&canon).unwrap(), canon);
        assert!(canon.contains("n_list = 4, 8, 16, 32"));
    }

    #[test]
    fn overrides() {
        let c = RunConfig::default().with_override("coupling.lambda=10").unwrap();
        assert_eq!(c.coupling.lambda, 10.0);
        let c = c.with_override("potential.11.v0 = 5").unwrap();
        assert_eq!(c.potentials[0], PotentialConfig::SquareWell { v0: 5.0, b: 1.0 });
        assert!(c.with_override("nowhere.x=1").is_err());
        assert!(c.with_override("grid.bogus=1").is_err());
    }
}
