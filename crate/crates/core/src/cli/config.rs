//! The sectioned `key = value` run configuration: parsing, validation and
//! emission.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use thiserror::Error;

use crate::grid::{PhaseGrid, SpatialGrid, VelocityGrid};
use crate::mixture::{validate_params_in, EquilibriumMode, Fault, MixtureParams, Regime};
use crate::solver::{Scenario, ScenarioKind, SolverConfig, Splitting};

/// A configuration problem, located by line and key where possible.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", self.render())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
    pub suggestion: Option<String>,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_owned),
            message: message.into(),
            suggestion: None,
        }
    }

    fn render(&self) -> String {
        let mut s = String::new();
        if let Some(l) = self.line {
            let _ = write!(s, "line {l}: ");
        }
        if let Some(k) = &self.key {
            let _ = write!(s, "{k}: ");
        }
        s.push_str(&self.message);
        if let Some(sug) = &self.suggestion {
            let _ = write!(s, " (did you mean `{sug}`?)");
        }
        s
    }
}

/// Spatial and velocity lattice settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub n_cells: usize,
    pub length: f64,
    pub dim: usize,
    /// Resolved half-width; `auto` in the document means `6 / sqrt(m2)`.
    pub v_max: f64,
    pub n_per_axis: usize,
}

impl GridConfig {
    pub fn phase_grid(&self) -> crate::Result<PhaseGrid> {
        let space = if self.dim == 0 {
            SpatialGrid::homogeneous()
        } else {
            SpatialGrid::periodic(self.n_cells, self.length)?
        };
        Ok(PhaseGrid::new(space, VelocityGrid::new(self.v_max, self.n_per_axis)?))
    }
}

/// Settings of the `verify` property suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random `(f, p)` draws for the dissipation inequality.
    pub draws: usize,
    /// Random parameter/moment draws for the mixing identities.
    pub mixing_draws: usize,
    /// Nodes per axis of the resolved lattice used for quadrature-sensitive checks.
    pub n_per_axis: usize,
    pub derivative_n_per_axis: usize,
    pub dissipation_n_per_axis: usize,
    pub fd_step: f64,
    pub kernel_only: bool,
    pub fault: Fault,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            draws: 1000,
            mixing_draws: 10_000,
            n_per_axis: 32,
            derivative_n_per_axis: 24,
            dissipation_n_per_axis: 16,
            fd_step: 1e-5,
            kernel_only: false,
            fault: Fault::None,
        }
    }
}

/// Fully resolved and validated configuration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mixture: MixtureParams,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub scenario: Scenario,
    pub output: PathBuf,
    pub verify: VerifyConfig,
    /// Admissibility region the mixture was checked against.
    pub regime: Regime,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mixture = MixtureParams::default();
        Self {
            grid: GridConfig {
                n_cells: 1,
                length: 1.0,
                dim: 0,
                v_max: default_v_max(&mixture),
                n_per_axis: 16,
            },
            mixture,
            solver: SolverConfig::default(),
            scenario: Scenario::default(),
            output: PathBuf::from("out"),
            verify: VerifyConfig::default(),
            regime: Regime::Strict,
        }
    }
}

/// `6 / sqrt(m2)`: wide enough for the lighter species.
pub fn default_v_max(p: &MixtureParams) -> f64 {
    6.0 / p.m2.min(p.m1).sqrt()
}

const SECTIONS: [&str; 6] = ["mixture", "grid", "solver", "scenario", "output", "verify"];

fn section_keys(section: &str) -> &'static [&'static str] {
    match section {
        "mixture" => &["m1", "m2", "n10", "n20", "delta", "omega", "gamma"],
        "grid" => &["n_cells", "length", "dim", "v_max", "n_per_axis"],
        "solver" => &["dt", "t_max", "splitting", "equilibrium_mode", "record_every", "rate_multiplier"],
        "scenario" => &["name", "amplitude", "seed"],
        "output" => &["dir"],
        "verify" => &[
            "seed",
            "draws",
            "mixing_draws",
            "n_per_axis",
            "derivative_n_per_axis",
            "dissipation_n_per_axis",
            "fd_step",
            "kernel_only",
            "fault",
        ],
        _ => &[],
    }
}

fn nearest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (strsim::jaro_winkler(word, c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .filter(|(score, _)| *score > 0.7)
        .map(|(_, c)| c.to_owned())
}

struct Entry {
    line: usize,
    value: String,
}

type Document = BTreeMap<(String, String), Entry>;

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(Some(line_no), None, format!("malformed section header `{line}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                let mut e = ConfigError::new(Some(line_no), None, format!("unknown section [{name}]"));
                e.suggestion = nearest(name, SECTIONS).map(|s| format!("[{s}]"));
                return Err(e);
            }
            section = Some(name.to_owned());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(Some(line_no), None, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        let Some(sec) = &section else {
            return Err(ConfigError::new(
                Some(line_no),
                Some(key),
                "key appears before any [section] header",
            ));
        };
        let keys = section_keys(sec);
        if !keys.contains(&key) {
            let mut e = ConfigError::new(Some(line_no), Some(key), format!("unknown key in [{sec}]"));
            e.suggestion = nearest(key, keys.iter().copied());
            return Err(e);
        }
        if let Some(prev) = doc.get(&(sec.clone(), key.to_owned())) {
            return Err(ConfigError::new(
                Some(line_no),
                Some(key),
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        doc.insert(
            (sec.clone(), key.to_owned()),
            Entry {
                line: line_no,
                value: value.to_owned(),
            },
        );
    }
    Ok(doc)
}

struct Reader<'a> {
    doc: &'a Document,
}

impl Reader<'_> {
    fn raw(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.doc.get(&(sec.to_owned(), key.to_owned()))
    }

    fn get<T>(
        &self,
        sec: &str,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
        what: &str,
    ) -> Result<T, ConfigError> {
        match self.raw(sec, key) {
            None => Ok(default),
            Some(e) => parse(&e.value).ok_or_else(|| {
                ConfigError::new(
                    Some(e.line),
                    Some(&format!("{sec}.{key}")),
                    format!("expected {what}, found `{}`", e.value),
                )
            }),
        }
    }

    fn f64(&self, sec: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.get(sec, key, default, |s| s.parse::<f64>().ok().filter(|x| x.is_finite()), "a finite number")
    }

    fn usize(&self, sec: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.get(sec, key, default, |s| s.parse().ok(), "a nonnegative integer")
    }

    fn u64(&self, sec: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.get(sec, key, default, |s| s.parse().ok(), "a nonnegative integer")
    }

    fn bool(&self, sec: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        self.get(sec, key, default, |s| s.parse().ok(), "true or false")
    }

    fn line(&self, sec: &str, key: &str) -> Option<usize> {
        self.raw(sec, key).map(|e| e.line)
    }

    fn choice<T>(
        &self,
        sec: &str,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
        names: &[&str],
    ) -> Result<T, ConfigError> {
        match self.raw(sec, key) {
            None => Ok(default),
            Some(e) => parse(&e.value).ok_or_else(|| {
                let mut err = ConfigError::new(
                    Some(e.line),
                    Some(&format!("{sec}.{key}")),
                    format!("`{}` is not one of {}", e.value, names.join(", ")),
                );
                err.suggestion = nearest(&e.value, names.iter().copied());
                err
            }),
        }
    }
}

/// Parses and validates a document against the strict admissibility region.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_in(text, Regime::Strict)
}

/// Parses and validates a document; `regime` selects whether `delta = 1` and
/// `omega = 1` are accepted.
pub fn parse_config_in(text: &str, regime: Regime) -> Result<RunConfig, ConfigError> {
    let doc = tokenize(text)?;
    let r = Reader { doc: &doc };
    let d = RunConfig::default();

    let dm = d.mixture;
    let mixture = MixtureParams {
        m1: r.f64("mixture", "m1", dm.m1)?,
        m2: r.f64("mixture", "m2", dm.m2)?,
        n10: r.f64("mixture", "n10", dm.n10)?,
        n20: r.f64("mixture", "n20", dm.n20)?,
        delta: r.f64("mixture", "delta", dm.delta)?,
        omega: r.f64("mixture", "omega", dm.omega)?,
        gamma: r.f64("mixture", "gamma", dm.gamma)?,
    };
    let verdict = validate_params_in(&mixture, regime);
    if let Some(v) = verdict.violations.first() {
        let key = v.constraint.keys()[0];
        let mut msg = format!("inadmissible mixture: {v}");
        for extra in &verdict.violations[1..] {
            let _ = write!(msg, "; {extra}");
        }
        return Err(ConfigError::new(r.line("mixture", key), Some(&format!("mixture.{key}")), msg));
    }

    let dg = d.grid;
    let v_max = match r.raw("grid", "v_max") {
        Some(e) if e.value == "auto" => default_v_max(&mixture),
        Some(_) => r.f64("grid", "v_max", 0.0)?,
        None => default_v_max(&mixture),
    };
    let grid = GridConfig {
        n_cells: r.usize("grid", "n_cells", dg.n_cells)?,
        length: r.f64("grid", "length", dg.length)?,
        dim: r.usize("grid", "dim", dg.dim)?,
        v_max,
        n_per_axis: r.usize("grid", "n_per_axis", dg.n_per_axis)?,
    };
    let bad = |key: &str, msg: String| ConfigError::new(r.line("grid", key), Some(&format!("grid.{key}")), msg);
    if grid.dim > 1 {
        return Err(bad("dim", format!("dim must be 0 or 1, got {}", grid.dim)));
    }
    if grid.dim == 0 && grid.n_cells != 1 {
        return Err(bad("n_cells", format!("a homogeneous grid (dim = 0) has one cell, got {}", grid.n_cells)));
    }
    if grid.n_cells == 0 {
        return Err(bad("n_cells", "n_cells must be positive".into()));
    }
    if !(grid.length > 0.0) {
        return Err(bad("length", format!("length must be positive, got {}", grid.length)));
    }
    if !(grid.v_max > 0.0) {
        return Err(bad("v_max", format!("v_max must be positive, got {}", grid.v_max)));
    }
    if grid.n_per_axis < 2 || grid.n_per_axis % 2 == 1 {
        return Err(bad(
            "n_per_axis",
            format!("n_per_axis must be even and at least 2, got {}", grid.n_per_axis),
        ));
    }

    let ds = d.solver;
    let solver = SolverConfig {
        dt: r.f64("solver", "dt", ds.dt)?,
        t_max: r.f64("solver", "t_max", ds.t_max)?,
        splitting: r.choice("solver", "splitting", ds.splitting, Splitting::parse, &Splitting::NAMES)?,
        equilibrium_mode: r.choice(
            "solver",
            "equilibrium_mode",
            ds.equilibrium_mode,
            EquilibriumMode::parse,
            &EquilibriumMode::NAMES,
        )?,
        record_every: r.usize("solver", "record_every", ds.record_every)?,
        rate_multiplier: r.f64("solver", "rate_multiplier", ds.rate_multiplier)?,
    };
    if let Err(e) = solver.validate() {
        let key = if !(solver.dt > 0.0) {
            "dt"
        } else if solver.t_max < solver.dt {
            "t_max"
        } else if solver.record_every == 0 {
            "record_every"
        } else {
            "rate_multiplier"
        };
        return Err(ConfigError::new(
            r.line("solver", key),
            Some(&format!("solver.{key}")),
            e.to_string().trim_start_matches("invalid input: ").to_owned(),
        ));
    }

    let dsc = d.scenario;
    let scenario = Scenario {
        kind: r.choice("scenario", "name", dsc.kind, ScenarioKind::parse, &ScenarioKind::NAMES)?,
        amplitude: r.f64("scenario", "amplitude", dsc.amplitude)?,
        seed: r.u64("scenario", "seed", dsc.seed)?,
    };
    if !(scenario.amplitude > 0.0) {
        return Err(ConfigError::new(
            r.line("scenario", "amplitude"),
            Some("scenario.amplitude"),
            format!("amplitude must be positive, got {}", scenario.amplitude),
        ));
    }
    let bounded = matches!(
        scenario.kind,
        ScenarioKind::TemperatureGap | ScenarioKind::SinusoidalDensity | ScenarioKind::RandomSmooth
    );
    if bounded && scenario.amplitude >= 1.0 {
        return Err(ConfigError::new(
            r.line("scenario", "amplitude"),
            Some("scenario.amplitude"),
            format!("scenario {} needs amplitude < 1, got {}", scenario.kind.name(), scenario.amplitude),
        ));
    }

    let output = match r.raw("output", "dir") {
        Some(e) if e.value.is_empty() => {
            return Err(ConfigError::new(Some(e.line), Some("output.dir"), "empty output directory"));
        }
        Some(e) => PathBuf::from(&e.value),
        None => d.output,
    };

    let dv = d.verify;
    let verify = VerifyConfig {
        seed: r.u64("verify", "seed", dv.seed)?,
        draws: r.usize("verify", "draws", dv.draws)?,
        mixing_draws: r.usize("verify", "mixing_draws", dv.mixing_draws)?,
        n_per_axis: r.usize("verify", "n_per_axis", dv.n_per_axis)?,
        derivative_n_per_axis: r.usize("verify", "derivative_n_per_axis", dv.derivative_n_per_axis)?,
        dissipation_n_per_axis: r.usize("verify", "dissipation_n_per_axis", dv.dissipation_n_per_axis)?,
        fd_step: r.f64("verify", "fd_step", dv.fd_step)?,
        kernel_only: r.bool("verify", "kernel_only", dv.kernel_only)?,
        fault: r.choice("verify", "fault", dv.fault, Fault::parse, &Fault::NAMES)?,
    };
    for key in ["n_per_axis", "derivative_n_per_axis", "dissipation_n_per_axis"] {
        let n = match key {
            "n_per_axis" => verify.n_per_axis,
            "derivative_n_per_axis" => verify.derivative_n_per_axis,
            _ => verify.dissipation_n_per_axis,
        };
        if n < 4 || n % 2 == 1 {
            return Err(ConfigError::new(
                r.line("verify", key),
                Some(&format!("verify.{key}")),
                format!("must be even and at least 4, got {n}"),
            ));
        }
    }
    if !(1e-7..=1e-3).contains(&verify.fd_step) {
        return Err(ConfigError::new(
            r.line("verify", "fd_step"),
            Some("verify.fd_step"),
            format!("fd_step must lie in [1e-7, 1e-3], got {}", verify.fd_step),
        ));
    }

    Ok(RunConfig {
        mixture,
        grid,
        solver,
        scenario,
        output,
        verify,
        regime,
    })
}

/// Writes a document that [`parse_config_in`] maps back to exactly `cfg`.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let m = &cfg.mixture;
    let g = &cfg.grid;
    let so = &cfg.solver;
    let sc = &cfg.scenario;
    let v = &cfg.verify;
    let mut put = |line: fmt::Arguments| {
        s.write_fmt(line).expect("writing to a String cannot fail");
        s.push('\n');
    };
    put(format_args!("[mixture]"));
    for (k, x) in [
        ("m1", m.m1),
        ("m2", m.m2),
        ("n10", m.n10),
        ("n20", m.n20),
        ("delta", m.delta),
        ("omega", m.omega),
        ("gamma", m.gamma),
    ] {
        put(format_args!("{k} = {x:?}"));
    }
    put(format_args!(""));
    put(format_args!("[grid]"));
    put(format_args!("n_cells = {}", g.n_cells));
    put(format_args!("length = {:?}", g.length));
    put(format_args!("dim = {}", g.dim));
    put(format_args!("v_max = {:?}", g.v_max));
    put(format_args!("n_per_axis = {}", g.n_per_axis));
    put(format_args!(""));
    put(format_args!("[solver]"));
    put(format_args!("dt = {:?}", so.dt));
    put(format_args!("t_max = {:?}", so.t_max));
    put(format_args!("splitting = {}", so.splitting.name()));
    put(format_args!("equilibrium_mode = {}", so.equilibrium_mode.name()));
    put(format_args!("record_every = {}", so.record_every));
    put(format_args!("rate_multiplier = {:?}", so.rate_multiplier));
    put(format_args!(""));
    put(format_args!("[scenario]"));
    put(format_args!("name = {}", sc.kind.name()));
    put(format_args!("amplitude = {:?}", sc.amplitude));
    put(format_args!("seed = {}", sc.seed));
    put(format_args!(""));
    put(format_args!("[output]"));
    put(format_args!("dir = \"{}\"", cfg.output.display()));
    put(format_args!(""));
    put(format_args!("[verify]"));
    put(format_args!("seed = {}", v.seed));
    put(format_args!("draws = {}", v.draws));
    put(format_args!("mixing_draws = {}", v.mixing_draws));
    put(format_args!("n_per_axis = {}", v.n_per_axis));
    put(format_args!("derivative_n_per_axis = {}", v.derivative_n_per_axis));
    put(format_args!("dissipation_n_per_axis = {}", v.dissipation_n_per_axis));
    put(format_args!("fd_step = {:?}", v.fd_step));
    put(format_args!("kernel_only = {}", v.kernel_only));
    put(format_args!("fault = {}", v.fault.name()));
    s
}

/// Parses a comma-separated list of numbers such as `0.1,0.5, 0.9`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ConfigError::new(None, None, "empty list"));
    }
    trimmed
        .split(',')
        .enumerate()
        .map(|(i, item)| {
            let item = item.trim();
            item.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                ConfigError::new(None, None, format!("list entry {} (`{item}`) is not a finite number", i + 1))
            })
        })
        .collect()
}
