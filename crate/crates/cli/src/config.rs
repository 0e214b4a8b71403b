//! Flat key-value run configuration.
//!
//! The format is diff-friendly dotted keys, one `key = value` per line,
//! `#` comments. Unknown or duplicated keys are rejected with line numbers.
//! `to_conf_string` emits a canonical form whose re-parse reproduces the
//! configuration field by field.

use crate::error::{CliError, Result};
use hotspot_core::solver::{AdvectionScheme, IcWave, Perturb, SolveConfig};
use hotspot_core::spectral::{DomainKind, DomainSpec, ModeIndex};
use hotspot_core::{KineticsPack, ModelParams, Variant};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Which model variant(s) a command operates on. Table and wavemode scans
/// accept `both`; simulation requires a single variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Departure,
    Arrival,
    Both,
}

impl ModelChoice {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            ModelChoice::Departure => vec![Variant::Departure],
            ModelChoice::Arrival => vec![Variant::Arrival],
            ModelChoice::Both => vec![Variant::Departure, Variant::Arrival],
        }
    }

    pub fn single(self) -> Result<Variant> {
        match self {
            ModelChoice::Departure => Ok(Variant::Departure),
            ModelChoice::Arrival => Ok(Variant::Arrival),
            ModelChoice::Both => Err(CliError::Config(
                "this command needs a single model variant, not `both`".to_string(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub kinetics: String,
    pub a0: f64,
    pub bbar: f64,
    pub lambda0: f64,
    pub eps: f64,
    pub domain: DomainSpec,
    pub n: usize,
    pub ic_modes: Vec<Perturb>,
    pub noise: f64,
    pub seed: u64,
    pub solver: SolveConfig,
    pub out_dir: Option<PathBuf>,
    /// Mode range for table commands: interval `k <= max`, square
    /// `m, n <= max`. `None` scans automatically past the threshold peak.
    pub table_max_mode: Option<u32>,
    /// Interval lengths for the wavemode sweep command.
    pub lengths: Vec<f64>,
    /// Mode the bifurcation command analyzes; defaults to the selected
    /// wavemode.
    pub bifurcation_mode: Option<ModeIndex>,
    pub sweep_eps: Vec<f64>,
    pub sweep_lengths: Vec<f64>,
    /// Principal-mode seeding amplitude for sweep runs.
    pub sweep_seed_amp: f64,
    pub verify_scaling: bool,
    pub verify_mms_2d: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelChoice::Departure,
            kinetics: "paper-default".to_string(),
            a0: 1.0,
            bbar: 2.0,
            lambda0: 0.1,
            eps: 0.03,
            domain: DomainSpec::interval(1.0),
            n: 128,
            ic_modes: Vec::new(),
            noise: 0.0,
            seed: 0,
            solver: SolveConfig::default(),
            out_dir: None,
            table_max_mode: None,
            lengths: Vec::new(),
            bifurcation_mode: None,
            sweep_eps: Vec::new(),
            sweep_lengths: Vec::new(),
            sweep_seed_amp: -0.1,
            verify_scaling: true,
            verify_mms_2d: true,
        }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", msg.into()))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")))
}

fn parse_list_f64(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(line, key, s))
        .collect()
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(bad(line, format!("`{key}` expects true/false, got `{v}`"))),
    }
}

/// One IC entry: `k=4 amp=0.01`, `k=1 amp_a=0.01 amp_rho=0`, or
/// `m=1 n=2 amp=0.05`.
fn parse_ic_entry(line: usize, entry: &str) -> Result<Perturb> {
    let mut k = None;
    let mut m = None;
    let mut n = None;
    let mut amp_a = None;
    let mut amp_rho = None;
    for token in entry.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(line, format!("IC token `{token}` is not key=value")))?;
        let num = parse_f64(line, key, value)?;
        match key {
            "k" => k = Some(num),
            "m" => m = Some(num),
            "n" => n = Some(num),
            "amp" => {
                amp_a = Some(num);
                amp_rho = Some(num);
            }
            "amp_a" => amp_a = Some(num),
            "amp_rho" => amp_rho = Some(num),
            _ => return Err(bad(line, format!("unknown IC token key `{key}`"))),
        }
    }
    let wave = match (k, m, n) {
        (Some(k), None, None) => IcWave::Axis { k },
        (None, Some(m), Some(n)) => IcWave::Tensor { m, n },
        _ => {
            return Err(bad(
                line,
                format!("IC entry `{entry}` needs either `k=` or both `m=` and `n=`"),
            ))
        }
    };
    Ok(Perturb {
        wave,
        amp_a: amp_a.unwrap_or(0.0),
        amp_rho: amp_rho.unwrap_or(0.0),
    })
}

fn parse_mode_index(line: usize, v: &str) -> Result<ModeIndex> {
    if let Some((m, n)) = v.split_once(',') {
        let m = m.trim().parse::<u32>().map_err(|_| bad(line, "bad mode pair"))?;
        let n = n.trim().parse::<u32>().map_err(|_| bad(line, "bad mode pair"))?;
        Ok(ModeIndex::Pair(m, n))
    } else {
        let k = v.trim().parse::<u32>().map_err(|_| bad(line, "bad mode index"))?;
        Ok(ModeIndex::K(k))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(lineno, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(bad(lineno, format!("duplicate key `{key}`")));
            }
            match key {
                "model" => {
                    cfg.model = match value {
                        "departure" => ModelChoice::Departure,
                        "arrival" => ModelChoice::Arrival,
                        "both" => ModelChoice::Both,
                        _ => {
                            return Err(bad(
                                lineno,
                                format!("model must be departure/arrival/both, got `{value}`"),
                            ))
                        }
                    }
                }
                "kinetics" => cfg.kinetics = value.to_string(),
                "params.a0" => cfg.a0 = parse_f64(lineno, key, value)?,
                "params.bbar" => cfg.bbar = parse_f64(lineno, key, value)?,
                "params.lambda0" => cfg.lambda0 = parse_f64(lineno, key, value)?,
                "params.eps" => cfg.eps = parse_f64(lineno, key, value)?,
                "domain.kind" => {
                    let length = cfg.domain.length;
                    cfg.domain = match value {
                        "interval" => DomainSpec::interval(length),
                        "square" => DomainSpec::square(length),
                        _ => {
                            return Err(bad(
                                lineno,
                                format!("domain.kind must be interval/square, got `{value}`"),
                            ))
                        }
                    };
                }
                "domain.length" => {
                    let length = parse_f64(lineno, key, value)?;
                    if !(length > 0.0) {
                        return Err(bad(lineno, "domain.length must be positive"));
                    }
                    cfg.domain = DomainSpec { length, ..cfg.domain };
                }
                "grid.n" => {
                    cfg.n = value
                        .parse::<usize>()
                        .map_err(|_| bad(lineno, "grid.n expects an integer"))?;
                }
                "ic.modes" => {
                    cfg.ic_modes = value
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|entry| parse_ic_entry(lineno, entry))
                        .collect::<Result<Vec<_>>>()?;
                }
                "ic.noise" => cfg.noise = parse_f64(lineno, key, value)?,
                "seed" => {
                    cfg.seed = value
                        .parse::<u64>()
                        .map_err(|_| bad(lineno, "seed expects an unsigned integer"))?;
                }
                "solver.dt_init" => cfg.solver.dt_init = parse_f64(lineno, key, value)?,
                "solver.dt_min" => cfg.solver.dt_min = parse_f64(lineno, key, value)?,
                "solver.dt_max" => cfg.solver.dt_max = parse_f64(lineno, key, value)?,
                "solver.safety" => cfg.solver.safety = parse_f64(lineno, key, value)?,
                "solver.t_end" => cfg.solver.t_end = parse_f64(lineno, key, value)?,
                "solver.ss_tol" => cfg.solver.ss_tol = parse_f64(lineno, key, value)?,
                "solver.snapshot_every" => {
                    cfg.solver.snapshot_every = parse_f64(lineno, key, value)?
                }
                "solver.advection" => {
                    cfg.solver.advection = match value {
                        "central" => AdvectionScheme::Central,
                        "upwind" => AdvectionScheme::Upwind,
                        _ => {
                            return Err(bad(
                                lineno,
                                format!("solver.advection must be central/upwind, got `{value}`"),
                            ))
                        }
                    }
                }
                "output.dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "table.max_mode" => {
                    cfg.table_max_mode = Some(
                        value
                            .parse::<u32>()
                            .map_err(|_| bad(lineno, "table.max_mode expects an integer"))?,
                    )
                }
                "wavemode.lengths" => cfg.lengths = parse_list_f64(lineno, key, value)?,
                "bifurcation.mode" => {
                    cfg.bifurcation_mode = Some(parse_mode_index(lineno, value)?)
                }
                "sweep.eps" => cfg.sweep_eps = parse_list_f64(lineno, key, value)?,
                "sweep.lengths" => cfg.sweep_lengths = parse_list_f64(lineno, key, value)?,
                "sweep.seed_amp" => cfg.sweep_seed_amp = parse_f64(lineno, key, value)?,
                "verify.scaling" => cfg.verify_scaling = parse_bool(lineno, key, value)?,
                "verify.mms_2d" => cfg.verify_mms_2d = parse_bool(lineno, key, value)?,
                _ => return Err(bad(lineno, format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for variant in self.model.variants() {
            ModelParams::new(self.a0, self.bbar, self.lambda0, self.eps, variant)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        hotspot_core::builtin_kinetics(&self.kinetics)
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.solver
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.n < 8 {
            return Err(CliError::Config("grid.n must be at least 8".to_string()));
        }
        if self.noise < 0.0 {
            return Err(CliError::Config("ic.noise must be nonnegative".to_string()));
        }
        if !self.sweep_eps.is_empty() && !self.sweep_lengths.is_empty() {
            return Err(CliError::Config(
                "sweep.eps and sweep.lengths are mutually exclusive".to_string(),
            ));
        }
        for p in &self.ic_modes {
            if let (DomainKind::Interval, IcWave::Tensor { .. }) = (self.domain.kind, p.wave) {
                return Err(CliError::Config(
                    "tensor IC modes need a square domain".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn params(&self, variant: Variant) -> Result<ModelParams> {
        ModelParams::new(self.a0, self.bbar, self.lambda0, self.eps, variant)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn kinetics_pack(&self) -> Result<KineticsPack> {
        hotspot_core::builtin_kinetics(&self.kinetics).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical serialization; parsing it reproduces `self` exactly.
    pub fn to_conf_string(&self) -> String {
        let mut s = String::new();
        let model = match self.model {
            ModelChoice::Departure => "departure",
            ModelChoice::Arrival => "arrival",
            ModelChoice::Both => "both",
        };
        let _ = writeln!(s, "model = {model}");
        let _ = writeln!(s, "kinetics = {}", self.kinetics);
        let _ = writeln!(s, "params.a0 = {}", self.a0);
        let _ = writeln!(s, "params.bbar = {}", self.bbar);
        let _ = writeln!(s, "params.lambda0 = {}", self.lambda0);
        let _ = writeln!(s, "params.eps = {}", self.eps);
        let kind = match self.domain.kind {
            DomainKind::Interval => "interval",
            DomainKind::Square => "square",
        };
        let _ = writeln!(s, "domain.kind = {kind}");
        let _ = writeln!(s, "domain.length = {}", self.domain.length);
        let _ = writeln!(s, "grid.n = {}", self.n);
        if !self.ic_modes.is_empty() {
            let entries: Vec<String> = self
                .ic_modes
                .iter()
                .map(|p| {
                    let wave = match p.wave {
                        IcWave::Axis { k } => format!("k={k}"),
                        IcWave::Tensor { m, n } => format!("m={m} n={n}"),
                    };
                    format!("{wave} amp_a={} amp_rho={}", p.amp_a, p.amp_rho)
                })
                .collect();
            let _ = writeln!(s, "ic.modes = {}", entries.join("; "));
        }
        let _ = writeln!(s, "ic.noise = {}", self.noise);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "solver.dt_init = {}", self.solver.dt_init);
        let _ = writeln!(s, "solver.dt_min = {}", self.solver.dt_min);
        let _ = writeln!(s, "solver.dt_max = {}", self.solver.dt_max);
        let _ = writeln!(s, "solver.safety = {}", self.solver.safety);
        let _ = writeln!(s, "solver.t_end = {}", self.solver.t_end);
        let _ = writeln!(s, "solver.ss_tol = {}", self.solver.ss_tol);
        let _ = writeln!(s, "solver.snapshot_every = {}", self.solver.snapshot_every);
        let advection = match self.solver.advection {
            AdvectionScheme::Central => "central",
            AdvectionScheme::Upwind => "upwind",
        };
        let _ = writeln!(s, "solver.advection = {advection}");
        if let Some(dir) = &self.out_dir {
            let _ = writeln!(s, "output.dir = {}", dir.display());
        }
        if let Some(max) = self.table_max_mode {
            let _ = writeln!(s, "table.max_mode = {max}");
        }
        if !self.lengths.is_empty() {
            let _ = writeln!(s, "wavemode.lengths = {}", join_f64(&self.lengths));
        }
        if let Some(mode) = self.bifurcation_mode {
            let text = match mode {
                ModeIndex::K(k) => format!("{k}"),
                ModeIndex::Pair(m, n) => format!("{m},{n}"),
            };
            let _ = writeln!(s, "bifurcation.mode = {text}");
        }
        if !self.sweep_eps.is_empty() {
            let _ = writeln!(s, "sweep.eps = {}", join_f64(&self.sweep_eps));
        }
        if !self.sweep_lengths.is_empty() {
            let _ = writeln!(s, "sweep.lengths = {}", join_f64(&self.sweep_lengths));
        }
        let _ = writeln!(s, "sweep.seed_amp = {}", self.sweep_seed_amp);
        let _ = writeln!(s, "verify.scaling = {}", self.verify_scaling);
        let _ = writeln!(s, "verify.mms_2d = {}", self.verify_mms_2d);
        s
    }
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
