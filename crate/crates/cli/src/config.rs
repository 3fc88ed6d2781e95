//! Flat key/value scenario configuration: a human-editable text format
//! (one `key = value` per line, `#` comments) merged with command-line
//! overrides, then compiled into an engine scenario.
//!
//! Published schema (all keys optional unless stated):
//!
//! | key                       | value                                        |
//! |---------------------------|----------------------------------------------|
//! | `domain.dim`              | spatial dimension (default 1)                |
//! | `domain.lengths`          | comma list, or one value for all axes (1)    |
//! | `domain.diffusion`        | diffusion constant `D` (1)                   |
//! | `order.alpha`             | fractional order in (0, 1] (required)        |
//! | `clock.family`            | `identity` \| `power_law` \| `dodson`        |
//! | `clock.beta`              | power-law exponent (required for power_law)  |
//! | `clock.rate`              | saturation rate (required for dodson)        |
//! | `initial.kind`            | `delta` \| `gaussian` (delta)                |
//! | `initial.x0`              | comma list; default is the box center        |
//! | `initial.sigma`           | gaussian width (required for gaussian)       |
//! | `time.min` / `time.max`   | curve window (defaults derived)              |
//! | `time.points`             | number of samples (200)                      |
//! | `time.spacing`            | `log` \| `linear` (log)                      |
//! | `time.at`                 | single evaluation time for `field`           |
//! | `series.lambda_max`       | eigenvalue cutoff (derived when absent)      |
//! | `series.min_modes_per_axis` | per-axis scan floor (3)                    |
//! | `series.rel_tol`          | series tolerance (1e-8)                      |
//! | `series.max_modes`        | mode budget (400000)                         |
//! | `series.ml_floor`         | relaxation floor override                    |
//! | `oracle.points_per_axis`  | validation grid nodes per axis (16)          |
//! | `oracle.s_steps`          | validation time steps (64)                   |
//! | `oracle.s_final`          | validation horizon in internal time (0.25)   |
//! | `output.format`           | `csv` \| `json` (csv)                        |
//! | `output.path`             | write target (stdout when absent)            |
//!
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gfrac::clocks::{make_clock, Clock, ClockFamily, ClockLimit};
use gfrac::oracle::GridSpec;
use gfrac::policy::SeriesPolicy;
use gfrac::solution::Scenario;
use gfrac::spectral::{BoxDomain, InitialCondition};

/// Failure classes map onto the process exit codes: configuration
/// problems exit 2, numeric failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Numeric-stage adapter for engine errors.
pub fn numeric(e: gfrac::Error) -> CliError {
    CliError::Numeric(e.to_string())
}

const KNOWN_KEYS: &[&str] = &[
    "domain.dim",
    "domain.lengths",
    "domain.diffusion",
    "order.alpha",
    "clock.family",
    "clock.beta",
    "clock.rate",
    "initial.kind",
    "initial.x0",
    "initial.sigma",
    "time.min",
    "time.max",
    "time.points",
    "time.spacing",
    "time.at",
    "series.lambda_max",
    "series.min_modes_per_axis",
    "series.rel_tol",
    "series.max_modes",
    "series.ml_floor",
    "oracle.points_per_axis",
    "oracle.s_steps",
    "oracle.s_final",
    "output.format",
    "output.path",
];

/// Raw key/value pairs after file parsing and flag overrides.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_err(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if value.is_empty() {
                return Err(config_err(format!("line {}: empty value for {key:?}", lineno + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        Ok(RawConfig { values })
    }

    /// Flags override file values.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KNOWN_KEYS.contains(&key), "internal override for unknown key {key}");
        self.values.insert(key.to_string(), value.into());
    }

    pub(crate) fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| config_err(format!("{key}: {v:?} is not a number"))),
        }
    }

    fn parse_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| config_err(format!("{key}: {v:?} is not a nonnegative integer"))),
        }
    }

    fn parse_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<f64>()
                        .map_err(|_| config_err(format!("{key}: {part:?} is not a number")))
                })
                .collect::<Result<Vec<f64>, CliError>>()
                .map(Some),
        }
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Time-grid request, resolved against the scenario when bounds are
/// omitted.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
    pub log_spaced: bool,
    pub at: Option<f64>,
}

/// Fully validated configuration, ready to build engine objects.
pub struct Settings {
    pub scenario: Scenario,
    pub time: TimeGrid,
    pub grid: GridSpec,
    pub format: Format,
    pub out: Option<String>,
}

pub fn compile(raw: &RawConfig) -> Result<Settings, CliError> {
    let dim = raw.parse_usize("domain.dim")?.unwrap_or(1);
    if dim == 0 {
        return Err(config_err("domain.dim: must be at least 1"));
    }
    let lengths = match raw.parse_list("domain.lengths")? {
        None => vec![1.0; dim],
        Some(list) if list.len() == 1 => vec![list[0]; dim],
        Some(list) if list.len() == dim => list,
        Some(list) => {
            return Err(config_err(format!(
                "domain.lengths: got {} entries for dimension {dim}",
                list.len()
            )))
        }
    };
    let diffusion = raw.parse_f64("domain.diffusion")?.unwrap_or(1.0);
    let domain = BoxDomain::new(lengths.clone(), diffusion)
        .map_err(|e| config_err(format!("domain: {e}")))?;

    let alpha = raw
        .parse_f64("order.alpha")?
        .ok_or_else(|| config_err("order.alpha is required"))?;

    let clock = build_clock(raw)?;

    let x0 = match raw.parse_list("initial.x0")? {
        None => lengths.iter().map(|l| 0.5 * l).collect(),
        Some(list) if list.len() == dim => list,
        Some(list) => {
            return Err(config_err(format!(
                "initial.x0: got {} entries for dimension {dim}",
                list.len()
            )))
        }
    };
    let ic = match raw.get("initial.kind").unwrap_or("delta") {
        "delta" => InitialCondition::delta(x0),
        "gaussian" => {
            let sigma = raw
                .parse_f64("initial.sigma")?
                .ok_or_else(|| config_err("initial.sigma is required for a gaussian release"))?;
            InitialCondition::gaussian(&domain, &x0, sigma)
                .map_err(|e| config_err(format!("initial: {e}")))?
        }
        other => {
            return Err(config_err(format!(
                "initial.kind: {other:?} is not delta or gaussian"
            )))
        }
    };

    let time = build_time_grid(raw)?;

    let mut policy = SeriesPolicy::default();
    if let Some(v) = raw.parse_f64("series.lambda_max")? {
        policy.lambda_max = Some(v);
    }
    if let Some(v) = raw.parse_usize("series.min_modes_per_axis")? {
        policy.min_modes_per_axis = v;
    }
    if let Some(v) = raw.parse_f64("series.rel_tol")? {
        policy.rel_tol = v;
    }
    if let Some(v) = raw.parse_usize("series.max_modes")? {
        policy.max_modes = v;
    }
    if let Some(v) = raw.parse_f64("series.ml_floor")? {
        policy.ml_floor = Some(v);
    }
    // Curves start at time.min, so the evaluation floor must sit there.
    if let Some(tmin) = time.min {
        if !(tmin > 0.0) {
            return Err(config_err("time.min: must be positive"));
        }
        policy.t_min = policy.t_min.min(tmin);
    }
    if let Some(at) = time.at {
        policy.t_min = policy.t_min.min(at);
    }

    let scenario = Scenario::new(domain, clock, alpha, ic, policy)
        .map_err(|e| config_err(format!("scenario: {e}")))?;

    let grid = GridSpec {
        points_per_axis: raw.parse_usize("oracle.points_per_axis")?.unwrap_or(16),
        s_steps: raw.parse_usize("oracle.s_steps")?.unwrap_or(64),
        s_final: raw.parse_f64("oracle.s_final")?.unwrap_or(0.25),
    };

    let format = match raw.get("output.format").unwrap_or("csv") {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(config_err(format!("output.format: {other:?} is not csv or json"))),
    };

    Ok(Settings {
        scenario,
        time,
        grid,
        format,
        out: raw.get("output.path").map(|s| s.to_string()),
    })
}

fn build_clock(raw: &RawConfig) -> Result<Clock, CliError> {
    let family = match raw.get("clock.family").unwrap_or("identity") {
        "identity" => {
            if raw.get("clock.beta").is_some() || raw.get("clock.rate").is_some() {
                return Err(config_err("clock: the identity clock takes no parameters"));
            }
            ClockFamily::Identity
        }
        "power_law" => ClockFamily::PowerLaw {
            beta: raw
                .parse_f64("clock.beta")?
                .ok_or_else(|| config_err("clock.beta is required for power_law"))?,
        },
        "dodson" => ClockFamily::Dodson {
            beta_rate: raw
                .parse_f64("clock.rate")?
                .ok_or_else(|| config_err("clock.rate is required for dodson"))?,
        },
        other => {
            return Err(config_err(format!(
                "clock.family: {other:?} is not identity, power_law, or dodson"
            )))
        }
    };
    make_clock(family).map_err(|e| config_err(format!("clock: {e}")))
}

fn build_time_grid(raw: &RawConfig) -> Result<TimeGrid, CliError> {
    let points = raw.parse_usize("time.points")?.unwrap_or(200);
    let log_spaced = match raw.get("time.spacing").unwrap_or("log") {
        "log" => true,
        "linear" => false,
        other => {
            return Err(config_err(format!(
                "time.spacing: {other:?} is not log or linear"
            )))
        }
    };
    Ok(TimeGrid {
        min: raw.parse_f64("time.min")?,
        max: raw.parse_f64("time.max")?,
        points,
        log_spaced,
        at: raw.parse_f64("time.at")?,
    })
}

/// Resolves the sample times: explicit bounds when given, otherwise a
/// window from the evaluation floor to 10^4 times the decay-onset time of
/// the slowest mode (tails are power laws, hence the log default).
pub fn resolve_times(scn: &Scenario, time: &TimeGrid) -> Result<Vec<f64>, CliError> {
    if time.points == 0 {
        return Err(config_err("time.points: the time grid is empty"));
    }
    let t_min = time.min.unwrap_or(scn.policy().t_min);
    if !(t_min > 0.0) {
        return Err(config_err("time.min: must be positive"));
    }
    let t_max = match time.max {
        Some(v) => v,
        None => {
            let lambda = scn.modes().min_lambda();
            let s_peak = (lambda * scn.domain().diffusion()).recip().powf(scn.alpha().recip());
            let s_peak = match scn.clock().limit_at_infinity() {
                ClockLimit::Finite(l) => s_peak.min(l * (1.0 - 1e-9)),
                ClockLimit::Unbounded => s_peak,
            };
            1e4 * scn.clock().invert(s_peak).map_err(numeric)?
        }
    };
    if !(t_max > t_min) {
        return Err(config_err(format!(
            "time window [{t_min}, {t_max}] is empty or reversed"
        )));
    }
    if time.points == 1 {
        return Ok(vec![t_min]);
    }
    let n = time.points;
    let mut out = Vec::with_capacity(n);
    if time.log_spaced {
        let (a, b) = (t_min.ln(), t_max.ln());
        for i in 0..n {
            out.push((a + (b - a) * i as f64 / (n - 1) as f64).exp());
        }
    } else {
        for i in 0..n {
            out.push(t_min + (t_max - t_min) * i as f64 / (n - 1) as f64);
        }
    }
    // Endpoint roundoff must not dip below the evaluation floor.
    out[0] = t_min;
    out[n - 1] = t_max;
    Ok(out)
}
