//! Scenario configuration: a flat `key = value` text format with sections.
//!
//! ```text
//! # comments run to the end of the line
//! [scenario]
//! preset = fig1          # optional starting point, other keys override it
//! trials = 2000
//! sweep = uplink.p_u_db
//! values = -10, 0, 10
//!
//! [uplink]
//! M = 64
//! ```
//!
//! An empty value unsets an optional key. Powers are given in dB and
//! converted to linear scale when a scenario runs.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use mimo_aging::channel::CellGeometry;
use thiserror::Error;

use crate::presets;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { line: usize, first: usize, key: String },
    #[error("{}invalid value for `{key}`: {reason}", at(*line))]
    InvalidValue {
        key: String,
        reason: String,
        line: Option<usize>,
    },
    #[error("`uplink.M` = {m} must exceed `uplink.K` = {k}: zero-forcing needs more antennas than users")]
    TooFewAntennas { m: usize, k: usize },
    #[error("unknown preset `{0}` (see `list-presets`)")]
    UnknownPreset(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
        line: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Uplink,
    Downlink,
    Multicell,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Uplink => "uplink",
            Experiment::Downlink => "downlink",
            Experiment::Multicell => "multicell",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Mrc,
    Zf,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Mrc => "mrc",
            Detector::Zf => "zf",
        })
    }
}

/// One swept parameter, named `section.key`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UplinkParams {
    pub m: usize,
    pub k: usize,
    /// Training length; `None` means `tau = K`.
    pub tau: Option<usize>,
    pub p_u_db: f64,
    pub fd_ts: f64,
    /// Power-scaling exponent; 0 keeps `p_u` fixed, otherwise `p_u = E_u/M^gamma`.
    pub gamma: f64,
    pub e_u_db: f64,
    pub pred_orders: Vec<usize>,
    pub detectors: Vec<Detector>,
    pub frame_len: Option<usize>,
    pub monte_carlo: bool,
    /// Adds the no-aging ("current CSI") and perfect-CSI bounds.
    pub reference_curves: bool,
    /// Uses `β_k = 1` instead of a random user drop.
    pub unit_betas: bool,
    pub radius_m: f64,
    pub guard_m: f64,
    pub pathloss_exp: f64,
    pub shadow_std_db: f64,
}

impl Default for UplinkParams {
    fn default() -> Self {
        let g = CellGeometry::default();
        Self {
            m: 128,
            k: 10,
            tau: None,
            p_u_db: 10.0,
            fd_ts: 0.1,
            gamma: 0.0,
            e_u_db: 15.0,
            pred_orders: vec![],
            detectors: vec![Detector::Mrc, Detector::Zf],
            frame_len: None,
            monte_carlo: false,
            reference_curves: false,
            unit_betas: false,
            radius_m: g.radius_m(),
            guard_m: g.guard_m(),
            pathloss_exp: g.pathloss_exp(),
            shadow_std_db: g.shadow_std_db(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkParams {
    pub m: usize,
    pub k: usize,
    pub tau: Option<usize>,
    pub p_b_db: f64,
    pub p_p_db: f64,
    pub fd_ts: f64,
    /// 0 keeps `p_b` and `p_p` fixed; otherwise `p_b = E_b/M^beta_exp` and
    /// `p_p = tau·E_u/√M`.
    pub beta_exp: f64,
    pub e_b_db: f64,
    pub e_u_db: f64,
    pub monte_carlo: bool,
}

impl Default for DownlinkParams {
    fn default() -> Self {
        Self {
            m: 64,
            k: 10,
            tau: None,
            p_b_db: 10.0,
            p_p_db: 10.0,
            fd_ts: 0.1,
            beta_exp: 0.0,
            e_b_db: 10.0,
            e_u_db: 3.0,
            monte_carlo: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticellParams {
    pub m: usize,
    pub cells: usize,
    pub k: usize,
    pub tau: Option<usize>,
    pub beta_same: f64,
    pub beta_cross: f64,
    pub gammas: Vec<f64>,
    pub e_u_db: f64,
    pub fd_ts: f64,
    pub pred_orders: Vec<usize>,
    pub include_aged: bool,
    /// Adds the no-aging reference (`α = 1`).
    pub include_current: bool,
    pub include_limits: bool,
}

impl Default for MulticellParams {
    fn default() -> Self {
        Self {
            m: 1024,
            cells: 7,
            k: 10,
            tau: None,
            beta_same: 1.0,
            beta_cross: 0.32,
            gammas: vec![0.3, 0.5, 0.7],
            e_u_db: 15.0,
            fd_ts: 0.1,
            pred_orders: vec![],
            include_aged: true,
            include_current: false,
            include_limits: true,
        }
    }
}

/// Everything needed to run and reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub experiment: Experiment,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub drop_file: Option<PathBuf>,
    pub uplink: UplinkParams,
    pub downlink: DownlinkParams,
    pub multicell: MulticellParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            experiment: Experiment::Uplink,
            trials: 10_000,
            seed: 1,
            sweep: None,
            output: None,
            drop_file: None,
            uplink: UplinkParams::default(),
            downlink: DownlinkParams::default(),
            multicell: MulticellParams::default(),
        }
    }
}

const SECTIONS: [&str; 4] = ["scenario", "uplink", "downlink", "multicell"];

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn parse_real(v: &str) -> Result<f64, String> {
    let x: f64 = parse_num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{v}` is not `true` or `false`")),
    }
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_opt<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if v.is_empty() {
        Ok(None)
    } else {
        item(v).map(Some)
    }
}

fn parse_detector(v: &str) -> Result<Detector, String> {
    match v {
        "mrc" => Ok(Detector::Mrc),
        "zf" => Ok(Detector::Zf),
        _ => Err(format!("`{v}` is not `mrc` or `zf`")),
    }
}

fn parse_experiment(v: &str) -> Result<Experiment, String> {
    match v {
        "uplink" => Ok(Experiment::Uplink),
        "downlink" => Ok(Experiment::Downlink),
        "multicell" => Ok(Experiment::Multicell),
        _ => Err(format!("`{v}` is not `uplink`, `downlink` or `multicell`")),
    }
}

enum SetError {
    Unknown,
    Invalid(String),
}

impl From<String> for SetError {
    fn from(s: String) -> Self {
        SetError::Invalid(s)
    }
}

/// Keys that hold a single number and can therefore be swept.
fn is_numeric_scalar(section: &str, key: &str) -> bool {
    matches!(
        (section, key),
        (
            "uplink",
            "M" | "K" | "tau" | "p_u_db" | "fd_ts" | "gamma" | "E_u_db" | "frame_len"
        ) | ("uplink", "radius_m" | "guard_m" | "pathloss_exp" | "shadow_std_db")
            | (
                "downlink",
                "M" | "K" | "tau" | "p_b_db" | "p_p_db" | "fd_ts" | "beta_exp" | "E_b_db" | "E_u_db"
            )
            | (
                "multicell",
                "M" | "C" | "K" | "tau" | "beta_same" | "beta_cross" | "E_u_db" | "fd_ts"
            )
    )
}

impl ScenarioConfig {
    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), SetError> {
        match section {
            "scenario" => match key {
                "name" => self.name = v.to_string(),
                "experiment" => self.experiment = parse_experiment(v)?,
                "trials" => self.trials = parse_num(v)?,
                "seed" => self.seed = parse_num(v)?,
                "sweep" => {
                    let values = self.sweep.take().map(|s| s.values).unwrap_or_default();
                    self.sweep = parse_opt(v, |s| Ok(s.to_string()))?.map(|key| Sweep { key, values });
                }
                "values" => {
                    let values = parse_list(v, parse_real)?;
                    match &mut self.sweep {
                        Some(s) => s.values = values,
                        None => {
                            self.sweep = Some(Sweep {
                                key: String::new(),
                                values,
                            })
                        }
                    }
                }
                "output" => self.output = parse_opt(v, |s| Ok(PathBuf::from(s)))?,
                "drop_file" => self.drop_file = parse_opt(v, |s| Ok(PathBuf::from(s)))?,
                _ => return Err(SetError::Unknown),
            },
            "uplink" => {
                let u = &mut self.uplink;
                match key {
                    "M" => u.m = parse_num(v)?,
                    "K" => u.k = parse_num(v)?,
                    "tau" => u.tau = parse_opt(v, parse_num)?,
                    "p_u_db" => u.p_u_db = parse_real(v)?,
                    "fd_ts" => u.fd_ts = parse_real(v)?,
                    "gamma" => u.gamma = parse_real(v)?,
                    "E_u_db" => u.e_u_db = parse_real(v)?,
                    "pred_orders" => u.pred_orders = parse_list(v, parse_num)?,
                    "detectors" => u.detectors = parse_list(v, parse_detector)?,
                    "frame_len" => u.frame_len = parse_opt(v, parse_num)?,
                    "monte_carlo" => u.monte_carlo = parse_bool(v)?,
                    "reference_curves" => u.reference_curves = parse_bool(v)?,
                    "unit_betas" => u.unit_betas = parse_bool(v)?,
                    "radius_m" => u.radius_m = parse_real(v)?,
                    "guard_m" => u.guard_m = parse_real(v)?,
                    "pathloss_exp" => u.pathloss_exp = parse_real(v)?,
                    "shadow_std_db" => u.shadow_std_db = parse_real(v)?,
                    _ => return Err(SetError::Unknown),
                }
            }
            "downlink" => {
                let d = &mut self.downlink;
                match key {
                    "M" => d.m = parse_num(v)?,
                    "K" => d.k = parse_num(v)?,
                    "tau" => d.tau = parse_opt(v, parse_num)?,
                    "p_b_db" => d.p_b_db = parse_real(v)?,
                    "p_p_db" => d.p_p_db = parse_real(v)?,
                    "fd_ts" => d.fd_ts = parse_real(v)?,
                    "beta_exp" => d.beta_exp = parse_real(v)?,
                    "E_b_db" => d.e_b_db = parse_real(v)?,
                    "E_u_db" => d.e_u_db = parse_real(v)?,
                    "monte_carlo" => d.monte_carlo = parse_bool(v)?,
                    _ => return Err(SetError::Unknown),
                }
            }
            "multicell" => {
                let c = &mut self.multicell;
                match key {
                    "M" => c.m = parse_num(v)?,
                    "C" => c.cells = parse_num(v)?,
                    "K" => c.k = parse_num(v)?,
                    "tau" => c.tau = parse_opt(v, parse_num)?,
                    "beta_same" => c.beta_same = parse_real(v)?,
                    "beta_cross" => c.beta_cross = parse_real(v)?,
                    "gammas" => c.gammas = parse_list(v, parse_real)?,
                    "E_u_db" => c.e_u_db = parse_real(v)?,
                    "fd_ts" => c.fd_ts = parse_real(v)?,
                    "pred_orders" => c.pred_orders = parse_list(v, parse_num)?,
                    "include_aged" => c.include_aged = parse_bool(v)?,
                    "include_current" => c.include_current = parse_bool(v)?,
                    "include_limits" => c.include_limits = parse_bool(v)?,
                    _ => return Err(SetError::Unknown),
                }
            }
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }

    /// Sets `section.key` from its text form, as a config file line would.
    pub fn set_key(&mut self, dotted: &str, value: &str) -> Result<(), ConfigError> {
        let (section, key) = dotted.split_once('.').ok_or_else(|| ConfigError::UnknownKey {
            line: 0,
            key: dotted.to_string(),
        })?;
        match self.set(section, key, value.trim()) {
            Ok(()) => Ok(()),
            Err(SetError::Unknown) => Err(ConfigError::UnknownKey {
                line: 0,
                key: dotted.to_string(),
            }),
            Err(SetError::Invalid(reason)) => Err(invalid(dotted, reason)),
        }
    }

    /// Copy with the sweep parameter set to `value`.
    pub fn at_sweep_value(&self, value: f64) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        if let Some(s) = &self.sweep {
            c.set_key(&s.key, &value.to_string())?;
        }
        Ok(c)
    }

    /// Checks the section used by the experiment, and every sweep point.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(invalid("scenario.trials", "must be >= 1"));
        }
        if self.name.is_empty() || self.name.contains(char::is_whitespace) {
            return Err(invalid("scenario.name", "must be a non-empty word"));
        }
        if let Some(s) = &self.sweep {
            let (section, key) = s.key.split_once('.').unwrap_or(("", s.key.as_str()));
            if s.key.is_empty() {
                return Err(invalid("scenario.values", "given without `scenario.sweep`"));
            }
            if !is_numeric_scalar(section, key) {
                return Err(invalid(
                    "scenario.sweep",
                    format!("`{}` is not a numeric config key", s.key),
                ));
            }
            if section != self.experiment.to_string() {
                return Err(invalid(
                    "scenario.sweep",
                    format!("`{}` does not belong to the {} experiment", s.key, self.experiment),
                ));
            }
            if s.values.is_empty() {
                return Err(invalid("scenario.values", "sweep needs at least one value"));
            }
            for &v in &s.values {
                self.at_sweep_value(v)
                    .map_err(|e| invalid("scenario.values", format!("{v}: {e}")))?
                    .validate_point()
                    .map_err(|e| invalid("scenario.values", format!("{v}: {e}")))?;
            }
        }
        self.validate_point()
    }

    fn validate_point(&self) -> Result<(), ConfigError> {
        match self.experiment {
            Experiment::Uplink => validate_uplink(&self.uplink),
            Experiment::Downlink => validate_downlink(&self.downlink),
            Experiment::Multicell => validate_multicell(&self.multicell),
        }
    }

    /// Config text that parses back to exactly this configuration.
    pub fn to_config_text(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        }
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let (u, d, c) = (&self.uplink, &self.downlink, &self.multicell);
        let sections: [(&str, Vec<(&str, String)>); 4] = [
            (
                "scenario",
                vec![
                    ("name", self.name.clone()),
                    ("experiment", self.experiment.to_string()),
                    ("trials", self.trials.to_string()),
                    ("seed", self.seed.to_string()),
                    ("sweep", self.sweep.as_ref().map(|s| s.key.clone()).unwrap_or_default()),
                    (
                        "values",
                        self.sweep.as_ref().map(|s| list(&s.values)).unwrap_or_default(),
                    ),
                    ("output", path(&self.output)),
                    ("drop_file", path(&self.drop_file)),
                ],
            ),
            (
                "uplink",
                vec![
                    ("M", u.m.to_string()),
                    ("K", u.k.to_string()),
                    ("tau", opt(&u.tau)),
                    ("p_u_db", u.p_u_db.to_string()),
                    ("fd_ts", u.fd_ts.to_string()),
                    ("gamma", u.gamma.to_string()),
                    ("E_u_db", u.e_u_db.to_string()),
                    ("pred_orders", list(&u.pred_orders)),
                    ("detectors", list(&u.detectors)),
                    ("frame_len", opt(&u.frame_len)),
                    ("monte_carlo", u.monte_carlo.to_string()),
                    ("reference_curves", u.reference_curves.to_string()),
                    ("unit_betas", u.unit_betas.to_string()),
                    ("radius_m", u.radius_m.to_string()),
                    ("guard_m", u.guard_m.to_string()),
                    ("pathloss_exp", u.pathloss_exp.to_string()),
                    ("shadow_std_db", u.shadow_std_db.to_string()),
                ],
            ),
            (
                "downlink",
                vec![
                    ("M", d.m.to_string()),
                    ("K", d.k.to_string()),
                    ("tau", opt(&d.tau)),
                    ("p_b_db", d.p_b_db.to_string()),
                    ("p_p_db", d.p_p_db.to_string()),
                    ("fd_ts", d.fd_ts.to_string()),
                    ("beta_exp", d.beta_exp.to_string()),
                    ("E_b_db", d.e_b_db.to_string()),
                    ("E_u_db", d.e_u_db.to_string()),
                    ("monte_carlo", d.monte_carlo.to_string()),
                ],
            ),
            (
                "multicell",
                vec![
                    ("M", c.m.to_string()),
                    ("C", c.cells.to_string()),
                    ("K", c.k.to_string()),
                    ("tau", opt(&c.tau)),
                    ("beta_same", c.beta_same.to_string()),
                    ("beta_cross", c.beta_cross.to_string()),
                    ("gammas", list(&c.gammas)),
                    ("E_u_db", c.e_u_db.to_string()),
                    ("fd_ts", c.fd_ts.to_string()),
                    ("pred_orders", list(&c.pred_orders)),
                    ("include_aged", c.include_aged.to_string()),
                    ("include_current", c.include_current.to_string()),
                    ("include_limits", c.include_limits.to_string()),
                ],
            ),
        ];
        let mut out = String::new();
        for (i, (section, entries)) in sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for (k, v) in entries {
                if v.is_empty() {
                    let _ = writeln!(out, "{k} =");
                } else {
                    let _ = writeln!(out, "{k} = {v}");
                }
            }
        }
        out
    }
}

fn check(ok: bool, key: &str, reason: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(key, reason))
    }
}

fn validate_uplink(u: &UplinkParams) -> Result<(), ConfigError> {
    check(u.k >= 1, "uplink.K", "must be >= 1")?;
    check(u.m >= 1, "uplink.M", "must be >= 1")?;
    let tau = u.tau.unwrap_or(u.k);
    check(tau >= u.k, "uplink.tau", "training length must be >= K")?;
    check(u.fd_ts >= 0.0, "uplink.fd_ts", "must be >= 0")?;
    check(u.gamma >= 0.0, "uplink.gamma", "must be >= 0 (0 keeps p_u fixed)")?;
    check(
        !u.detectors.is_empty(),
        "uplink.detectors",
        "need at least one detector",
    )?;
    if let Some(t) = u.frame_len {
        check(t > tau, "uplink.frame_len", "frame length must exceed tau")?;
    }
    CellGeometry::new(u.radius_m, u.guard_m, u.pathloss_exp, u.shadow_std_db)
        .map_err(|e| invalid("uplink.radius_m", format!("invalid cell geometry: {e}")))?;
    if u.m <= u.k {
        return Err(ConfigError::TooFewAntennas { m: u.m, k: u.k });
    }
    Ok(())
}

fn validate_downlink(d: &DownlinkParams) -> Result<(), ConfigError> {
    check(d.k >= 1, "downlink.K", "must be >= 1")?;
    check(d.m >= 1, "downlink.M", "must be >= 1")?;
    check(
        d.tau.unwrap_or(d.k) >= d.k,
        "downlink.tau",
        "training length must be >= K",
    )?;
    check(d.fd_ts >= 0.0, "downlink.fd_ts", "must be >= 0")?;
    check(
        d.beta_exp >= 0.0,
        "downlink.beta_exp",
        "must be >= 0 (0 keeps p_b fixed)",
    )?;
    let alpha = mimo_aging::channel::jakes_alpha(d.fd_ts).map_err(|e| invalid("downlink.fd_ts", e.to_string()))?;
    check(
        alpha.alpha() != 0.0,
        "downlink.fd_ts",
        "gives alpha = 0, MRT normalization undefined",
    )
}

fn validate_multicell(c: &MulticellParams) -> Result<(), ConfigError> {
    check(c.cells >= 1, "multicell.C", "must be >= 1")?;
    check(c.k >= 1, "multicell.K", "must be >= 1")?;
    check(c.m >= 1, "multicell.M", "must be >= 1")?;
    check(
        c.tau.unwrap_or(c.k) >= c.k,
        "multicell.tau",
        "training length must be >= K",
    )?;
    check(c.beta_same > 0.0, "multicell.beta_same", "must be > 0")?;
    check(c.beta_cross > 0.0, "multicell.beta_cross", "must be > 0")?;
    check(c.fd_ts >= 0.0, "multicell.fd_ts", "must be >= 0")?;
    check(!c.gammas.is_empty(), "multicell.gammas", "need at least one exponent")?;
    check(
        c.gammas.iter().all(|&g| g > 0.0),
        "multicell.gammas",
        "exponents must be > 0",
    )?;
    check(
        c.include_aged || c.include_current || !c.pred_orders.is_empty(),
        "multicell.include_aged",
        "no curves selected",
    )?;
    let sub_half = c.gammas.iter().any(|&g| g < 0.5);
    check(
        !(c.include_limits && sub_half && c.cells < 2),
        "multicell.C",
        "the gamma < 1/2 limit needs C >= 2 (pilot contamination)",
    )
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: Vec<(usize, String, String, String)> = vec![];
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("unterminated section header `{content}`"),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection {
                    line,
                    section: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        let sec = section.clone().ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("key `{key}` appears before any [section]"),
        })?;
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: "empty key".into(),
            });
        }
        if let Some(&first) = seen.get(&(sec.clone(), key.to_string())) {
            return Err(ConfigError::DuplicateKey {
                line,
                first,
                key: format!("{sec}.{key}"),
            });
        }
        seen.insert((sec.clone(), key.to_string()), line);
        entries.push((line, sec, key.to_string(), value.trim().to_string()));
    }

    let mut config = match entries.iter().find(|e| e.1 == "scenario" && e.2 == "preset") {
        Some((line, _, _, name)) => presets::preset(name).map_err(|e| match e {
            ConfigError::UnknownPreset(_) => ConfigError::InvalidValue {
                key: "scenario.preset".into(),
                reason: format!("unknown preset `{name}`"),
                line: Some(*line),
            },
            other => other,
        })?,
        None => ScenarioConfig::default(),
    };
    // `values` may precede `sweep` in the file; apply the sweep key first.
    entries.sort_by_key(|e| !(e.1 == "scenario" && e.2 == "sweep"));
    for (line, sec, key, value) in entries {
        if sec == "scenario" && key == "preset" {
            continue;
        }
        match config.set(&sec, &key, &value) {
            Ok(()) => {}
            Err(SetError::Unknown) => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: format!("{sec}.{key}"),
                })
            }
            Err(SetError::Invalid(reason)) => {
                return Err(ConfigError::InvalidValue {
                    key: format!("{sec}.{key}"),
                    reason,
                    line: Some(line),
                })
            }
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn parse_config_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_config(&text)
}
