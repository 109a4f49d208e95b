//! Runs a scenario over its sweep and renders the result CSV.
//!
//! CSV layout: header `sweep_value,curve_id,value,std_err`, then one row per
//! sweep point and curve, in sweep order and then in a fixed curve order.
//! Floats are written as `{:.16e}` (17 significant digits). Deterministic
//! curves have `std_err = 0`. Without a sweep the `sweep_value` cell is empty.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mimo_aging::bounds;
use mimo_aging::channel::{drop_users, jakes_alpha, CellGeometry, FadingProfile};
use mimo_aging::downlink::{downlink_moment_oracle, downlink_rate_closed_form, downlink_scaling_limit, DownlinkConfig};
use mimo_aging::kernel::mix_seed;
use mimo_aging::multicell::{multicell_user_limit, multicell_user_rate, GammaRegime, MultiCellConfig, MultiCellMode};
use mimo_aging::uplink::{monte_carlo_rate, DetectorKind};
use mimo_aging::{CsiMode, Rng, SystemConfig};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, Detector, Experiment, ScenarioConfig};

/// Stream tag for the user drop, kept apart from the per-point tags.
const DROP_TAG: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sweep point {index} ({key} = {value}): {source}")]
    Point {
        index: usize,
        key: String,
        value: f64,
        source: mimo_aging::Error,
    },
    #[error("{0}")]
    Model(#[from] mimo_aging::Error),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("cannot build thread pool: {0}")]
    Pool(String),
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub sweep_value: Option<f64>,
    pub curve_id: String,
    pub value: f64,
    pub std_err: f64,
}

type Curves = Vec<(String, f64, f64)>;
type BoundFn = fn(&SystemConfig, &FadingProfile, usize) -> Result<f64, mimo_aging::Error>;
type PredFn = fn(&SystemConfig, &FadingProfile, &[f64], usize) -> Result<f64, mimo_aging::Error>;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Evaluates every sweep point on the current rayon pool.
///
/// Point `i` seeds its Monte Carlo from `mix_seed(seed, i)`, so the result
/// does not depend on the number of threads.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<CurvePoint>, RunError> {
    config.validate()?;
    let drop = load_drop(config)?;
    let points: Vec<(Option<f64>, ScenarioConfig)> = match &config.sweep {
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((Some(v), config.at_sweep_value(v)?)))
            .collect::<Result<_, ConfigError>>()?,
        None => vec![(None, config.clone())],
    };
    let results: Vec<Result<Curves, mimo_aging::Error>> = points
        .par_iter()
        .enumerate()
        .map(|(i, (_, c))| {
            let seed = mix_seed(config.seed, i as u64);
            match c.experiment {
                Experiment::Uplink => uplink_point(c, drop.as_ref(), seed),
                Experiment::Downlink => downlink_point(c, seed),
                Experiment::Multicell => multicell_point(c),
            }
        })
        .collect();

    let mut rows = vec![];
    for (index, ((value, _), result)) in points.iter().zip(results).enumerate() {
        let curves = result.map_err(|source| RunError::Point {
            index,
            key: config.sweep.as_ref().map(|s| s.key.clone()).unwrap_or_default(),
            value: value.unwrap_or(f64::NAN),
            source,
        })?;
        rows.extend(curves.into_iter().map(|(curve_id, v, se)| CurvePoint {
            sweep_value: *value,
            curve_id,
            value: v,
            std_err: se,
        }));
    }
    Ok(rows)
}

/// Runs on a dedicated pool of `threads` workers (`None` uses the global pool).
pub fn run_with_threads(config: &ScenarioConfig, threads: Option<usize>) -> Result<Vec<CurvePoint>, RunError> {
    match threads {
        None => run_scenario(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?
            .install(|| run_scenario(config)),
    }
}

pub fn render_csv(rows: &[CurvePoint]) -> String {
    let mut out = String::from("sweep_value,curve_id,value,std_err\n");
    for r in rows {
        if let Some(v) = r.sweep_value {
            let _ = write!(out, "{v:.16e}");
        }
        let _ = writeln!(out, ",{},{:.16e},{:.16e}", r.curve_id, r.value, r.std_err);
    }
    out
}

/// Path of the metadata file written next to `out`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Runs the scenario and writes the CSV to `out` and the config to `<out>.meta`.
///
/// A relative `drop_file` is taken relative to the directory of `out`.
pub fn run_to_files(config: &ScenarioConfig, out: &Path, threads: Option<usize>) -> Result<usize, RunError> {
    let mut resolved = config.clone();
    if let (Some(drop), Some(dir)) = (&config.drop_file, out.parent()) {
        resolved.drop_file = Some(dir.join(drop));
    }
    let rows = run_with_threads(&resolved, threads)?;
    let io = |path: &Path, e: std::io::Error| RunError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    std::fs::write(out, render_csv(&rows)).map_err(|e| io(out, e))?;
    let mut meta = config.clone();
    meta.output = Some(out.to_path_buf());
    let meta_file = meta_path(out);
    std::fs::write(&meta_file, meta.to_config_text()).map_err(|e| io(&meta_file, e))?;
    Ok(rows.len())
}

/// The recorded user drop: loaded from `drop_file` if present, otherwise drawn
/// from the scenario seed and saved there. `None` when no drop is needed.
fn load_drop(config: &ScenarioConfig) -> Result<Option<FadingProfile>, RunError> {
    let u = &config.uplink;
    if config.experiment != Experiment::Uplink || u.unit_betas {
        return Ok(None);
    }
    if let Some(path) = &config.drop_file {
        let io = |e: mimo_aging::Error| RunError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        };
        if path.exists() {
            return FadingProfile::load(path).map(Some).map_err(io);
        }
        let profile = draw_drop(config, u.k)?;
        profile.save(path).map_err(io)?;
        return Ok(Some(profile));
    }
    Ok(None)
}

fn draw_drop(config: &ScenarioConfig, k: usize) -> Result<FadingProfile, mimo_aging::Error> {
    let u = &config.uplink;
    let geometry = CellGeometry::new(u.radius_m, u.guard_m, u.pathloss_exp, u.shadow_std_db)?;
    // Users are drawn one after another, so a smaller K sees a prefix of the same drop.
    drop_users(k, &geometry, &mut Rng::new(mix_seed(config.seed, DROP_TAG), 0))
}

fn uplink_point(c: &ScenarioConfig, drop: Option<&FadingProfile>, seed: u64) -> Result<Curves, mimo_aging::Error> {
    let u = &c.uplink;
    let tau = u.tau.unwrap_or(u.k);
    let e_u = db(u.e_u_db);
    let sys = if u.gamma > 0.0 {
        SystemConfig::with_power_scaling(u.m, u.k, e_u, u.gamma, u.fd_ts)?
    } else {
        SystemConfig::new(u.m, u.k, db(u.p_u_db), u.fd_ts)?
    }
    .with_tau(tau)?
    .with_frame_len(u.frame_len)?;
    let profile = match (drop, u.unit_betas) {
        (_, true) => FadingProfile::from_betas(&vec![1.0; u.k])?,
        (Some(p), false) if p.len() == u.k => p.clone(),
        (Some(p), false) => {
            return Err(mimo_aging::Error::DimensionMismatch(format!(
                "drop file has {} users, K = {}",
                p.len(),
                u.k
            )))
        }
        (None, false) => draw_drop(c, u.k)?,
    };
    let overhead = sys.overhead_factor();
    let total = |f: &dyn Fn(usize) -> Result<f64, mimo_aging::Error>| -> Result<f64, mimo_aging::Error> {
        Ok(overhead * (0..u.k).map(f).sum::<Result<f64, _>>()?)
    };
    let current = sys.clone().with_alpha(1.0)?;
    let mut thetas = vec![];
    for &p in &u.pred_orders {
        thetas.push((p, bounds::thetas(&sys, &profile, p)?));
    }

    let mut curves: Curves = vec![];
    for &det in &u.detectors {
        let (aged, predicted, perfect): (BoundFn, PredFn, BoundFn) = match det {
            Detector::Mrc => (
                bounds::mrc_bound_aged,
                bounds::mrc_bound_predicted,
                bounds::mrc_bound_perfect,
            ),
            Detector::Zf => (
                bounds::zf_bound_aged,
                bounds::zf_bound_predicted,
                bounds::zf_bound_perfect,
            ),
        };
        curves.push((format!("bound_{det}_aged"), total(&|k| aged(&sys, &profile, k))?, 0.0));
        for (p, th) in &thetas {
            curves.push((
                format!("bound_{det}_pred{p}"),
                total(&|k| predicted(&sys, &profile, th, k))?,
                0.0,
            ));
        }
        if u.reference_curves {
            curves.push((
                format!("bound_{det}_current"),
                total(&|k| aged(&current, &profile, k))?,
                0.0,
            ));
            curves.push((
                format!("bound_{det}_perfect"),
                total(&|k| perfect(&sys, &profile, k))?,
                0.0,
            ));
        }
        if u.monte_carlo {
            let kind = match det {
                Detector::Mrc => DetectorKind::Mrc,
                Detector::Zf => DetectorKind::Zf,
            };
            let modes = std::iter::once(("aged".to_string(), CsiMode::Aged)).chain(
                u.pred_orders
                    .iter()
                    .map(|&p| (format!("pred{p}"), CsiMode::Predicted(p))),
            );
            for (label, mode) in modes {
                let r = monte_carlo_rate(&sys, &profile, kind, mode, c.trials, seed)?;
                curves.push((format!("mc_{det}_{label}"), r.sum_rate, r.sum_std_err));
            }
        }
    }
    if u.gamma > 0.0 {
        let alpha = sys.alpha();
        let betas = profile.betas();
        curves.push((
            "asymptote_aged".into(),
            total(&|k| bounds::asymptotic_rate(u.gamma, u.m, e_u, tau, alpha, betas[k], 0, false))?,
            0.0,
        ));
        for &p in &u.pred_orders {
            curves.push((
                format!("asymptote_pred{p}"),
                total(&|k| bounds::asymptotic_rate(u.gamma, u.m, e_u, tau, alpha, betas[k], p, true))?,
                0.0,
            ));
        }
    }
    Ok(curves)
}

fn downlink_point(c: &ScenarioConfig, seed: u64) -> Result<Curves, mimo_aging::Error> {
    let d = &c.downlink;
    let tau = d.tau.unwrap_or(d.k);
    let alpha = jakes_alpha(d.fd_ts)?.alpha();
    let betas = vec![1.0; d.k];
    let (e_b, e_u) = (db(d.e_b_db), db(d.e_u_db));
    let cfg = if d.beta_exp > 0.0 {
        let p_p = tau as f64 * e_u / (d.m as f64).sqrt();
        DownlinkConfig::with_power_scaling(d.m, &betas, e_b, d.beta_exp, p_p, alpha)?
    } else {
        DownlinkConfig::new(d.m, &betas, db(d.p_b_db), db(d.p_p_db), alpha)?
    };
    let mut curves: Curves = vec![];
    let closed: f64 = (0..d.k)
        .map(|k| downlink_rate_closed_form(&cfg, k))
        .sum::<Result<_, _>>()?;
    curves.push(("closed_form".into(), closed, 0.0));
    if d.monte_carlo {
        let m = downlink_moment_oracle(&cfg, c.trials, seed)?;
        let rate = m.users.iter().map(|u| u.assembled_rate.mean).sum();
        let se = m
            .users
            .iter()
            .map(|u| u.assembled_rate.std_err.powi(2))
            .sum::<f64>()
            .sqrt();
        curves.push(("mc_moments".into(), rate, se));
    }
    if d.beta_exp > 0.0 {
        let limit: f64 = (0..d.k)
            .map(|k| downlink_scaling_limit(e_b, e_u, tau, alpha, &betas, d.beta_exp, d.m, k))
            .sum::<Result<_, _>>()?;
        curves.push(("asymptote".into(), limit, 0.0));
    }
    Ok(curves)
}

fn multicell_point(c: &ScenarioConfig) -> Result<Curves, mimo_aging::Error> {
    let mc = &c.multicell;
    let tau = mc.tau.unwrap_or(mc.k);
    let alpha = jakes_alpha(mc.fd_ts)?.alpha();
    let e_u = db(mc.e_u_db);
    let mut curves: Curves = vec![];
    for &gamma in &mc.gammas {
        let cfg = MultiCellConfig::symmetric(mc.cells, mc.k, mc.beta_same, mc.beta_cross, gamma, e_u, tau, alpha)?;
        // Sum over the users of cell 0.
        let cell_sum = |cfg: &MultiCellConfig, mode: MultiCellMode| -> Result<f64, mimo_aging::Error> {
            (0..mc.k).map(|k| multicell_user_rate(cfg, mc.m, 0, k, mode)).sum()
        };
        let limit = |cfg: &MultiCellConfig, mode: MultiCellMode| -> Result<f64, mimo_aging::Error> {
            let regime = if gamma == 0.5 {
                GammaRegime::Half
            } else if gamma < 0.5 {
                GammaRegime::SubHalf
            } else {
                return Ok(0.0);
            };
            (0..mc.k).map(|k| multicell_user_limit(cfg, 0, k, regime, mode)).sum()
        };
        if mc.include_aged {
            curves.push((format!("aged_gamma{gamma}"), cell_sum(&cfg, MultiCellMode::Aged)?, 0.0));
            if mc.include_limits {
                curves.push((
                    format!("limit_aged_gamma{gamma}"),
                    limit(&cfg, MultiCellMode::Aged)?,
                    0.0,
                ));
            }
        }
        if mc.include_current {
            let mut cur = cfg.clone();
            cur.alpha = 1.0;
            curves.push((
                format!("current_gamma{gamma}"),
                cell_sum(&cur, MultiCellMode::Aged)?,
                0.0,
            ));
            if mc.include_limits {
                curves.push((
                    format!("limit_current_gamma{gamma}"),
                    limit(&cur, MultiCellMode::Aged)?,
                    0.0,
                ));
            }
        }
        for &p in &mc.pred_orders {
            let pc = cfg.clone().with_pred_order(p);
            curves.push((
                format!("pred{p}_gamma{gamma}"),
                cell_sum(&pc, MultiCellMode::Predicted)?,
                0.0,
            ));
            if mc.include_limits {
                curves.push((
                    format!("limit_pred{p}_gamma{gamma}"),
                    limit(&pc, MultiCellMode::Predicted)?,
                    0.0,
                ));
            }
        }
    }
    Ok(curves)
}
