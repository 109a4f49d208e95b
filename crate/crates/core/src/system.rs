use std::fmt;

use crate::channel::{jakes_alpha, AgingParams};
use crate::error::{ensure_finite, ensure_positive, invalid, Result};

/// Which CSI the base station acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    /// Stale estimate `α·ĝ[n]`.
    Aged,
    /// Wiener prediction from the last `p + 1` training observations.
    Predicted(usize),
}

impl CsiMode {
    pub fn order(self) -> usize {
        match self {
            CsiMode::Aged => 0,
            CsiMode::Predicted(p) => p,
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsiMode::Aged => write!(f, "aged"),
            CsiMode::Predicted(p) => write!(f, "predicted({p})"),
        }
    }
}

/// Single-cell uplink scenario. Powers are linear.
///
/// The training power is always derived as `p_p = tau · p_u`. When the
/// per-user power follows a scaling law, `p_u = e_u / m^gamma`; the fixed
/// power case is `gamma = 0`, `e_u = p_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub m: usize,
    pub k: usize,
    pub tau: usize,
    pub p_u: f64,
    pub pred_order: usize,
    pub gamma: f64,
    pub e_u: f64,
    /// Frame length `T`; `None` means no training overhead in the sum rate.
    pub frame_len: Option<usize>,
    aging: AgingParams,
}

impl SystemConfig {
    /// Fixed per-user power `p_u`, `tau = k`, Jakes aging from `fd_ts`.
    pub fn new(m: usize, k: usize, p_u: f64, fd_ts: f64) -> Result<Self> {
        let config = Self {
            m,
            k,
            tau: k,
            p_u,
            pred_order: 0,
            gamma: 0.0,
            e_u: p_u,
            frame_len: None,
            aging: jakes_alpha(fd_ts)?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Per-user power scaled as `p_u = e_u / m^gamma`.
    pub fn with_power_scaling(m: usize, k: usize, e_u: f64, gamma: f64, fd_ts: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_positive("E_u", e_u)?;
        let mut config = Self::new(m, k, e_u / (m as f64).powf(gamma), fd_ts)?;
        config.gamma = gamma;
        config.e_u = e_u;
        Ok(config)
    }

    pub fn with_tau(mut self, tau: usize) -> Result<Self> {
        self.tau = tau;
        self.validate()?;
        Ok(self)
    }

    pub fn with_aging(mut self, aging: AgingParams) -> Self {
        self.aging = aging;
        self
    }

    /// Replaces the Jakes-derived correlation with an explicit `alpha`.
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Ok(self.with_aging(AgingParams::from_alpha(alpha)?))
    }

    pub fn with_pred_order(mut self, p: usize) -> Self {
        self.pred_order = p;
        self
    }

    pub fn with_frame_len(mut self, t: Option<usize>) -> Result<Self> {
        self.frame_len = t;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(invalid("M", "must be >= 1"));
        }
        if self.k == 0 {
            return Err(invalid("K", "must be >= 1"));
        }
        if self.tau < self.k {
            return Err(invalid(
                "tau",
                format!("training length {} shorter than K = {}", self.tau, self.k),
            ));
        }
        ensure_positive("p_u", self.p_u)?;
        ensure_finite("gamma", self.gamma)?;
        if self.gamma < 0.0 {
            return Err(invalid("gamma", "must be >= 0"));
        }
        ensure_finite("E_u", self.e_u)?;
        if let Some(t) = self.frame_len {
            if t <= self.tau {
                return Err(invalid("T", format!("frame length {t} must exceed tau = {}", self.tau)));
            }
        }
        Ok(())
    }

    /// Training power `tau · p_u`.
    pub fn p_p(&self) -> f64 {
        self.tau as f64 * self.p_u
    }

    pub fn aging(&self) -> AgingParams {
        self.aging
    }

    pub fn alpha(&self) -> f64 {
        self.aging.alpha()
    }

    /// `(T − tau)/T`, or 1 without a frame length.
    pub fn overhead_factor(&self) -> f64 {
        match self.frame_len {
            Some(t) => (t - self.tau) as f64 / t as f64,
            None => 1.0,
        }
    }
}
