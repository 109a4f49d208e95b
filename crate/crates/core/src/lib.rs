//! Massive MIMO achievable rates under channel aging.
//!
//! The crate covers the whole single-cell link model: large-scale user drops,
//! Rayleigh small-scale fading, pilot-based MMSE estimation, AR(1) channel
//! aging with Jakes correlation, and the optimal Wiener channel predictor.
//! On top of that it provides
//!
//! * MRC/ZF uplink detection and Monte Carlo ergodic rates ([`uplink`]),
//! * the closed-form Jensen lower bounds and power-scaling limits ([`bounds`]),
//! * the MRT downlink closed form and its moment oracle ([`downlink`]),
//! * the multi-cell pilot-contamination asymptotics ([`multicell`]).
//!
//! All powers are linear; conversion from dB belongs to the caller.
//!
//! ```
//! use mimo_aging::{bounds, channel::FadingProfile, SystemConfig};
//!
//! let profile = FadingProfile::from_betas(&[1.0; 10]).unwrap();
//! let config = SystemConfig::new(128, 10, 10.0, 0.1).unwrap();
//! let r = bounds::mrc_bound_aged(&config, &profile, 0).unwrap();
//! assert!(r > 0.0);
//! ```

pub mod bounds;
pub mod channel;
pub mod downlink;
mod error;
pub mod kernel;
pub mod multicell;
pub mod predictor;
mod system;
pub mod uplink;

pub use error::{Error, Result};
pub use kernel::{ComplexMatrix, Rng};
pub use system::{CsiMode, SystemConfig};
