//! Variable-gain super-twisting control with a barrier-function gain.
//!
//! The controller drives the output `s` of a first-order plant
//!
//! ```text
//! ds/dt = gamma(t) (u + delta(t)),   g <= gamma <= G,   |delta'| <= M
//! ```
//!
//! into the band `|s| < eps` without knowing `g`, `G` or `M`, and keeps it
//! there. The gain first grows affinely until `|s| <= eps/2`, then follows a
//! barrier function of `s` that rises steeply near `+-eps` and relaxes back
//! toward its floor as `s` returns to zero.
//!
//! Modules:
//!
//! - [`barrier_gain`]: barrier function and the two-phase gain schedule.
//! - [`controllers`]: the proposed law plus the classical and adaptive
//!   super-twisting baselines.
//! - [`plant`]: the plant right-hand side and disturbance models.
//! - [`sim`]: deterministic fixed-step closed-loop simulation.
//! - [`diagnostics`]: Lyapunov quantities along trajectories, run metrics.
//! - [`scenario`] and [`experiments`]: scenario files, presets, CSV output.
//!
//! ```
//! use barrier_sta::{scenario, sim, diagnostics};
//!
//! let mut sc = scenario::preset("fig2a").unwrap();
//! sc.integration.t_end = 3.0;
//! let log = sim::simulate(&sc).unwrap();
//! let t_bar = log.t_bar.expect("switches within 3 s");
//! assert!(t_bar > 0.9 && t_bar < 1.1);
//! let m = diagnostics::extract_metrics(&log, &sc).unwrap();
//! assert!(m.converged);
//! ```

pub mod barrier_gain;
pub mod controllers;
pub mod diagnostics;
mod error;
pub mod experiments;
pub mod plant;
pub mod scenario;
pub mod sim;

pub use error::ParamError;
