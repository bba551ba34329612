//! Lyapunov-based health checks along trajectories and scalar run metrics.
//!
//! After the switch the closed loop is analysed in the coordinates
//! `y1 = L_b(s)^2 s`, `y2 = phi`, with the Lyapunov candidate
//!
//! ```text
//! V1 = ln(1 + 2 C0 |y1|) / (2 C0) * (1 - sign(y1) sat(y2) / 4) + F(y) y2^2 / 2
//! ```
//!
//! where `F = g` when `sign(y1) y2 <= 0` and `F = G` otherwise. Since the
//! bracket lies in `[3/4, 5/4]`, `V1` is sandwiched between
//! `3/(8 C0) ln(...) + g y2^2 / 2` and `5/(8 C0) ln(...) + G y2^2 / 2`.
//!
//! All bounds (`g`, `G`, `M`) are the ones declared by the scenario.

use crate::barrier_gain::{barrier_value, BarrierParams, DomainError, Phase};
use crate::controllers::signum;
use crate::plant::{DisturbanceModel, Segment};
use crate::scenario::Scenario;
use crate::sim::{Sample, TrajectoryLog};
use thiserror::Error;

/// `(y1, y2) = (L_b(s)^2 s, phi)`.
pub fn transform(s: f64, phi: f64, b: f64, epsilon: f64) -> Result<(f64, f64), DomainError> {
    let params = BarrierParams::new(epsilon, b).map_err(|_| DomainError {
        abs_x: s.abs(),
        epsilon,
    })?;
    let lb = barrier_value(s, &params)?;
    Ok((lb * lb * s, phi))
}

/// `sign(y2) min(|y2|, 1)`.
pub fn saturation(y2: f64) -> f64 {
    signum(y2) * y2.abs().min(1.0)
}

/// `F(y)`: `g` on `sign(y1) y2 <= 0`, `G` otherwise.
pub fn weight(y1: f64, y2: f64, g: f64, big_g: f64) -> f64 {
    if signum(y1) * y2 <= 0.0 {
        g
    } else {
        big_g
    }
}

pub fn lyapunov_v1(y1: f64, y2: f64, c0: f64, g: f64, big_g: f64) -> f64 {
    let log_term = (2.0 * c0 * y1.abs()).ln_1p() / (2.0 * c0);
    log_term * (1.0 - 0.25 * signum(y1) * saturation(y2)) + weight(y1, y2, g, big_g) * y2 * y2 / 2.0
}

/// Lower and upper sandwich bounds on [`lyapunov_v1`].
pub fn lyapunov_bounds(y1: f64, y2: f64, c0: f64, g: f64, big_g: f64) -> (f64, f64) {
    let ln = (2.0 * c0 * y1.abs()).ln_1p();
    let q = y2 * y2 / 2.0;
    (3.0 * ln / (8.0 * c0) + g * q, 5.0 * ln / (8.0 * c0) + big_g * q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityConstants {
    /// `1 / (2 b^2 eps)`.
    pub c0: f64,
    /// `M / b^2`.
    pub c_m: f64,
    /// Half-width of the strip, `4/C0 (C_M - 1/8)`.
    pub y_m: f64,
    pub v_star: f64,
    /// `y_m <= 0`: the bound `M` is too small relative to `b^2` for the strip
    /// construction; `v_star` is then evaluated with `y_m = 0`.
    pub degenerate_strip: bool,
}

pub fn stability_constants(b: f64, epsilon: f64, m: f64, g: f64, big_g: f64) -> StabilityConstants {
    let c0 = 1.0 / (2.0 * b * b * epsilon);
    let c_m = m / (b * b);
    let y_m = 4.0 / c0 * (c_m - 0.125);
    let degenerate_strip = y_m.is_nan() || y_m <= 0.0;
    let strip = if degenerate_strip { 0.0 } else { y_m };
    let v_star = 8.0 * (1.0 + big_g * big_g + 1.0 / (g * g)) * c_m * c_m
        + 5.0 * (2.0 * c0 * strip).ln_1p() / c0 * (1.0 + 1.0 / g);
    StabilityConstants {
        c0,
        c_m,
        y_m,
        v_star,
        degenerate_strip,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub t: f64,
    pub y1: f64,
    pub y2: f64,
    pub v1: f64,
    /// `|y1| <= y_M`.
    pub in_strip: bool,
    /// Selected weight, `g` or `G`.
    pub f: f64,
}

/// Evaluates the Lyapunov quantities at one barrier-phase sample.
pub fn lyapunov_sample(
    sample: &Sample,
    b: f64,
    epsilon: f64,
    constants: &StabilityConstants,
    g: f64,
    big_g: f64,
) -> Result<LyapunovSample, DomainError> {
    let (y1, y2) = transform(sample.s, sample.phi, b, epsilon)?;
    Ok(LyapunovSample {
        t: sample.t,
        y1,
        y2,
        v1: lyapunov_v1(y1, y2, constants.c0, g, big_g),
        in_strip: !constants.degenerate_strip && y1.abs() <= constants.y_m,
        f: weight(y1, y2, g, big_g),
    })
}

/// Lyapunov samples for every logged barrier-phase row.
///
/// Empty when the run never switched (or used a controller without a barrier
/// phase). Rows where `|s| >= eps` produce an error.
pub fn lyapunov_trace(log: &TrajectoryLog, scenario: &Scenario) -> Result<Vec<LyapunovSample>, DomainError> {
    let Some(b) = log.barrier_floor else {
        return Ok(Vec::new());
    };
    let bounds = scenario.bounds;
    let constants = stability_constants(b, scenario.epsilon, bounds.m, bounds.g, bounds.big_g);
    log.rows
        .iter()
        .filter(|r| r.phase == Some(Phase::Barrier))
        .map(|r| lyapunov_sample(r, b, scenario.epsilon, &constants, bounds.g, bounds.big_g))
        .collect()
}

/// Scalar summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub name: String,
    pub controller: &'static str,
    pub t_bar: Option<f64>,
    /// Max `|s|` over every integration step at or after `t_bar`.
    pub sup_s_post: Option<f64>,
    /// Max `|phi|` over logged rows in the last 20% of the horizon.
    pub sup_phi_tail: f64,
    /// Gain extremes over logged rows at or after `t_bar`.
    pub l_max: Option<f64>,
    pub l_min_barrier: Option<f64>,
    pub sat_count: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trajectory log is empty")]
    EmptyLog,
    /// `|s| <= eps/2` never happened within the horizon. Carries the metrics
    /// that could still be computed (`converged` is false).
    #[error("no switch within the horizon")]
    NoSwitch(Box<Metrics>),
}

/// Fraction of the horizon used for tail statistics.
pub const TAIL_FRACTION: f64 = 0.2;

pub fn extract_metrics(log: &TrajectoryLog, scenario: &Scenario) -> Result<Metrics, MetricsError> {
    if log.rows.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let tail_start = (1.0 - TAIL_FRACTION) * log.t_end;
    let sup_phi_tail = max_abs(log.rows.iter().filter(|r| r.t >= tail_start).map(|r| r.phi))
        .unwrap_or(0.0);

    let post: Vec<&Sample> = match log.t_bar {
        Some(tb) => log.rows.iter().filter(|r| r.t >= tb).collect(),
        None => Vec::new(),
    };
    let l_max = post.iter().map(|r| r.gain).reduce(f64::max);
    let l_min_barrier = post.iter().map(|r| r.gain).reduce(f64::min);

    let converged = match log.peak_s_post {
        Some(peak) => log.t_bar.is_some() && peak < scenario.epsilon && log.sat_count == 0,
        None => false,
    };
    let metrics = Metrics {
        name: scenario.name.clone(),
        controller: scenario.controller.kind(),
        t_bar: log.t_bar,
        sup_s_post: log.peak_s_post,
        sup_phi_tail,
        l_max,
        l_min_barrier,
        sat_count: log.sat_count,
        converged,
    };
    if log.t_bar.is_none() {
        return Err(MetricsError::NoSwitch(Box::new(metrics)));
    }
    Ok(metrics)
}

fn max_abs(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.map(f64::abs).reduce(f64::max)
}

/// Per-segment statistics of a logged run over the pieces of `model`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStats {
    pub segment: Segment,
    /// Mean gain over barrier-phase rows in the segment.
    pub mean_gain: Option<f64>,
    pub min_gain: Option<f64>,
    pub max_abs_s: Option<f64>,
}

/// Rows with `start < t <= end` (the first segment also takes `t = start`),
/// restricted to `t >= t_bar`.
pub fn segment_stats(log: &TrajectoryLog, model: &dyn DisturbanceModel) -> Vec<SegmentStats> {
    let t_bar = log.t_bar.unwrap_or(f64::INFINITY);
    model
        .segments()
        .into_iter()
        .enumerate()
        .map(|(i, seg)| {
            let rows: Vec<&Sample> = log
                .rows
                .iter()
                .filter(|r| r.t >= t_bar && in_segment(r.t, &seg, i == 0))
                .collect();
            let mean_gain = if rows.is_empty() {
                None
            } else {
                Some(rows.iter().map(|r| r.gain).sum::<f64>() / rows.len() as f64)
            };
            SegmentStats {
                segment: seg,
                mean_gain,
                min_gain: rows.iter().map(|r| r.gain).reduce(f64::min),
                max_abs_s: max_abs(rows.iter().map(|r| r.s)),
            }
        })
        .collect()
}

fn in_segment(t: f64, seg: &Segment, first: bool) -> bool {
    (t > seg.start || (first && t == seg.start)) && t <= seg.end
}
