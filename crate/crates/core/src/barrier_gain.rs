//! Barrier function and the two-phase variable gain schedule.
//!
//! The gain starts in a *reaching* phase where it grows affinely with time,
//! `l(t) = L1 t + L0`. The first time the output satisfies `|s| <= eps/2`
//! the schedule switches, once and for all, to the barrier gain
//!
//! ```text
//! L_b(s) = sqrt(eps) * b / sqrt(eps - |s|)
//! ```
//!
//! whose floor `b` is frozen at the switch instant.

use crate::error::ParamError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative floor applied to `eps - |s|` inside [`gain_step`].
pub const SINGULARITY_FLOOR: f64 = 1e-9;

/// Evaluation of the barrier function outside its open domain `(-eps, eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("barrier function evaluated at |x| = {abs_x} outside (-{epsilon}, {epsilon})")]
pub struct DomainError {
    pub abs_x: f64,
    pub epsilon: f64,
}

/// Width `epsilon` of the barrier interval and floor gain `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    epsilon: f64,
    b: f64,
}

impl BarrierParams {
    pub fn new(epsilon: f64, b: f64) -> Result<Self, ParamError> {
        ParamError::require_positive("epsilon", epsilon)?;
        ParamError::require_positive("b", b)?;
        Ok(Self { epsilon, b })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Initial gain `l0` and growth rate `l1` of the reaching phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachingParams {
    pub l0: f64,
    pub l1: f64,
}

impl ReachingParams {
    pub fn new(l0: f64, l1: f64) -> Result<Self, ParamError> {
        let p = Self { l0, l1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_positive("reaching.l0", self.l0)?;
        ParamError::require_positive("reaching.l1", self.l1)
    }
}

/// Barrier gain `sqrt(eps) b / sqrt(eps - |x|)`, evaluated as
/// `b sqrt(eps / (eps - |x|))` so that `x = 0` returns `b` exactly.
///
/// Returns a [`DomainError`] for `|x| >= eps` (and for NaN input); the pole is
/// never papered over with a finite number here. See [`gain_step`] for the
/// guarded variant used inside the closed loop.
pub fn barrier_value(x: f64, p: &BarrierParams) -> Result<f64, DomainError> {
    let abs_x = x.abs();
    if abs_x.is_nan() || abs_x >= p.epsilon {
        return Err(DomainError {
            abs_x,
            epsilon: p.epsilon,
        });
    }
    Ok(p.b * (p.epsilon / (p.epsilon - abs_x)).sqrt())
}

/// Barrier gain with `eps - |x|` floored at `SINGULARITY_FLOOR * eps`.
/// The flag reports whether the floor was engaged.
fn guarded_barrier_value(x: f64, epsilon: f64, b: f64) -> (f64, bool) {
    let floor = SINGULARITY_FLOOR * epsilon;
    let gap = epsilon - x.abs();
    // NaN gaps are treated as saturated too.
    let (gap, saturated) = if gap >= floor { (gap, false) } else { (floor, true) };
    (b * (epsilon / gap).sqrt(), saturated)
}

/// Reaching-phase gain `l(t) = L1 t + L0`.
pub fn reaching_gain(t: f64, p: &ReachingParams) -> f64 {
    p.l1 * t + p.l0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Reaching,
    Barrier,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Reaching => "reaching",
            Phase::Barrier => "barrier",
        }
    }
}

/// Switch record, present once the barrier phase has been entered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    /// First time with `|s| <= eps/2`.
    pub t_bar: f64,
    /// Barrier floor, immutable for the rest of the run.
    pub b: f64,
}

/// State of the gain automaton. One value belongs to exactly one run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainState {
    switch: Option<Switch>,
    sat_count: u64,
}

impl GainState {
    /// Fresh automaton in the reaching phase.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn phase(&self) -> Phase {
        if self.switch.is_some() {
            Phase::Barrier
        } else {
            Phase::Reaching
        }
    }

    pub fn switch(&self) -> Option<Switch> {
        self.switch
    }

    pub fn t_bar(&self) -> Option<f64> {
        self.switch.map(|sw| sw.t_bar)
    }

    pub fn b(&self) -> Option<f64> {
        self.switch.map(|sw| sw.b)
    }

    /// Number of steps at which the singularity floor was engaged.
    pub fn sat_count(&self) -> u64 {
        self.sat_count
    }
}

/// Advances the gain automaton by one sample and returns the gain to apply.
///
/// In the reaching phase the gain is `l(t)` as long as `|s| > eps/2`. The
/// first call with `|s| <= eps/2` records `t_bar = t` and freezes the floor at
/// `b = sqrt(2) l(t_bar)`, or `b = L0` when the crossing happens at `t = 0`
/// (the run started inside the half band). From then on the gain is the
/// barrier value of `s`, with `eps - |s|` floored at `SINGULARITY_FLOOR * eps`;
/// every engagement of that floor increments the saturation counter.
///
/// Callers must pass nondecreasing `t` within a run.
pub fn gain_step(
    state: GainState,
    t: f64,
    s: f64,
    reaching: &ReachingParams,
    epsilon: f64,
) -> (f64, GainState) {
    let mut next = state;
    let switch = match state.switch {
        Some(sw) => sw,
        None if s.abs() <= 0.5 * epsilon => {
            let b = if t == 0.0 {
                reaching.l0
            } else {
                std::f64::consts::SQRT_2 * reaching_gain(t, reaching)
            };
            let sw = Switch { t_bar: t, b };
            next.switch = Some(sw);
            sw
        }
        None => return (reaching_gain(t, reaching), next),
    };
    let (gain, saturated) = guarded_barrier_value(s, epsilon, switch.b);
    if saturated {
        next.sat_count += 1;
    }
    (gain, next)
}
