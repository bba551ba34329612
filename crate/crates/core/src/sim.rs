//! Fixed-step closed-loop simulation.
//!
//! Every step runs, in order: gain, control, plant state, controller state.
//! The gain and control at step `k` are computed from `s(k)`; the plant is
//! then advanced by explicit Euler and the controller integrators follow
//! with the same `dt`. Time is computed as `k * dt`, never accumulated.

use crate::barrier_gain::{gain_step, GainState, Phase};
use crate::controllers::{
    classic_sta_step, proposed_sta_step, shtessel_sta_step, ShtesselState, StaState,
};
use crate::plant::{plant_derivative, DisturbanceModel};
use crate::scenario::{ControllerSpec, Scenario};
use crate::error::ParamError;
use thiserror::Error;

/// `|s|` or `|u2|` above this aborts the run.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("numerical blowup at t = {t}: s = {s}, u2 = {u2}")]
    NumericalBlowup { t: f64, s: f64, u2: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(#[from] ParamError),
}

/// The closed-loop signals at one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub s: f64,
    pub u: f64,
    pub u2: f64,
    /// `u2 + delta`.
    pub phi: f64,
    /// Gain multiplying `|s|^(1/2)`: the scheduled gain, `k1`, or `alpha`.
    pub gain: f64,
    /// Gain-schedule phase; `None` for controllers without one.
    pub phase: Option<Phase>,
    pub gamma: f64,
    pub delta: f64,
    pub delta_dot: f64,
    /// The singularity floor was engaged at this step.
    pub sat: bool,
}

/// Logged rows of one run plus the per-step facts that a strided log could
/// miss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<Sample>,
    pub dt: f64,
    pub t_end: f64,
    pub log_stride: u64,
    pub steps: u64,
    /// First time `|s| <= eps/2`. For the proposed controller this is the
    /// switch time of the gain schedule.
    pub t_bar: Option<f64>,
    /// Barrier floor `b`, proposed controller only.
    pub barrier_floor: Option<f64>,
    pub sat_count: u64,
    /// Largest `|s|` over every step at or after `t_bar`.
    pub peak_s_post: Option<f64>,
}

pub fn euler_step(s: f64, ds_dt: f64, dt: f64) -> f64 {
    s + dt * ds_dt
}

enum Loop {
    Proposed {
        gain: GainState,
        sta: StaState,
    },
    Classic(StaState),
    Shtessel(ShtesselState),
}

/// Runs `scenario` with its own disturbance preset and logs every
/// `log_stride`-th step.
pub fn simulate(scenario: &Scenario) -> Result<TrajectoryLog, SimError> {
    simulate_with(scenario, &scenario.disturbance, |_| {})
}

/// Runs `scenario` against an arbitrary disturbance model, calling
/// `observer` on every integration step (not only the logged ones).
pub fn simulate_with<F>(
    scenario: &Scenario,
    model: &dyn DisturbanceModel,
    mut observer: F,
) -> Result<TrajectoryLog, SimError>
where
    F: FnMut(&Sample),
{
    scenario.validate()?;
    let settings = scenario.integration;
    let dt = settings.dt;
    let steps = settings.steps();
    let stride = settings.stride();
    let epsilon = scenario.epsilon;
    let half_band = 0.5 * epsilon;

    let mut state = match scenario.controller {
        ControllerSpec::Proposed => Loop::Proposed {
            gain: GainState::new(),
            sta: StaState::default(),
        },
        ControllerSpec::Classic(_) => Loop::Classic(StaState::default()),
        ControllerSpec::Shtessel { alpha0, .. } => Loop::Shtessel(ShtesselState { alpha: alpha0, u2: 0.0 }),
    };

    let mut rows = Vec::with_capacity(settings.rows() as usize);
    let mut s = scenario.s0;
    let mut t_bar = None;
    let mut peak_s_post: Option<f64> = None;

    for k in 0..=steps {
        let t = k as f64 * dt;
        let gamma = model.gamma(t);
        let delta = model.delta(t);

        let (u, u2, gain, phase, sat, next) = match (&state, &scenario.controller) {
            (Loop::Proposed { gain: gs, sta }, ControllerSpec::Proposed) => {
                let reaching = scenario.reaching.as_ref().expect("validated");
                let (l, gs_next) = gain_step(*gs, t, s, reaching, epsilon);
                let (u, sta_next) = proposed_sta_step(*sta, l, s, dt);
                let sat = gs_next.sat_count() > gs.sat_count();
                if t_bar.is_none() {
                    t_bar = gs_next.t_bar();
                }
                let next = Loop::Proposed {
                    gain: gs_next,
                    sta: sta_next,
                };
                (u, sta.u2, l, Some(gs_next.phase()), sat, next)
            }
            (Loop::Classic(sta), ControllerSpec::Classic(p)) => {
                let (u, next) = classic_sta_step(*sta, p, s, dt);
                (u, sta.u2, p.k1, None, false, Loop::Classic(next))
            }
            (Loop::Shtessel(st), ControllerSpec::Shtessel { params, .. }) => {
                let (u, next) = shtessel_sta_step(*st, params, s, dt);
                (u, st.u2, next.alpha, None, false, Loop::Shtessel(next))
            }
            _ => unreachable!("loop state matches controller"),
        };
        if t_bar.is_none() && s.abs() <= half_band {
            t_bar = Some(t);
        }
        if t_bar.is_some() {
            peak_s_post = Some(peak_s_post.map_or(s.abs(), |p| p.max(s.abs())));
        }

        let sample = Sample {
            t,
            s,
            u,
            u2,
            phi: u2 + delta,
            gain,
            phase,
            gamma,
            delta,
            delta_dot: model.delta_rate(t).value,
            sat,
        };
        observer(&sample);
        if k % stride == 0 {
            rows.push(sample);
        }
        if k == steps {
            state = next;
            break;
        }

        s = euler_step(s, plant_derivative(u, t, model), dt);
        state = next;
        let u2_next = match &state {
            Loop::Proposed { sta, .. } | Loop::Classic(sta) => sta.u2,
            Loop::Shtessel(st) => st.u2,
        };
        if !(s.abs() <= BLOWUP_THRESHOLD && u2_next.abs() <= BLOWUP_THRESHOLD) {
            return Err(SimError::NumericalBlowup {
                t: (k + 1) as f64 * dt,
                s,
                u2: u2_next,
            });
        }
    }

    let (barrier_floor, sat_count) = match &state {
        Loop::Proposed { gain, .. } => (gain.b(), gain.sat_count()),
        _ => (None, 0),
    };

    Ok(TrajectoryLog {
        rows,
        dt,
        t_end: settings.t_end,
        log_stride: stride,
        steps,
        t_bar,
        barrier_floor,
        sat_count,
        peak_s_post,
    })
}
