//! Discrete-time update laws for the three super-twisting controllers.
//!
//! All three share the structure
//!
//! ```text
//! u    = -k1 |s|^(1/2) sign(s) + u2
//! u2' = -k2 sign(s)
//! ```
//!
//! and differ in where the gains come from: the barrier schedule for the
//! proposed controller, a known derivative bound `M` for the classical one,
//! and an adaptation law on `alpha` for the adaptive competitor. The `u2` (and
//! `alpha`) ODEs are advanced by explicit Euler with the plant step `dt`.

use crate::error::ParamError;
use serde::{Deserialize, Serialize};

/// Single-valued selection of the sign: `0` at `x = 0`.
pub fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|x|^gamma * signum(x)`; `gamma = 0` gives `signum(x)`.
pub fn signed_power(x: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return signum(x);
    }
    x.abs().powf(gamma) * signum(x)
}

fn signed_sqrt(x: f64) -> f64 {
    x.abs().sqrt() * signum(x)
}

/// Integral term of a super-twisting controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StaState {
    pub u2: f64,
}

/// Proposed variable-gain law; `gain` comes from
/// [`gain_step`](crate::barrier_gain::gain_step) at the same instant.
pub fn proposed_sta_step(st: StaState, gain: f64, s: f64, dt: f64) -> (f64, StaState) {
    let u = -gain * signed_sqrt(s) + st.u2;
    let u2 = st.u2 - gain * gain * signum(s) * dt;
    (u, StaState { u2 })
}

/// Fixed gains of the classical super-twisting controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicStaParams {
    /// Assumed bound on the disturbance derivative, when the gains were
    /// derived from one.
    pub m: Option<f64>,
    pub k1: f64,
    pub k2: f64,
}

impl ClassicStaParams {
    /// `k1 = 1.5 sqrt(M)`, `k2 = 1.1 M`.
    pub fn from_bound(m: f64) -> Result<Self, ParamError> {
        ParamError::require_positive("controller.m", m)?;
        Ok(Self {
            m: Some(m),
            k1: 1.5 * m.sqrt(),
            k2: 1.1 * m,
        })
    }

    pub fn with_gains(k1: f64, k2: f64) -> Result<Self, ParamError> {
        ParamError::require_positive("controller.k1", k1)?;
        ParamError::require_positive("controller.k2", k2)?;
        Ok(Self { m: None, k1, k2 })
    }
}

pub fn classic_sta_step(
    st: StaState,
    p: &ClassicStaParams,
    s: f64,
    dt: f64,
) -> (f64, StaState) {
    let u = -p.k1 * signed_sqrt(s) + st.u2;
    let u2 = st.u2 - p.k2 * signum(s) * dt;
    (u, StaState { u2 })
}

/// Tuning of the adaptive super-twisting competitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShtesselParams {
    pub mu: f64,
    pub w1: f64,
    pub gamma1: f64,
    pub epsilon: f64,
    pub alpha_m: f64,
    pub nu: f64,
}

impl ShtesselParams {
    /// Reference tuning with the given boundary-layer width.
    pub fn reference(epsilon: f64) -> Self {
        Self {
            mu: 1.0,
            w1: 200.0,
            gamma1: 2.0,
            epsilon,
            alpha_m: 0.01,
            nu: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_positive("controller.mu", self.mu)?;
        ParamError::require_positive("controller.w1", self.w1)?;
        ParamError::require_positive("controller.gamma1", self.gamma1)?;
        ParamError::require_positive("controller.epsilon", self.epsilon)?;
        ParamError::require_positive("controller.alpha_m", self.alpha_m)?;
        ParamError::require_positive("controller.nu", self.nu)
    }

    /// Magnitude of the `alpha` rate in the adapting branch.
    pub fn adaptation_rate(&self) -> f64 {
        self.w1 * (0.5 * self.gamma1).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShtesselState {
    pub alpha: f64,
    pub u2: f64,
}

impl ShtesselState {
    /// Starts at `alpha = alpha_m`, `u2 = 0`.
    pub fn new(p: &ShtesselParams) -> Self {
        Self {
            alpha: p.alpha_m,
            u2: 0.0,
        }
    }
}

/// One step of the adaptive competitor. `alpha` is advanced first by explicit
/// Euler and the updated value is used in the control.
///
/// The Euler update is not projected: a decreasing step that starts just above
/// `alpha_m` can land up to `adaptation_rate() * dt` below it, after which the
/// slow `nu` branch applies until `alpha` climbs back over `alpha_m`.
pub fn shtessel_sta_step(
    st: ShtesselState,
    p: &ShtesselParams,
    s: f64,
    dt: f64,
) -> (f64, ShtesselState) {
    let alpha = if st.alpha > p.alpha_m {
        st.alpha + dt * p.adaptation_rate() * signum(s.abs() - p.epsilon)
    } else {
        st.alpha + dt * p.nu
    };
    let beta = 2.0 * p.mu * alpha;
    let u = -alpha * signed_sqrt(s) + st.u2;
    let u2 = st.u2 - 0.5 * beta * signum(s) * dt;
    (u, ShtesselState { alpha, u2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn signum_examples() {
        assert_eq!(signum(-3.0), -1.0);
        assert_eq!(signum(0.0), 0.0);
        assert_eq!(signum(-0.0), 0.0);
        assert_eq!(signum(7.0), 1.0);
    }

    #[test]
    fn signed_power_examples() {
        assert_eq!(signed_power(-4.0, 0.5), -2.0);
        assert_eq!(signed_power(0.0, 0.5), 0.0);
        assert_eq!(signed_power(9.0, 0.0), 1.0);
        assert_eq!(signed_power(0.0, 0.0), 0.0);
        assert_eq!(signed_power(-8.0, 1.0), -8.0);
    }

    #[test]
    fn proposed_examples() {
        let (u, st) = proposed_sta_step(StaState { u2: 0.0 }, 1.0, 1.0, 0.01);
        assert_eq!(u, -1.0);
        assert_eq!(st.u2, -0.01);

        let (u, st) = proposed_sta_step(StaState { u2: 0.5 }, 2.0, 0.0, 0.01);
        assert_eq!(u, 0.5);
        assert_eq!(st.u2, 0.5);

        let (u, st) = proposed_sta_step(StaState { u2: 0.0 }, 2.0, -0.25, 0.1);
        assert_eq!(u, 1.0);
        assert_relative_eq!(st.u2, 0.4, max_relative = 1e-15);
    }

    #[test]
    fn classic_gains_from_bound() {
        let p = ClassicStaParams::from_bound(150.0).unwrap();
        assert_relative_eq!(p.k1, 18.3712, epsilon = 1e-4);
        assert_relative_eq!(p.k1, 1.5 * 150f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.k2, 165.0, max_relative = 1e-15);
        assert!(ClassicStaParams::from_bound(0.0).is_err());
    }

    #[test]
    fn classic_examples() {
        let p = ClassicStaParams::with_gains(1.0, 1.0).unwrap();
        let (u, st) = classic_sta_step(StaState { u2: 0.0 }, &p, 4.0, 0.5);
        assert_eq!(u, -2.0);
        assert_eq!(st.u2, -0.5);

        let p = ClassicStaParams::from_bound(42.0).unwrap();
        let (u, st) = classic_sta_step(StaState { u2: 1.0 }, &p, 0.0, 0.3);
        assert_eq!(u, 1.0);
        assert_eq!(st.u2, 1.0);
    }

    #[test]
    fn shtessel_increasing_branch() {
        let p = ShtesselParams::reference(0.1);
        let st = ShtesselState { alpha: 1.0, u2: 0.0 };
        let (_, next) = shtessel_sta_step(st, &p, 5.0, 1e-4);
        assert_relative_eq!(next.alpha, 1.02, max_relative = 1e-14);
    }

    #[test]
    fn shtessel_floor_branch() {
        let p = ShtesselParams::reference(0.1);
        let st = ShtesselState { alpha: 0.005, u2: 0.0 };
        let (_, next) = shtessel_sta_step(st, &p, 5.0, 1e-4);
        assert_relative_eq!(next.alpha, 0.005001, max_relative = 1e-14);
        // at alpha == alpha_m the floor branch applies too
        let (_, next) = shtessel_sta_step(ShtesselState::new(&p), &p, 0.0, 1e-4);
        assert_relative_eq!(next.alpha, 0.010001, max_relative = 1e-14);
    }

    #[test]
    fn shtessel_decreasing_branch() {
        let p = ShtesselParams::reference(0.1);
        let st = ShtesselState { alpha: 3.0, u2: 0.0 };
        let dt = 1e-4;
        let (_, next) = shtessel_sta_step(st, &p, 0.05, dt);
        assert_relative_eq!((st.alpha - next.alpha) / dt, 200.0, max_relative = 1e-10);
    }

    #[test]
    fn shtessel_undershoot_is_not_projected() {
        let p = ShtesselParams::reference(0.1);
        let dt = 1e-5;
        let st = ShtesselState { alpha: p.alpha_m + 1e-4, u2: 0.0 };
        let (_, next) = shtessel_sta_step(st, &p, 0.0, dt);
        assert_relative_eq!(next.alpha, p.alpha_m + 1e-4 - 200.0 * dt, max_relative = 1e-12);
        assert!(next.alpha < p.alpha_m);
        let (_, again) = shtessel_sta_step(next, &p, 5.0, dt);
        assert_relative_eq!(again.alpha, next.alpha + p.nu * dt, max_relative = 1e-14);
    }

    #[test]
    fn shtessel_control_uses_updated_alpha() {
        let p = ShtesselParams::reference(0.1);
        let st = ShtesselState { alpha: 1.0, u2: 0.25 };
        let (u, next) = shtessel_sta_step(st, &p, 4.0, 1e-3);
        assert_relative_eq!(next.alpha, 1.2, max_relative = 1e-14);
        assert_relative_eq!(u, -1.2 * 2.0 + 0.25, max_relative = 1e-14);
        // beta/2 = mu * alpha
        assert_relative_eq!(next.u2, 0.25 - 1.2 * 1e-3, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn proposed_is_odd_in_s_and_u2(
            u2 in -100.0f64..100.0,
            gain in 0.0f64..100.0,
            s in -10.0f64..10.0,
            dt in 1e-6f64..1e-2,
        ) {
            let (u, a) = proposed_sta_step(StaState { u2 }, gain, s, dt);
            let (v, b) = proposed_sta_step(StaState { u2: -u2 }, gain, -s, dt);
            prop_assert_eq!(u, -v);
            prop_assert_eq!(a.u2, -b.u2);
        }

        #[test]
        fn shtessel_alpha_floor(
            alpha0 in 0.0f64..5.0,
            samples in proptest::collection::vec(-1.0f64..1.0, 1..500),
            dt in 1e-5f64..1e-2,
        ) {
            let p = ShtesselParams::reference(0.1);
            // one decreasing Euler step can overshoot alpha_m
            let floor = alpha0.min(p.alpha_m - p.adaptation_rate() * dt);
            let mut st = ShtesselState { alpha: alpha0, u2: 0.0 };
            for s in samples {
                st = shtessel_sta_step(st, &p, s, dt).1;
                prop_assert!(st.alpha >= floor, "alpha {} below {}", st.alpha, floor);
            }
        }

        #[test]
        fn step_laws_are_deterministic(
            u2 in -10.0f64..10.0,
            s in -10.0f64..10.0,
            dt in 1e-6f64..1e-2,
        ) {
            let p = ClassicStaParams::from_bound(150.0).unwrap();
            let sp = ShtesselParams::reference(0.1);
            let st = StaState { u2 };
            prop_assert_eq!(classic_sta_step(st, &p, s, dt), classic_sta_step(st, &p, s, dt));
            prop_assert_eq!(proposed_sta_step(st, 3.0, s, dt), proposed_sta_step(st, 3.0, s, dt));
            let sh = ShtesselState { alpha: 1.0, u2 };
            prop_assert_eq!(shtessel_sta_step(sh, &sp, s, dt), shtessel_sta_step(sh, &sp, s, dt));
        }
    }
}
