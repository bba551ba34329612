//! Scalar plant `ds/dt = gamma(t) (u + delta(t))` and its disturbance models.

use crate::error::ParamError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Declared bounds of a disturbance model: `g <= gamma(t) <= big_g` and
/// `|delta'(t)| <= m`. Controllers never see these; diagnostics do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub g: f64,
    pub big_g: f64,
    pub m: f64,
}

impl Bounds {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_positive("bounds.g", self.g)?;
        ParamError::require_positive("bounds.big_g", self.big_g)?;
        if self.g > self.big_g {
            return Err(ParamError::Invalid(format!(
                "bounds.g ({}) must not exceed bounds.big_g ({})",
                self.g, self.big_g
            )));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(ParamError::Invalid(format!(
                "bounds.m must be finite and non-negative, got {}",
                self.m
            )));
        }
        Ok(())
    }
}

/// `delta'(t)`, with a flag set when `t` sits exactly on a piece boundary and
/// the value is the one-sided derivative of the piece that owns `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRate {
    pub value: f64,
    pub one_sided: bool,
}

impl DeltaRate {
    fn smooth(value: f64) -> Self {
        Self {
            value,
            one_sided: false,
        }
    }
}

/// Time interval over which the disturbance derivative has a fixed bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    /// `f64::INFINITY` for the last segment.
    pub end: f64,
    pub m: f64,
}

/// Time-dependent multiplicative uncertainty and matched disturbance.
pub trait DisturbanceModel: Send + Sync {
    fn gamma(&self, t: f64) -> f64;
    fn delta(&self, t: f64) -> f64;
    /// Analytic derivative of [`delta`](Self::delta). Diagnostics only.
    fn delta_rate(&self, t: f64) -> DeltaRate;
    fn bounds(&self) -> Bounds;
    /// Pieces with constant derivative bound, in time order.
    fn segments(&self) -> Vec<Segment> {
        vec![Segment {
            start: 0.0,
            end: f64::INFINITY,
            m: self.bounds().m,
        }]
    }
}

const FIRST_BREAK: f64 = 2.0 * PI;
const SECOND_BREAK: f64 = 5.0 * PI;

/// The benchmark disturbance: `gamma = 4 + 2 sin 3t` and a three-piece
/// `delta` whose amplitude steps up at `t = 2 pi` and `t = 5 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BenchmarkDisturbance;

impl DisturbanceModel for BenchmarkDisturbance {
    fn gamma(&self, t: f64) -> f64 {
        4.0 + 2.0 * (3.0 * t).sin()
    }

    fn delta(&self, t: f64) -> f64 {
        if t <= FIRST_BREAK {
            6.0 * (5.0 * t).sin()
        } else if t <= SECOND_BREAK {
            15.0 * (3.0 * t).sin()
        } else {
            30.0 * (5.0 * t).sin()
        }
    }

    fn delta_rate(&self, t: f64) -> DeltaRate {
        let value = if t <= FIRST_BREAK {
            30.0 * (5.0 * t).cos()
        } else if t <= SECOND_BREAK {
            45.0 * (3.0 * t).cos()
        } else {
            150.0 * (5.0 * t).cos()
        };
        DeltaRate {
            value,
            one_sided: t == FIRST_BREAK || t == SECOND_BREAK,
        }
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            g: 2.0,
            big_g: 6.0,
            m: 150.0,
        }
    }

    fn segments(&self) -> Vec<Segment> {
        vec![
            Segment {
                start: 0.0,
                end: FIRST_BREAK,
                m: 30.0,
            },
            Segment {
                start: FIRST_BREAK,
                end: SECOND_BREAK,
                m: 45.0,
            },
            Segment {
                start: SECOND_BREAK,
                end: f64::INFINITY,
                m: 150.0,
            },
        ]
    }
}

/// `gamma(t) = mean + amp sin(gamma_freq t)`, `delta(t) = amp sin(freq t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineDisturbance {
    pub gamma_mean: f64,
    #[serde(default)]
    pub gamma_amp: f64,
    #[serde(default)]
    pub gamma_freq: f64,
    pub delta_amp: f64,
    pub delta_freq: f64,
}

impl SineDisturbance {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_finite("disturbance.gamma_amp", self.gamma_amp)?;
        ParamError::require_finite("disturbance.gamma_freq", self.gamma_freq)?;
        ParamError::require_finite("disturbance.delta_amp", self.delta_amp)?;
        ParamError::require_finite("disturbance.delta_freq", self.delta_freq)?;
        ParamError::require_positive(
            "disturbance.gamma_mean - |disturbance.gamma_amp|",
            self.gamma_mean - self.gamma_amp.abs(),
        )
    }
}

impl DisturbanceModel for SineDisturbance {
    fn gamma(&self, t: f64) -> f64 {
        self.gamma_mean + self.gamma_amp * (self.gamma_freq * t).sin()
    }

    fn delta(&self, t: f64) -> f64 {
        self.delta_amp * (self.delta_freq * t).sin()
    }

    fn delta_rate(&self, t: f64) -> DeltaRate {
        DeltaRate::smooth(self.delta_amp * self.delta_freq * (self.delta_freq * t).cos())
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            g: self.gamma_mean - self.gamma_amp.abs(),
            big_g: self.gamma_mean + self.gamma_amp.abs(),
            m: (self.delta_amp * self.delta_freq).abs(),
        }
    }
}

/// `gamma = 1`, `delta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroDisturbance;

impl DisturbanceModel for ZeroDisturbance {
    fn gamma(&self, _t: f64) -> f64 {
        1.0
    }

    fn delta(&self, _t: f64) -> f64 {
        0.0
    }

    fn delta_rate(&self, _t: f64) -> DeltaRate {
        DeltaRate::smooth(0.0)
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            g: 1.0,
            big_g: 1.0,
            m: 0.0,
        }
    }
}

/// Named disturbance presets selectable from a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum DisturbanceSpec {
    Benchmark,
    Zero,
    Sine(SineDisturbance),
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            DisturbanceSpec::Sine(d) => d.validate(),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DisturbanceSpec::Benchmark => "benchmark",
            DisturbanceSpec::Zero => "zero",
            DisturbanceSpec::Sine(_) => "sine",
        }
    }

    fn model(&self) -> &dyn DisturbanceModel {
        match self {
            DisturbanceSpec::Benchmark => &BenchmarkDisturbance,
            DisturbanceSpec::Zero => &ZeroDisturbance,
            DisturbanceSpec::Sine(d) => d,
        }
    }
}

impl DisturbanceModel for DisturbanceSpec {
    fn gamma(&self, t: f64) -> f64 {
        self.model().gamma(t)
    }

    fn delta(&self, t: f64) -> f64 {
        self.model().delta(t)
    }

    fn delta_rate(&self, t: f64) -> DeltaRate {
        self.model().delta_rate(t)
    }

    fn bounds(&self) -> Bounds {
        self.model().bounds()
    }

    fn segments(&self) -> Vec<Segment> {
        self.model().segments()
    }
}

/// Right-hand side of the plant: `gamma(t) (u + delta(t))`.
pub fn plant_derivative(u: f64, t: f64, model: &dyn DisturbanceModel) -> f64 {
    model.gamma(t) * (u + model.delta(t))
}
