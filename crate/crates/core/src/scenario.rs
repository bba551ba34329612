//! Scenario files: one closed-loop experiment per file.
//!
//! The format is TOML restricted to top-level keys plus one level of
//! sections. Unknown keys are rejected everywhere. The schema is documented
//! in the guide (`book/src/scenarios.md`); the bundled presets in `presets/`
//! are complete examples.

use crate::barrier_gain::ReachingParams;
use crate::controllers::{ClassicStaParams, ShtesselParams};
use crate::error::ParamError;
use crate::plant::{Bounds, DisturbanceModel, DisturbanceSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on logged rows when the stride is left to the loader.
pub const MAX_AUTO_ROWS: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{origin}: parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        origin: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{origin}: invalid scenario: {source}")]
    Invalid {
        origin: String,
        #[source]
        source: ParamError,
    },
    #[error("cannot read scenario {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogStride {
    /// Smallest stride keeping the log at or below [`MAX_AUTO_ROWS`] rows.
    Auto,
    Every(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub dt: f64,
    pub t_end: f64,
    pub log_stride: LogStride,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            t_end: 10.0 * std::f64::consts::PI,
            log_stride: LogStride::Auto,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_positive("integration.dt", self.dt)?;
        ParamError::require_positive("integration.t_end", self.t_end)?;
        if self.log_stride == LogStride::Every(0) {
            return Err(ParamError::Invalid(
                "integration.log_stride must be at least 1".into(),
            ));
        }
        if self.dt > self.t_end {
            return Err(ParamError::Invalid(format!(
                "integration.dt ({}) exceeds integration.t_end ({})",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    /// Number of Euler steps; the last logged time is `steps() * dt`.
    pub fn steps(&self) -> u64 {
        let x = self.t_end / self.dt;
        let r = x.round();
        if (x - r).abs() <= 1e-9 * r.max(1.0) {
            r as u64
        } else {
            x.floor() as u64
        }
    }

    pub fn stride(&self) -> u64 {
        match self.log_stride {
            LogStride::Every(k) => k,
            LogStride::Auto => self.steps().div_ceil(MAX_AUTO_ROWS - 1).max(1),
        }
    }

    /// Rows a full run will log: `floor(steps / stride) + 1`.
    pub fn rows(&self) -> u64 {
        self.steps() / self.stride() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerSpec {
    /// Barrier-gain super-twisting controller; gains from `Scenario::reaching`.
    Proposed,
    Classic(ClassicStaParams),
    Shtessel { params: ShtesselParams, alpha0: f64 },
}

impl ControllerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ControllerSpec::Proposed => "proposed",
            ControllerSpec::Classic(_) => "classic",
            ControllerSpec::Shtessel { .. } => "shtessel",
        }
    }
}

/// A validated closed-loop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub s0: f64,
    pub epsilon: f64,
    pub controller: ControllerSpec,
    /// Required by the proposed controller, ignored by the others.
    pub reaching: Option<ReachingParams>,
    pub disturbance: DisturbanceSpec,
    pub integration: IntegrationSettings,
    /// Ground truth handed to diagnostics.
    pub bounds: Bounds,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.name.is_empty() {
            return Err(ParamError::Invalid("name must not be empty".into()));
        }
        ParamError::require_finite("s0", self.s0)?;
        ParamError::require_positive("epsilon", self.epsilon)?;
        match &self.controller {
            ControllerSpec::Proposed => match &self.reaching {
                Some(r) => r.validate()?,
                None => {
                    return Err(ParamError::Invalid(
                        "the proposed controller needs a [reaching] section".into(),
                    ))
                }
            },
            ControllerSpec::Classic(p) => {
                ParamError::require_positive("controller.k1", p.k1)?;
                ParamError::require_positive("controller.k2", p.k2)?;
            }
            ControllerSpec::Shtessel { params, alpha0 } => {
                params.validate()?;
                ParamError::require_positive("controller.alpha0", *alpha0)?;
            }
        }
        self.disturbance.validate()?;
        self.integration.validate()?;
        self.bounds.validate()
    }

    /// Replaces the step size and/or horizon. An automatic log stride is
    /// re-derived from the new settings.
    pub fn with_overrides(mut self, dt: Option<f64>, t_end: Option<f64>) -> Result<Self, ParamError> {
        if let Some(dt) = dt {
            self.integration.dt = dt;
        }
        if let Some(t_end) = t_end {
            self.integration.t_end = t_end;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        let file = ScenarioFile::from(self);
        toml::to_string(&file).expect("scenario serializes")
    }
}

/// Parses and validates scenario text. `origin` names the source in errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        origin: origin.to_string(),
        line: e.span().map(|span| line_of(text, span.start)),
        message: e.message().to_string(),
    })?;
    file.into_scenario().map_err(|source| ScenarioError::Invalid {
        origin: origin.to_string(),
        source,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Bundled presets as `(name, file contents)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4a", include_str!("../presets/fig4a.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("classic", include_str!("../presets/classic.toml")),
    ("undisturbed", include_str!("../presets/undisturbed.toml")),
];

pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownPreset(name.to_string()))?;
    parse_scenario(text, &format!("preset {name}"))
}

/// Loads `spec` as a file when it exists, otherwise as a preset name. A
/// missing path that looks like a bare name is reported as an unknown preset.
pub fn resolve_scenario(spec: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(spec);
    if path.exists() {
        load_scenario(path)
    } else if !spec.contains(['/', '\\', '.']) {
        preset(spec)
    } else {
        Err(ScenarioError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no such file and no preset with that name",
            ),
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

// On-disk representation.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    name: String,
    s0: f64,
    epsilon: f64,
    controller: ControllerFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reaching: Option<ReachingParams>,
    disturbance: DisturbanceSpec,
    #[serde(default)]
    integration: IntegrationFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<Bounds>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ControllerFile {
    Proposed,
    Classic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k2: Option<f64>,
    },
    Shtessel {
        mu: f64,
        w1: f64,
        gamma1: f64,
        alpha_m: f64,
        nu: f64,
        /// Defaults to the scenario epsilon.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        /// Defaults to `alpha_m`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha0: Option<f64>,
    },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_stride: Option<u64>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ParamError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ParamError::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let controller = match self.controller {
            ControllerFile::Proposed => ControllerSpec::Proposed,
            ControllerFile::Classic { m, k1, k2 } => match (m, k1, k2) {
                (Some(m), None, None) => ControllerSpec::Classic(ClassicStaParams::from_bound(m)?),
                (None, Some(k1), Some(k2)) => {
                    ControllerSpec::Classic(ClassicStaParams::with_gains(k1, k2)?)
                }
                _ => {
                    return Err(ParamError::Invalid(
                        "classic controller needs either `m` or both `k1` and `k2`".into(),
                    ))
                }
            },
            ControllerFile::Shtessel {
                mu,
                w1,
                gamma1,
                alpha_m,
                nu,
                epsilon,
                alpha0,
            } => ControllerSpec::Shtessel {
                params: ShtesselParams {
                    mu,
                    w1,
                    gamma1,
                    epsilon: epsilon.unwrap_or(self.epsilon),
                    alpha_m,
                    nu,
                },
                alpha0: alpha0.unwrap_or(alpha_m),
            },
        };
        let defaults = IntegrationSettings::default();
        let integration = IntegrationSettings {
            dt: self.integration.dt.unwrap_or(defaults.dt),
            t_end: self.integration.t_end.unwrap_or(defaults.t_end),
            log_stride: self
                .integration
                .log_stride
                .map_or(LogStride::Auto, LogStride::Every),
        };
        self.disturbance.validate()?;
        let scenario = Scenario {
            name: self.name,
            s0: self.s0,
            epsilon: self.epsilon,
            controller,
            reaching: self.reaching,
            bounds: self.bounds.unwrap_or_else(|| self.disturbance.bounds()),
            disturbance: self.disturbance,
            integration,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(sc: &Scenario) -> Self {
        let controller = match sc.controller {
            ControllerSpec::Proposed => ControllerFile::Proposed,
            ControllerSpec::Classic(p) => match p.m {
                Some(m) => ControllerFile::Classic {
                    m: Some(m),
                    k1: None,
                    k2: None,
                },
                None => ControllerFile::Classic {
                    m: None,
                    k1: Some(p.k1),
                    k2: Some(p.k2),
                },
            },
            ControllerSpec::Shtessel { params, alpha0 } => ControllerFile::Shtessel {
                mu: params.mu,
                w1: params.w1,
                gamma1: params.gamma1,
                alpha_m: params.alpha_m,
                nu: params.nu,
                epsilon: Some(params.epsilon),
                alpha0: Some(alpha0),
            },
        };
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: sc.name.clone(),
            s0: sc.s0,
            epsilon: sc.epsilon,
            controller,
            reaching: sc.reaching,
            disturbance: sc.disturbance,
            integration: IntegrationFile {
                dt: Some(sc.integration.dt),
                t_end: Some(sc.integration.t_end),
                log_stride: match sc.integration.log_stride {
                    LogStride::Auto => None,
                    LogStride::Every(k) => Some(k),
                },
            },
            bounds: Some(sc.bounds),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::SineDisturbance;

    #[test]
    fn fig2a_preset() {
        let sc = preset("fig2a").unwrap();
        assert_eq!(sc.name, "fig2a");
        assert_eq!(sc.s0, 5.0);
        assert_eq!(sc.epsilon, 0.1);
        assert_eq!(sc.controller, ControllerSpec::Proposed);
        assert_eq!(sc.reaching, Some(ReachingParams { l0: 0.1, l1: 1.0 }));
        assert_eq!(sc.disturbance, DisturbanceSpec::Benchmark);
        assert_eq!(sc.integration.dt, 1e-5);
        assert_eq!(sc.integration.t_end, 10.0 * std::f64::consts::PI);
        assert_eq!(sc.bounds, Bounds { g: 2.0, big_g: 6.0, m: 150.0 });
    }

    #[test]
    fn fig2b_preset() {
        let sc = preset("fig2b").unwrap();
        let ControllerSpec::Shtessel { params, alpha0 } = sc.controller else {
            panic!("expected shtessel, got {:?}", sc.controller);
        };
        assert_eq!(params, ShtesselParams::reference(0.1));
        assert_eq!(alpha0, 0.01);
        assert_eq!(sc.epsilon, 0.1);
        assert_eq!(sc.s0, 5.0);
        assert_eq!(sc.disturbance, DisturbanceSpec::Benchmark);
    }

    #[test]
    fn figure_presets_pair_up() {
        let a = preset("fig2a").unwrap();
        let b = preset("fig2b").unwrap();
        for (name, base) in [("fig3a", &a), ("fig4a", &a), ("fig3b", &b), ("fig4b", &b)] {
            let sc = preset(name).unwrap();
            assert_eq!(sc.name, name);
            assert_eq!(Scenario { name: base.name.clone(), ..sc }, *base);
        }
    }

    #[test]
    fn every_preset_parses() {
        for (name, _) in PRESETS {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(preset("nope"), Err(ScenarioError::UnknownPreset(_))));
    }

    #[test]
    fn negative_epsilon_is_rejected() {
        let text = PRESETS[0].1.replace("epsilon = 0.1", "epsilon = -1.0");
        let err = parse_scenario(&text, "test").unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { .. }), "{err}");
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = PRESETS[0].1.replace("s0 = 5.0", "s0 = 5.0\nbogus = 1");
        let err = parse_scenario(&text, "test").unwrap_err();
        match err {
            ScenarioError::Parse { line, message, .. } => {
                assert!(line.is_some());
                assert!(message.contains("bogus") || message.contains("unknown"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let text = PRESETS[0].1.replace("l1 = 1.0", "l1 = 1.0\nl2 = 3.0");
        assert!(matches!(
            parse_scenario(&text, "test"),
            Err(ScenarioError::Parse { .. })
        ));
    }

    #[test]
    fn wrong_schema_version() {
        let text = PRESETS[0].1.replace("schema_version = 1", "schema_version = 7");
        assert!(matches!(
            parse_scenario(&text, "test"),
            Err(ScenarioError::Invalid { .. })
        ));
    }

    #[test]
    fn proposed_requires_reaching() {
        let text = "schema_version = 1\nname = \"x\"\ns0 = 1.0\nepsilon = 0.1\n\
                    [controller]\nkind = \"proposed\"\n[disturbance]\npreset = \"zero\"\n";
        let err = parse_scenario(text, "test").unwrap_err();
        assert!(err.to_string().contains("reaching"), "{err}");
    }

    #[test]
    fn classic_gain_forms() {
        let base = "schema_version = 1\nname = \"x\"\ns0 = 1.0\nepsilon = 0.1\n[disturbance]\npreset = \"zero\"\n";
        let ok = format!("{base}[controller]\nkind = \"classic\"\nk1 = 2.0\nk2 = 3.0\n");
        let sc = parse_scenario(&ok, "t").unwrap();
        assert_eq!(sc.controller, ControllerSpec::Classic(ClassicStaParams::with_gains(2.0, 3.0).unwrap()));
        let both = format!("{base}[controller]\nkind = \"classic\"\nm = 2.0\nk1 = 3.0\n");
        assert!(parse_scenario(&both, "t").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut sc = preset("classic").unwrap();
        sc.disturbance = DisturbanceSpec::Sine(SineDisturbance {
            gamma_mean: 3.0,
            gamma_amp: 1.0,
            gamma_freq: 2.0,
            delta_amp: 4.0,
            delta_freq: 0.5,
        });
        for sc in [sc, preset("fig2a").unwrap(), preset("fig2b").unwrap()] {
            let back = parse_scenario(&sc.to_toml(), "round trip").unwrap();
            assert_eq!(back, sc);
        }
    }

    #[test]
    fn stride_and_rows() {
        let s = IntegrationSettings {
            dt: 1e-5,
            t_end: 10.0 * std::f64::consts::PI,
            log_stride: LogStride::Every(100),
        };
        assert_eq!(s.steps(), 3_141_592);
        assert_eq!(s.rows(), 31_416);
        let auto = IntegrationSettings { log_stride: LogStride::Auto, ..s };
        assert!(auto.rows() <= MAX_AUTO_ROWS);
        assert_eq!(auto.stride(), 4);
        let exact = IntegrationSettings { dt: 1e-5, t_end: 1.0, log_stride: LogStride::Every(1) };
        assert_eq!(exact.steps(), 100_000);
    }

    #[test]
    fn overrides_revalidate() {
        let sc = preset("fig2a").unwrap();
        let sc2 = sc.clone().with_overrides(Some(1e-4), Some(2.0)).unwrap();
        assert_eq!(sc2.integration.dt, 1e-4);
        assert_eq!(sc2.integration.t_end, 2.0);
        assert!(sc.with_overrides(Some(-1.0), None).is_err());
    }
}
