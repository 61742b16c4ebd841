//! JSON configuration loading: optional keys get documented defaults, unknown
//! keys are rejected, and the fully-resolved config is echoed back out so the
//! digest always covers explicit values.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use csmlab_core::flow::{ClosureSign, EddyVariant, ForcingSpec, Model, ModelParams};
use csmlab_core::integrate::{InitialCondition, PerturbationSpec, RunConfig};

use crate::error::{LabError, Result};

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_RECORD_EVERY: usize = 10;
pub const DEFAULT_NU: f64 = 0.1;
pub const DEFAULT_CS: f64 = 0.17;
pub const DEFAULT_S: f64 = 2.0;
pub const DEFAULT_FORCING_AMPLITUDE: f64 = 0.1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    nu: Option<f64>,
    cs: Option<f64>,
    delta: Option<f64>,
    s: Option<f64>,
    eddy_variant: Option<EddyVariant>,
    closure_sign: Option<ClosureSign>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawForcing {
    Shorthand(String),
    Spec(RawForcingSpec),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum RawForcingSpec {
    Zero,
    SteadyBandLimited {
        amplitude: Option<f64>,
        active_modes: Option<Vec<(i32, i32)>>,
    },
    ExponentiallyDecaying {
        amplitude: Option<f64>,
        active_modes: Option<Vec<(i32, i32)>>,
        decay_rate: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInitialCondition {
    Shorthand(String),
    Spec(RawInitialConditionSpec),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum RawInitialConditionSpec {
    TaylorGreen,
    BandLimitedSeeded { seed: Option<u64>, energy: Option<f64> },
    FromCheckpoint { path: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRunConfig {
    model: Option<Model>,
    n: Option<usize>,
    length: Option<f64>,
    dt: Option<f64>,
    t_end: Option<f64>,
    record_every: Option<usize>,
    params: Option<RawParams>,
    forcing: Option<RawForcing>,
    initial_condition: Option<RawInitialCondition>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    seed: Option<u64>,
    epsilon: Option<f64>,
    min_msq: Option<u32>,
    max_msq: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPairConfig {
    u: RawRunConfig,
    w: RawRunConfig,
    perturbation: Option<RawPerturbation>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairConfig {
    pub u: RunConfig,
    pub w: RunConfig,
    pub perturbation: PerturbationSpec,
}

fn resolve_forcing(raw: Option<RawForcing>) -> Result<ForcingSpec> {
    let spec = match raw {
        None => return Ok(ForcingSpec::Zero),
        Some(RawForcing::Shorthand(name)) => {
            if name == "Zero" {
                return Ok(ForcingSpec::Zero);
            }
            return Err(LabError::Validation(format!(
                "forcing: unknown shorthand `{name}` (only \"Zero\" may omit its fields)"
            )));
        }
        Some(RawForcing::Spec(spec)) => spec,
    };
    Ok(match spec {
        RawForcingSpec::Zero => ForcingSpec::Zero,
        RawForcingSpec::SteadyBandLimited { amplitude, active_modes } => ForcingSpec::SteadyBandLimited {
            amplitude: amplitude.unwrap_or(DEFAULT_FORCING_AMPLITUDE),
            active_modes: active_modes.unwrap_or_else(ForcingSpec::default_modes),
        },
        RawForcingSpec::ExponentiallyDecaying { amplitude, active_modes, decay_rate } => {
            ForcingSpec::ExponentiallyDecaying {
                amplitude: amplitude.unwrap_or(DEFAULT_FORCING_AMPLITUDE),
                active_modes: active_modes.unwrap_or_else(ForcingSpec::default_modes),
                decay_rate: decay_rate.unwrap_or(1.0),
            }
        }
    })
}

fn resolve_initial_condition(raw: Option<RawInitialCondition>) -> Result<InitialCondition> {
    let spec = match raw {
        None => return Ok(InitialCondition::TaylorGreen),
        Some(RawInitialCondition::Shorthand(name)) => {
            if name == "TaylorGreen" {
                return Ok(InitialCondition::TaylorGreen);
            }
            return Err(LabError::Validation(format!(
                "initial_condition: unknown shorthand `{name}` (only \"TaylorGreen\" may omit its fields)"
            )));
        }
        Some(RawInitialCondition::Spec(spec)) => spec,
    };
    Ok(match spec {
        RawInitialConditionSpec::TaylorGreen => InitialCondition::TaylorGreen,
        RawInitialConditionSpec::BandLimitedSeeded { seed, energy } => InitialCondition::BandLimitedSeeded {
            seed: seed.unwrap_or(7),
            energy: energy.unwrap_or(1.0),
        },
        RawInitialConditionSpec::FromCheckpoint { path } => InitialCondition::FromCheckpoint { path },
    })
}

impl RawRunConfig {
    /// Apply defaults and validate. `expected_model` comes from the
    /// subcommand; a conflicting explicit model is a validation error.
    pub fn resolve(self, expected_model: Option<Model>) -> Result<RunConfig> {
        let model = match (self.model, expected_model) {
            (Some(m), Some(e)) if m != e => {
                return Err(LabError::Validation(format!(
                    "model: config says {m:?} but the subcommand requires {e:?}"
                )));
            }
            (Some(m), _) => m,
            (None, Some(e)) => e,
            (None, None) => {
                return Err(LabError::Validation(
                    "model: missing (expected \"NSE\" or \"CSM\")".into(),
                ));
            }
        };
        let n = self.n.unwrap_or(DEFAULT_N);
        let length = self.length.unwrap_or(2.0 * std::f64::consts::PI);
        let raw_params = self.params;
        let params = {
            let defaults = ModelParams::defaults_for(n.max(1), length);
            match raw_params {
                None => ModelParams {
                    nu: DEFAULT_NU,
                    cs: DEFAULT_CS,
                    s: DEFAULT_S,
                    ..defaults
                },
                Some(p) => ModelParams {
                    nu: p.nu.unwrap_or(DEFAULT_NU),
                    cs: p.cs.unwrap_or(DEFAULT_CS),
                    delta: p.delta.unwrap_or(defaults.delta),
                    s: p.s.unwrap_or(DEFAULT_S),
                    eddy_variant: p.eddy_variant.unwrap_or(EddyVariant::GradientMagnitude),
                    closure_sign: p.closure_sign.unwrap_or(ClosureSign::Dissipative),
                },
            }
        };
        let config = RunConfig {
            model,
            n,
            length,
            dt: self.dt.unwrap_or(DEFAULT_DT),
            t_end: self.t_end.unwrap_or(DEFAULT_T_END),
            record_every: self.record_every.unwrap_or(DEFAULT_RECORD_EVERY),
            params,
            forcing: resolve_forcing(self.forcing)?,
            initial_condition: resolve_initial_condition(self.initial_condition)?,
        };
        config.validate()?;
        Ok(config)
    }
}

impl RawPairConfig {
    pub fn resolve(self) -> Result<PairConfig> {
        let u = self.u.resolve(Some(Model::Nse))?;
        let w = self.w.resolve(Some(Model::Csm))?;
        let defaults = PerturbationSpec::default();
        let perturbation = match self.perturbation {
            None => defaults,
            Some(p) => PerturbationSpec {
                seed: p.seed.unwrap_or(defaults.seed),
                epsilon: p.epsilon.unwrap_or(defaults.epsilon),
                min_msq: p.min_msq.unwrap_or(defaults.min_msq),
                max_msq: p.max_msq.unwrap_or(defaults.max_msq),
            },
        };
        perturbation.validate()?;
        Ok(PairConfig { u, w, perturbation })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| LabError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_run_config(path: &Path, expected_model: Option<Model>) -> Result<RunConfig> {
    read_json::<RawRunConfig>(path)?.resolve(expected_model)
}

pub fn load_pair_config(path: &Path) -> Result<PairConfig> {
    read_json::<RawPairConfig>(path)?.resolve()
}

/// True when the document looks like a paired config (has "u" and "w").
pub fn is_pair_document(value: &serde_json::Value) -> bool {
    value.get("u").is_some() && value.get("w").is_some()
}

/// Override every seed in a config (seeded initial conditions).
pub fn override_seed(config: &mut RunConfig, seed: u64) {
    if let InitialCondition::BandLimitedSeeded { seed: s, .. } = &mut config.initial_condition {
        *s = seed;
    }
}

/// The seed a run is driven by, for the manifest.
pub fn effective_seed(config: &RunConfig) -> u64 {
    match config.initial_condition {
        InitialCondition::BandLimitedSeeded { seed, .. } => seed,
        _ => 0,
    }
}
