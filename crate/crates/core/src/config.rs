//! Run configuration shared by the command-line tool and the sweep engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gravity::{PhysicalScenario, UnitRecord};
use crate::locc::Branch;
use crate::model::{matrix_from_rows, SystemModel};
use crate::separability::{self, ThresholdVerdict};
use crate::sweep::SweepSpec;
use crate::symplectic::CovarianceMatrix;

/// JSON run file. Exactly one of `model` and `scenario` must be present.
///
/// Times are in model units; for a scenario that is `ω·t` with `ω = omega_rad_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SystemModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PhysicalScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_rad_s: Option<f64>,
    /// Row-major initial covariance; vacuum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// A configuration turned into a validated model and initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: SystemModel,
    pub v0: CovarianceMatrix,
    /// Present when the model came from a physical scenario.
    pub units: Option<UnitRecord>,
    threshold: ThresholdVerdict,
}

impl Resolved {
    pub fn threshold(&self) -> ThresholdVerdict {
        self.threshold
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(v)?)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let (model, units, threshold) = match (&self.model, &self.scenario) {
            (Some(m), None) => {
                m.validate()?;
                (m.clone(), None, separability::threshold(m))
            }
            (None, Some(sc)) => {
                let omega = self.omega_rad_s.ok_or_else(|| {
                    Error::InvalidModel("a scenario needs omega_rad_s".into())
                })?;
                let scaled = sc.to_model(omega)?;
                let verdict = scaled.threshold();
                (scaled.model, Some(scaled.units), verdict)
            }
            _ => {
                return Err(Error::InvalidModel(
                    "config needs exactly one of `model` and `scenario`".into(),
                ))
            }
        };
        let v0 = match &self.initial_covariance {
            None => CovarianceMatrix::vacuum(model.layout),
            Some(rows) => CovarianceMatrix::new(
                model.layout,
                matrix_from_rows(rows).map_err(Error::InvalidModel)?,
            )?,
        };
        Ok(Resolved {
            model,
            v0,
            units,
            threshold,
        })
    }

    pub fn require_t(&self) -> Result<f64> {
        match self.t {
            Some(t) if t.is_finite() && t >= 0.0 => Ok(t),
            Some(t) => Err(Error::InvalidModel(format!("t must be non-negative, got {t}"))),
            None => Err(Error::InvalidModel("evolution time `t` is required".into())),
        }
    }
}
