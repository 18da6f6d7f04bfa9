//! Cartesian parameter sweeps over a JSON run configuration.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::locc;
use crate::par::{self, Execution};
use crate::separability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Lin,
    Log,
}

/// One swept parameter, addressed by a dotted path into the run configuration.
///
/// Numeric path segments index arrays, so `model.m_a.0.1` is row 0, column 1 of `M_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl Axis {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidModel(format!("axis `{}` needs at least 2 points", self.path)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidModel(format!("axis `{}` needs min < max", self.path)));
        }
        if self.scale == AxisScale::Log && self.min <= 0.0 {
            return Err(Error::InvalidModel(format!("log axis `{}` needs min > 0", self.path)));
        }
        Ok(())
    }

    /// Grid values; endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.scale {
                    AxisScale::Lin => self.min + f * (self.max - self.min),
                    AxisScale::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Threshold margin of the model (non-negative: separability preserved).
    Margin,
    /// Smallest symplectic eigenvalue of the partially transposed state at `t`.
    NuTildeMinus,
    /// Logarithmic negativity at `t`.
    LogNegativity,
    /// `1` when an LOCC protocol reproducing the generator exists, `0` otherwise.
    Feasibility,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Margin => "margin",
            Observable::NuTildeMinus => "nu_tilde_minus",
            Observable::LogNegativity => "log_negativity",
            Observable::Feasibility => "feasibility",
        }
    }

    fn needs_state(self) -> bool {
        matches!(self, Observable::NuTildeMinus | Observable::LogNegativity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub outputs: Vec<Observable>,
}

/// One evaluated grid point. A failed evaluation keeps its place with `NaN` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
    pub error: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::InvalidModel("sweep needs at least one axis".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidModel("sweep needs at least one output".into()));
        }
        self.axes.iter().try_for_each(Axis::validate)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of grid point `index`; the last axis varies fastest.
    pub fn point(&self, values: &[Vec<f64>], mut index: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.axes.len()];
        for (k, vals) in values.iter().enumerate().rev() {
            coords[k] = vals[index % vals.len()];
            index /= vals.len();
        }
        coords
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["index".to_string()];
        h.extend(self.axes.iter().map(|a| a.path.clone()));
        h.extend(self.outputs.iter().map(|o| o.name().to_string()));
        h.push("error".into());
        h
    }
}

/// Writes `x` at a dotted `path` of `root`, creating missing object keys.
pub fn set_path(root: &mut Value, path: &str, x: f64) -> Result<()> {
    let bad = |why: &str| Error::InvalidModel(format!("sweep path `{path}`: {why}"));
    let num = serde_json::Number::from_f64(x).ok_or_else(|| bad("value is not finite"))?;
    let mut cur = root;
    for seg in path.split('.') {
        if seg.is_empty() {
            return Err(bad("empty segment"));
        }
        cur = match cur {
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| bad("array segment must be an index"))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| bad(&format!("index {i} out of range (len {len})")))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
            Value::Null => {
                *cur = Value::Object(Default::default());
                match cur {
                    Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Null),
                    _ => unreachable!(),
                }
            }
            _ => return Err(bad(&format!("cannot descend into a scalar at `{seg}`"))),
        };
    }
    *cur = Value::Number(num);
    Ok(())
}

/// Evaluates the requested observables for one configuration.
pub fn evaluate(cfg: &RunConfig, outputs: &[Observable]) -> Result<Vec<f64>> {
    let r = cfg.resolve()?;
    let state = if outputs.iter().any(|o| o.needs_state()) {
        let t = cfg.require_t()?;
        Some(dynamics::evolve_model(&r.model, &r.v0, t, cfg.steps.unwrap_or(1))?)
    } else {
        None
    };
    outputs
        .iter()
        .map(|o| match o {
            Observable::Margin => Ok(r.threshold().margin),
            Observable::NuTildeMinus => {
                Ok(separability::ppt_multimode(state.as_ref().expect("evolved"))?.min_sympl_eig)
            }
            Observable::LogNegativity => separability::log_negativity(state.as_ref().expect("evolved")),
            Observable::Feasibility => Ok(if locc::synthesize(&r.model, cfg.branch)?.is_feasible() {
                1.0
            } else {
                0.0
            }),
        })
        .collect()
}

/// Evaluates grid point `index` of `spec` applied to `base`.
pub fn evaluate_point(base: &Value, spec: &SweepSpec, axis_values: &[Vec<f64>], index: usize) -> SweepRow {
    let coords = spec.point(axis_values, index);
    let result = (|| {
        let mut v = base.clone();
        if let Value::Object(map) = &mut v {
            map.remove("sweep");
        }
        for (axis, &x) in spec.axes.iter().zip(&coords) {
            set_path(&mut v, &axis.path, x)?;
        }
        evaluate(&RunConfig::from_value(v)?, &spec.outputs)
    })();
    match result {
        Ok(values) => SweepRow {
            index,
            coords,
            values,
            error: None,
        },
        Err(e) => {
            log::warn!("sweep point {index}: {e}");
            SweepRow {
                index,
                coords,
                values: vec![f64::NAN; spec.outputs.len()],
                error: Some(e.to_string()),
            }
        }
    }
}

/// Evaluates the grid points in `range`, returned in index order.
pub fn run_sweep_range(base: &Value, spec: &SweepSpec, exec: Execution, range: Range<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let end = range.end.min(spec.len());
    let axis_values: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let indices: Vec<usize> = (range.start.min(end)..end).collect();
    Ok(par::map_ordered(&indices, exec, |&i| evaluate_point(base, spec, &axis_values, i)))
}

pub fn run_sweep(base: &Value, spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    run_sweep_range(base, spec, exec, 0..spec.len())
}
