use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twoport::ReactanceTuple;

/// Deviation of realized loads from their synthesized values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LoadErrorModel {
    None,
    /// Each normalized value scaled by `1 + u`, `u ~ U(−tolerance, tolerance)`,
    /// drawn independently every time the loads are set.
    Multiplicative { tolerance: f64 },
    /// Each normalized value rounded to the nearest multiple of `step`.
    Quantized { step: f64 },
}

impl LoadErrorModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LoadErrorModel::None => Ok(()),
            LoadErrorModel::Multiplicative { tolerance } if tolerance >= 0.0 && tolerance.is_finite() => Ok(()),
            LoadErrorModel::Quantized { step } if step > 0.0 && step.is_finite() => Ok(()),
            other => Err(Error::Config(format!("invalid load error model {other:?}"))),
        }
    }

    pub fn apply<R: Rng + ?Sized>(&self, loads: &ReactanceTuple, rng: &mut R) -> ReactanceTuple {
        match *self {
            LoadErrorModel::None => *loads,
            LoadErrorModel::Multiplicative { tolerance } => {
                let mut v = loads.values();
                for x in &mut v {
                    let u: f64 = rng.gen_range(-1.0..=1.0);
                    *x *= 1.0 + tolerance * u;
                }
                loads.with_values(v)
            }
            LoadErrorModel::Quantized { step } => loads.with_values(loads.values().map(|x| (x / step).round() * step)),
        }
    }
}
