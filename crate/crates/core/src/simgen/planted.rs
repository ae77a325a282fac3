use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SimError;
use crate::econometrics::{dummy_hack, zscore, NumericPanel, TransformStep, VariableTransform};

/// A dependent column to rewrite so that, after `transform`, it equals
/// `risk_beta * z(risk) + hack_beta * hack + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedEffect {
    pub column: String,
    pub transform: VariableTransform,
    pub risk_beta: f64,
    pub hack_beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    pub risk_column: String,
    pub effects: Vec<PlantedEffect>,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Scale of planted returns for percent-change columns, keeping levels positive.
const RETURN_SCALE: f64 = 0.01;

/// Rebuilds each effect's column from a planted linear model. Days where the
/// risk measure is missing carry noise only.
pub fn plant_effects(
    panel: &NumericPanel,
    spec: &PlantSpec,
    hack_dates: &[NaiveDate],
) -> Result<NumericPanel, SimError> {
    let risk = panel
        .column(&spec.risk_column)
        .ok_or_else(|| SimError::Invalid(format!("unknown risk column {}", spec.risk_column)))?;
    let z = zscore(risk, &spec.risk_column).map_err(|e| SimError::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = panel.clone();
    for effect in &spec.effects {
        let target: Vec<f64> = panel
            .dates()
            .iter()
            .zip(&z)
            .map(|(d, zr)| {
                let noise: f64 = rng.sample(StandardNormal);
                effect.risk_beta * zr.unwrap_or(0.0)
                    + effect.hack_beta * f64::from(dummy_hack(*d, hack_dates))
                    + spec.noise_sd * noise
            })
            .collect();
        let level: Vec<f64> = match effect.transform.0.as_slice() {
            [] => target.iter().map(|t| 100.0 + t).collect(),
            [TransformStep::FirstDiff] => target
                .iter()
                .scan(10_000.0, |x, t| {
                    *x += t;
                    Some(*x)
                })
                .collect(),
            [TransformStep::PctChange] => target
                .iter()
                .scan(1_000.0, |x, t| {
                    *x *= 1.0 + RETURN_SCALE * t;
                    Some(*x)
                })
                .collect(),
            other => {
                return Err(SimError::Invalid(format!(
                    "cannot plant through transform {}",
                    VariableTransform(other.to_vec())
                )))
            }
        };
        out.set_column(effect.column.clone(), level.into_iter().map(Some).collect());
    }
    Ok(out)
}
