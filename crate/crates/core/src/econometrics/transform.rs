use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::EconError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformStep {
    /// x_t - x_{t-1}
    FirstDiff,
    /// (x_t - x_{t-1}) / x_{t-1}; missing unless x_{t-1} > 0
    PctChange,
    /// (x - mean) / sample std over the non-missing values
    ZScore,
}

impl TransformStep {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first_diff" => Some(TransformStep::FirstDiff),
            "pct_change" => Some(TransformStep::PctChange),
            "zscore" => Some(TransformStep::ZScore),
            _ => None,
        }
    }
}

/// A composition of steps applied left to right. No steps means the level.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableTransform(pub Vec<TransformStep>);

impl VariableTransform {
    pub fn level() -> Self {
        VariableTransform(Vec::new())
    }

    pub fn step(step: TransformStep) -> Self {
        VariableTransform(vec![step])
    }

    pub fn then(mut self, step: TransformStep) -> Self {
        self.0.push(step);
        self
    }

    pub fn is_level(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the first step differences the series (the label gets a Δ).
    pub fn is_delta(&self) -> bool {
        matches!(
            self.0.first(),
            Some(TransformStep::FirstDiff | TransformStep::PctChange)
        )
    }
}

impl fmt::Display for VariableTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("level");
        }
        let names: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                TransformStep::FirstDiff => "first_diff",
                TransformStep::PctChange => "pct_change",
                TransformStep::ZScore => "zscore",
            })
            .collect();
        f.write_str(&names.join("+"))
    }
}

fn lagged(values: &[Option<f64>], f: impl Fn(f64, f64) -> Option<f64>) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(values.len());
    out.extend(values.first().map(|_| None));
    out.extend(values.windows(2).map(|w| match (w[0], w[1]) {
        (Some(prev), Some(cur)) => f(prev, cur),
        _ => None,
    }));
    out
}

/// Standardizes the non-missing values with their sample mean and std.
pub fn zscore(values: &[Option<f64>], name: &str) -> Result<Vec<Option<f64>>, EconError> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return Err(EconError::ZeroVariance(name.to_string()));
    }
    let mean = present.iter().sum::<f64>() / n as f64;
    let var = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let scale = present.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(sd > 1e-12 * scale) {
        return Err(EconError::ZeroVariance(name.to_string()));
    }
    Ok(values.iter().map(|v| v.map(|x| (x - mean) / sd)).collect())
}

pub fn apply_step(values: &[Option<f64>], step: TransformStep, name: &str) -> Result<Vec<Option<f64>>, EconError> {
    Ok(match step {
        TransformStep::FirstDiff => lagged(values, |prev, cur| Some(cur - prev)),
        TransformStep::PctChange => lagged(values, |prev, cur| (prev > 0.0).then(|| (cur - prev) / prev)),
        TransformStep::ZScore => zscore(values, name)?,
    })
}

/// Applies `transform` to a dated series. Dates must be strictly increasing;
/// a lag is the previous entry, so callers pass calendar-contiguous series.
pub fn transform_series(
    dates: &[NaiveDate],
    values: &[Option<f64>],
    transform: &VariableTransform,
    name: &str,
) -> Result<Vec<Option<f64>>, EconError> {
    if dates.len() != values.len() {
        return Err(EconError::LengthMismatch {
            name: name.to_string(),
            dates: dates.len(),
            values: values.len(),
        });
    }
    if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
        return Err(EconError::NonIncreasingDates(dates[i + 1]));
    }
    let mut out = values.to_vec();
    for &step in &transform.0 {
        out = apply_step(&out, step, name)?;
    }
    Ok(out)
}
