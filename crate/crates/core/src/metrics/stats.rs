use super::MetricsError;

/// Summary statistics in the order the report tables print them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    /// Sample standard deviation (n - 1 denominator); `None` for a single value.
    pub std: Option<f64>,
}

/// Single-pass (Welford) mean and variance, sorted-copy median.
pub fn descriptive_stats(values: &[f64]) -> Result<Descriptive, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
        min = min.min(x);
        max = max.max(x);
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = (n > 1).then(|| (m2 / (n - 1) as f64).sqrt());
    Ok(Descriptive {
        n,
        mean,
        median,
        max,
        min,
        std,
    })
}

/// Drops missing values, then describes the rest.
pub fn describe_present(values: impl IntoIterator<Item = Option<f64>>) -> Result<Descriptive, MetricsError> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    descriptive_stats(&present)
}
