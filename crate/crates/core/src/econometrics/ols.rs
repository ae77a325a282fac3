//! Ordinary least squares via Householder QR, with classical
//! (homoskedastic) standard errors.

use super::EconError;

/// Columns of a design matrix, intercept included by the caller.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.names.push(name.into());
        self.columns.push(column);
    }

    pub fn with_intercept(n: usize) -> Self {
        let mut d = Self::new();
        d.push("const", vec![1.0; n]);
        d
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub n_obs: usize,
    pub k: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residuals: Vec<f64>,
    pub sse: f64,
    pub tss: f64,
}

/// Relative size below which a column is treated as a combination of the
/// columns before it.
const RANK_TOL: f64 = 1e-10;

pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit, EconError> {
    let n = y.len();
    let k = x.cols();
    if k == 0 || n <= k {
        return Err(EconError::InsufficientObservations { n, k });
    }
    for (name, col) in x.names.iter().zip(&x.columns) {
        if col.len() != n {
            return Err(EconError::LengthMismatch {
                name: name.clone(),
                dates: n,
                values: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(EconError::NonFinite(name.clone()));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(EconError::NonFinite("response".into()));
    }

    // Householder QR in place: `a` ends up holding R in its upper triangle,
    // `qty` holds Q^T y.
    let mut a = x.columns.clone();
    let mut qty = y.to_vec();
    let original_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut v = vec![0.0; n];
    for j in 0..k {
        let tail = norm(&a[j][j..]);
        if !(tail > RANK_TOL * original_norms[j]) || tail == 0.0 {
            return Err(EconError::RankDeficient(x.names[j].clone()));
        }
        let alpha = if a[j][j] > 0.0 { -tail } else { tail };
        v[j..].copy_from_slice(&a[j][j..]);
        v[j] -= alpha;
        let vnorm2: f64 = v[j..].iter().map(|e| e * e).sum();
        a[j][j] = alpha;
        a[j][j + 1..].iter_mut().for_each(|e| *e = 0.0);
        for col in a.iter_mut().skip(j + 1).map(Vec::as_mut_slice).chain(std::iter::once(qty.as_mut_slice())) {
            let s: f64 = v[j..].iter().zip(&col[j..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * s / vnorm2;
            col[j..].iter_mut().zip(&v[j..]).for_each(|(c, vi)| *c -= f * vi);
        }
    }
    let r = |row: usize, col: usize| a[col][row];

    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let acc: f64 = (j + 1..k).map(|c| r(j, c) * beta[c]).sum();
        beta[j] = (qty[j] - acc) / r(j, j);
    }

    // R^{-1}, upper triangular; (X'X)^{-1} = R^{-1} R^{-T}.
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        rinv[c][c] = 1.0 / r(c, c);
        for i in (0..c).rev() {
            let acc: f64 = (i + 1..=c).map(|m| r(i, m) * rinv[m][c]).sum();
            rinv[i][c] = -acc / r(i, i);
        }
    }

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|j| x.columns[j][i] * beta[j]).sum::<f64>())
        .collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if tss == 0.0 {
        return Err(EconError::ConstantResponse);
    }
    let df = (n - k) as f64;
    let sigma2 = sse / df;
    let std_errors: Vec<f64> = (0..k)
        .map(|j| (sigma2 * rinv[j][j..].iter().map(|e| e * e).sum::<f64>()).sqrt())
        .collect();
    let t_stats = beta.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    let r_squared = 1.0 - sse / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df;
    Ok(OlsFit {
        names: x.names.clone(),
        coefficients: beta,
        std_errors,
        t_stats,
        n_obs: n,
        k,
        r_squared,
        adj_r_squared,
        residuals,
        sse,
        tss,
    })
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large USD magnitudes
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Two-sided normal critical values for 10%, 5% and 1%.
pub const Z_10: f64 = 1.6448536269514722;
pub const Z_05: f64 = 1.959963984540054;
pub const Z_01: f64 = 2.5758293035489004;

pub fn significance_stars(t: f64) -> &'static str {
    let a = t.abs();
    if a >= Z_01 {
        "***"
    } else if a >= Z_05 {
        "**"
    } else if a >= Z_10 {
        "*"
    } else {
        ""
    }
}
