use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::Serialize;

use super::ols::{ols_fit, DesignMatrix};
use super::transform::{transform_series, zscore, VariableTransform};
use super::{DummyKind, EconError, NumericPanel};

/// A panel column with the transform applied before fitting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableRef {
    pub name: String,
    pub label: String,
    pub transform: VariableTransform,
}

impl VariableRef {
    pub fn new(name: &str, label: &str, transform: VariableTransform) -> Self {
        VariableRef {
            name: name.to_string(),
            label: label.to_string(),
            transform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Regressor {
    Variable(VariableRef),
    Dummy(DummyKind),
}

impl Regressor {
    pub fn name(&self) -> &str {
        match self {
            Regressor::Variable(v) => &v.name,
            Regressor::Dummy(d) => d.name(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Regressor::Variable(v) => &v.label,
            Regressor::Dummy(d) => d.label(),
        }
    }
}

/// One OLS model. The intercept is implicit and always estimated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegressionSpec {
    pub dependent: VariableRef,
    pub regressors: Vec<Regressor>,
    pub standardize: bool,
}

impl RegressionSpec {
    pub fn validate(&self, panel: &NumericPanel) -> Result<(), EconError> {
        let mut seen = HashSet::new();
        for r in &self.regressors {
            if !seen.insert(r.name()) {
                return Err(EconError::DuplicateRegressor(r.name().to_string()));
            }
        }
        let vars = std::iter::once(&self.dependent).chain(self.regressors.iter().filter_map(|r| match r {
            Regressor::Variable(v) => Some(v),
            Regressor::Dummy(_) => None,
        }));
        for v in vars {
            if panel.column(&v.name).is_none() {
                return Err(EconError::UnknownVariable(v.name.clone()));
            }
        }
        Ok(())
    }

    /// Number of estimated coefficients including the intercept.
    pub fn k(&self) -> usize {
        self.regressors.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermEstimate {
    pub name: String,
    pub label: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_statistic: f64,
}

/// Missing-value counts behind the listwise deletion of one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeletionAudit {
    pub rows_total: usize,
    pub rows_kept: usize,
    /// Rows where each model variable is missing after its transform.
    pub missing_by_variable: Vec<(String, usize)>,
}

impl fmt::Display for DeletionAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kept {} of {} rows", self.rows_kept, self.rows_total)?;
        let missing: Vec<String> = self
            .missing_by_variable
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|(n, c)| format!("{n} missing {c}"))
            .collect();
        if !missing.is_empty() {
            write!(f, " ({})", missing.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub dependent: VariableRef,
    pub terms: Vec<TermEstimate>,
    pub intercept: TermEstimate,
    pub n_obs: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub audit: DeletionAudit,
}

impl RegressionResult {
    pub fn term(&self, name: &str) -> Option<&TermEstimate> {
        self.terms.iter().find(|t| t.name == name)
    }
}

fn resolve(panel: &NumericPanel, v: &VariableRef) -> Result<Vec<Option<f64>>, EconError> {
    let raw = panel
        .column(&v.name)
        .ok_or_else(|| EconError::UnknownVariable(v.name.clone()))?;
    transform_series(panel.dates(), raw, &v.transform, &v.name)
}

/// Transforms, listwise-deletes, optionally z-scores and fits one model.
///
/// Standardization uses the estimation sample, so every z-scored column has
/// mean 0 and standard deviation 1 over exactly the rows that enter OLS.
pub fn run_model(
    panel: &NumericPanel,
    spec: &RegressionSpec,
    hack_dates: &[NaiveDate],
) -> Result<RegressionResult, EconError> {
    spec.validate(panel)?;
    let dates = panel.dates();
    let y = resolve(panel, &spec.dependent)?;
    let mut xs: Vec<Vec<Option<f64>>> = Vec::with_capacity(spec.regressors.len());
    for r in &spec.regressors {
        xs.push(match r {
            Regressor::Variable(v) => resolve(panel, v)?,
            Regressor::Dummy(d) => dates.iter().map(|t| Some(d.indicator(*t, hack_dates))).collect(),
        });
    }

    let count_missing = |col: &[Option<f64>]| col.iter().filter(|v| v.is_none()).count();
    let mut missing_by_variable = vec![(spec.dependent.name.clone(), count_missing(&y))];
    for (r, col) in spec.regressors.iter().zip(&xs) {
        missing_by_variable.push((r.name().to_string(), count_missing(col)));
    }
    let keep: Vec<usize> = (0..dates.len())
        .filter(|&i| y[i].is_some() && xs.iter().all(|c| c[i].is_some()))
        .collect();
    let audit = DeletionAudit {
        rows_total: dates.len(),
        rows_kept: keep.len(),
        missing_by_variable,
    };
    let k = spec.k();
    if keep.len() <= k {
        return Err(EconError::InsufficientAfterDeletion { n: keep.len(), k, audit });
    }

    let pick = |col: &[Option<f64>]| -> Vec<Option<f64>> { keep.iter().map(|&i| col[i]).collect() };
    let finish = |col: Vec<Option<f64>>| -> Vec<f64> { col.into_iter().map(|v| v.expect("kept rows are complete")).collect() };
    let mut y_kept = pick(&y);
    if spec.standardize {
        y_kept = zscore(&y_kept, &spec.dependent.name)?;
    }
    let mut design = DesignMatrix::with_intercept(keep.len());
    for (r, col) in spec.regressors.iter().zip(&xs) {
        let mut kept = pick(col);
        if spec.standardize && matches!(r, Regressor::Variable(_)) {
            kept = zscore(&kept, r.name())?;
        }
        design.push(r.name(), finish(kept));
    }
    let fit = ols_fit(&design, &finish(y_kept)).map_err(|e| match e {
        EconError::ConstantResponse => EconError::ZeroVariance(spec.dependent.name.clone()),
        other => other,
    })?;

    let term = |j: usize, label: &str| TermEstimate {
        name: fit.names[j].clone(),
        label: label.to_string(),
        coefficient: fit.coefficients[j],
        std_error: fit.std_errors[j],
        t_statistic: fit.t_stats[j],
    };
    Ok(RegressionResult {
        dependent: spec.dependent.clone(),
        intercept: term(0, "Constant"),
        terms: spec
            .regressors
            .iter()
            .enumerate()
            .map(|(j, r)| term(j + 1, r.label()))
            .collect(),
        n_obs: fit.n_obs,
        r_squared: fit.r_squared,
        adj_r_squared: fit.adj_r_squared,
        audit,
    })
}
