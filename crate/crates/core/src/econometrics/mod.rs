//! OLS regressions of protocol factors on liquidity-risk measures.

mod dummies;
mod model;
mod ols;
mod panel;
mod suites;
mod table;
mod transform;

use chrono::NaiveDate;

pub use dummies::{
    dummy_hack, dummy_v2, dummy_v3, DummyKind, AAVE_V2_LAUNCH, COMPOUND_V3_LAUNCH, HACK_TRAILING_DAYS,
};
pub use model::{run_model, DeletionAudit, Regressor, RegressionResult, RegressionSpec, TermEstimate, VariableRef};
pub use ols::{ols_fit, significance_stars, DesignMatrix, OlsFit, Z_01, Z_05, Z_10};
pub use panel::NumericPanel;
pub use suites::{
    find_suite, preset_suites, variable_label, DeltaMap, Protocol, RiskMeasure, Suite, CONTROL_COLUMNS, SUITE_IDS,
};
pub use table::{format_cell, run_suite, RiskPanel, SuiteReport};
pub use transform::{apply_step, transform_series, zscore, TransformStep, VariableTransform};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EconError {
    #[error("variable {0} has zero variance")]
    ZeroVariance(String),
    #[error("{name}: {dates} dates but {values} values")]
    LengthMismatch { name: String, dates: usize, values: usize },
    #[error("dates not strictly increasing at {0}")]
    NonIncreasingDates(NaiveDate),
    #[error("{n} observations is not enough for {k} coefficients")]
    InsufficientObservations { n: usize, k: usize },
    #[error("{n} observations left after listwise deletion, need more than {k}; {audit}")]
    InsufficientAfterDeletion { n: usize, k: usize, audit: DeletionAudit },
    #[error("design matrix is rank deficient at column {0}")]
    RankDeficient(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("response is constant")]
    ConstantResponse,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("duplicate regressor {0}")]
    DuplicateRegressor(String),
    #[error("column {0} appears in more than one panel")]
    DuplicateColumn(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("panel format: {0}")]
    PanelFormat(String),
    #[error("unknown suite {name}; valid suites: {}", SUITE_IDS.join(", "))]
    UnknownSuite { name: String },
    #[error("{suite} {risk} / {dependent}: {error}")]
    Fit {
        suite: String,
        risk: String,
        dependent: String,
        error: Box<EconError>,
    },
    #[error("delta map: {0}")]
    DeltaMap(String),
}
