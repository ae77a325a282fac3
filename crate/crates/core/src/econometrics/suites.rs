use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::model::{Regressor, RegressionSpec, VariableRef};
use super::transform::{TransformStep, VariableTransform};
use super::{DummyKind, EconError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Protocol {
    Aave,
    Compound,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Aave => "Aave",
            Protocol::Compound => "Compound",
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Protocol::Aave => "AAVE",
            Protocol::Compound => "COMP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RiskMeasure {
    Liquidity,
    Utilization,
    RepeatDepositRatio,
    RepeatLoanRatio,
}

impl RiskMeasure {
    pub const ALL: [RiskMeasure; 4] = [
        RiskMeasure::Liquidity,
        RiskMeasure::Utilization,
        RiskMeasure::RepeatDepositRatio,
        RiskMeasure::RepeatLoanRatio,
    ];

    /// Column in the daily metrics panel.
    pub fn column(self) -> &'static str {
        match self {
            RiskMeasure::Liquidity => "liquidity_usd",
            RiskMeasure::Utilization => "utilization",
            RiskMeasure::RepeatDepositRatio => "repeat_deposit_ratio",
            RiskMeasure::RepeatLoanRatio => "repeat_loan_ratio",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RiskMeasure::Liquidity => "Liquidity",
            RiskMeasure::Utilization => "Utilization",
            RiskMeasure::RepeatDepositRatio => "Repeat deposit ratio",
            RiskMeasure::RepeatLoanRatio => "Repeat loan ratio",
        }
    }
}

/// Daily-panel columns that a separate control panel may replace.
pub const CONTROL_COLUMNS: [&str; 5] = [
    "outstanding_loan_usd",
    "outstanding_deposit_usd",
    "deposit_vol_usd",
    "loan_vol_usd",
    "liquidation_usd",
];

const DELTA_DEFAULTS: [(&str, TransformStep); 10] = [
    ("mktc_f", TransformStep::PctChange),
    ("mktc_c", TransformStep::PctChange),
    ("tvl_usd", TransformStep::PctChange),
    ("token_price_usd", TransformStep::PctChange),
    ("revenue_usd", TransformStep::PctChange),
    ("outstanding_loan_usd", TransformStep::PctChange),
    ("outstanding_deposit_usd", TransformStep::PctChange),
    ("holder_count", TransformStep::FirstDiff),
    ("active_users", TransformStep::FirstDiff),
    ("developers", TransformStep::FirstDiff),
];

/// What Δ means for each differenced variable: a return for value series,
/// a first difference for counts. Overridable per variable from TOML such as
/// `holder_count = "pct_change"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaMap(BTreeMap<String, TransformStep>);

impl Default for DeltaMap {
    fn default() -> Self {
        DeltaMap(DELTA_DEFAULTS.iter().map(|(n, s)| (n.to_string(), *s)).collect())
    }
}

impl DeltaMap {
    pub fn from_toml(text: &str) -> Result<Self, EconError> {
        let table: BTreeMap<String, String> =
            toml::from_str(text).map_err(|e| EconError::DeltaMap(e.to_string()))?;
        let mut map = DeltaMap::default();
        for (name, step) in table {
            if !map.0.contains_key(&name) {
                return Err(EconError::DeltaMap(format!("{name} is not a differenced variable")));
            }
            let step = match TransformStep::parse(&step) {
                Some(s @ (TransformStep::FirstDiff | TransformStep::PctChange)) => s,
                _ => {
                    return Err(EconError::DeltaMap(format!(
                        "{name}: expected first_diff or pct_change, got {step:?}"
                    )))
                }
            };
            map.0.insert(name, step);
        }
        Ok(map)
    }

    pub fn step(&self, name: &str) -> TransformStep {
        self.0[name]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, TransformStep)> {
        self.0.iter().map(|(n, s)| (n.as_str(), *s))
    }
}

/// Table label for a panel variable.
pub fn variable_label(name: &str, protocol: Protocol) -> String {
    match name {
        "mktc_f" => "MktC_F".into(),
        "mktc_c" => "MktC_C".into(),
        "revenue_usd" => "Revenue".into(),
        "tvl_usd" => "TVL".into(),
        "token_price_usd" => protocol.token().into(),
        "holder_count" => format!("{} holder", protocol.token()),
        "outstanding_loan_usd" => "Outstanding loan".into(),
        "outstanding_deposit_usd" => "Outstanding deposit".into(),
        "deposit_vol_usd" => "Deposit vol usd".into(),
        "loan_vol_usd" => "Loan vol usd".into(),
        "liquidation_usd" => "Liquidation usd".into(),
        "active_users" => "Active user".into(),
        "developers" => "Developer".into(),
        other => other.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suite {
    pub id: &'static str,
    pub title: &'static str,
    pub protocol: Protocol,
    /// Dummies in table order, placed between the risk measure and the controls.
    pub dummies: Vec<DummyKind>,
    /// Whether the metrics panel should come from the mainstream-asset subset.
    pub mainstream: bool,
}

pub const SUITE_IDS: [&str; 8] = ["eq10", "eq11", "eq12", "eq13", "eq14", "eq15", "eq16", "eq17"];

pub fn preset_suites() -> Vec<Suite> {
    use DummyKind::{Hack, V2, V3};
    use Protocol::{Aave, Compound};
    let s = |id, title, protocol, dummies: &[DummyKind], mainstream| Suite {
        id,
        title,
        protocol,
        dummies: dummies.to_vec(),
        mainstream,
    };
    vec![
        s("eq10", "Aave base model", Aave, &[], false),
        s("eq11", "Compound base model", Compound, &[], false),
        s("eq12", "Aave with V2 upgrade dummy", Aave, &[V2], false),
        s("eq13", "Compound with V3 upgrade dummy", Compound, &[V3], false),
        s("eq14", "Aave with hack dummy", Aave, &[Hack], false),
        s("eq15", "Compound with hack dummy", Compound, &[Hack], false),
        s("eq16", "Aave mainstream assets with V2 and hack dummies", Aave, &[V2, Hack], true),
        s("eq17", "Compound mainstream assets with V3 and hack dummies", Compound, &[V3, Hack], true),
    ]
}

pub fn find_suite(id: &str) -> Result<Suite, EconError> {
    preset_suites()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| EconError::UnknownSuite { name: id.to_string() })
}

impl Suite {
    fn var(&self, name: &str, delta: Option<&DeltaMap>) -> VariableRef {
        let label = variable_label(name, self.protocol);
        match delta {
            Some(map) => VariableRef::new(name, &format!("Δ{label}"), VariableTransform::step(map.step(name))),
            None => VariableRef::new(name, &label, VariableTransform::level()),
        }
    }

    /// The six dependent variables, in table column order.
    pub fn dependents(&self, delta: &DeltaMap) -> Vec<VariableRef> {
        let d = Some(delta);
        let revenue = match self.protocol {
            Protocol::Aave => self.var("revenue_usd", None),
            Protocol::Compound => self.var("revenue_usd", d),
        };
        vec![
            self.var("mktc_f", d),
            self.var("mktc_c", d),
            revenue,
            self.var("tvl_usd", d),
            self.var("token_price_usd", d),
            self.var("holder_count", d),
        ]
    }

    pub fn controls(&self, delta: &DeltaMap) -> Vec<VariableRef> {
        let d = Some(delta);
        match self.protocol {
            Protocol::Aave => vec![
                self.var("outstanding_loan_usd", d),
                self.var("outstanding_deposit_usd", d),
                self.var("deposit_vol_usd", None),
                self.var("loan_vol_usd", None),
                self.var("liquidation_usd", None),
                self.var("active_users", d),
                self.var("developers", d),
            ],
            Protocol::Compound => vec![
                self.var("outstanding_loan_usd", d),
                self.var("outstanding_deposit_usd", d),
                self.var("loan_vol_usd", None),
                self.var("liquidation_usd", None),
                self.var("active_users", None),
                self.var("developers", d),
            ],
        }
    }

    /// Risk measure, then dummies, then controls.
    pub fn regressors(&self, risk: RiskMeasure, delta: &DeltaMap) -> Vec<Regressor> {
        let mut out = vec![Regressor::Variable(VariableRef::new(
            risk.column(),
            risk.label(),
            VariableTransform::level(),
        ))];
        out.extend(self.dummies.iter().map(|d| Regressor::Dummy(*d)));
        out.extend(self.controls(delta).into_iter().map(Regressor::Variable));
        out
    }

    /// The 4 × 6 grid of models for this suite, grouped by risk measure.
    pub fn specs(&self, delta: &DeltaMap, standardize: bool) -> Vec<(RiskMeasure, Vec<RegressionSpec>)> {
        RiskMeasure::ALL
            .iter()
            .map(|&risk| {
                let regressors = self.regressors(risk, delta);
                let specs = self
                    .dependents(delta)
                    .into_iter()
                    .map(|dependent| RegressionSpec {
                        dependent,
                        regressors: regressors.clone(),
                        standardize,
                    })
                    .collect();
                (risk, specs)
            })
            .collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.title)
    }
}
