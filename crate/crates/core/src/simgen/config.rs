use std::collections::HashSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    pub symbol: String,
    pub initial_price: f64,
    /// Standard deviation of the daily log return. Use 0 for stablecoins.
    #[serde(default)]
    pub volatility: f64,
}

/// Agent behavior. Intensities are expected actions per agent per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    pub deposit_intensity: f64,
    pub withdraw_intensity: f64,
    pub borrow_intensity: f64,
    pub repay_intensity: f64,
    /// Chance that an action is taken by an agent already active in that role
    /// on an earlier day.
    pub repeat_activity_prob: f64,
    pub deposit_median_usd: f64,
    pub deposit_sigma: f64,
    /// Log-scale dispersion of per-depositor size multipliers.
    pub depositor_size_sigma: f64,
    pub borrow_median_usd: f64,
    pub borrow_sigma: f64,
    pub collateral_factor: f64,
    /// Extra collateral posted above the minimum at issuance, as a fraction.
    pub collateral_buffer: f64,
    pub liquidation_bonus: f64,
    pub close_factor: f64,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        BehaviorConfig {
            deposit_intensity: 0.2,
            withdraw_intensity: 0.05,
            borrow_intensity: 0.2,
            repay_intensity: 0.08,
            repeat_activity_prob: 0.5,
            deposit_median_usd: 10_000.0,
            deposit_sigma: 1.0,
            depositor_size_sigma: 1.0,
            borrow_median_usd: 5_000.0,
            borrow_sigma: 1.0,
            collateral_factor: 0.75,
            collateral_buffer: 0.1,
            liquidation_bonus: 0.05,
            close_factor: 0.5,
        }
    }
}

/// Bank-run block: from `start_day` (0-based) the `top_k_depositors` largest
/// depositors try to withdraw `withdrawal_fraction_per_day` of their balance
/// each day for `duration` days. New deposits and repayments stop meanwhile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressConfig {
    pub start_day: u32,
    pub top_k_depositors: usize,
    pub withdrawal_fraction_per_day: f64,
    pub duration: u32,
}

impl StressConfig {
    pub fn is_active(&self, day: u32) -> bool {
        day >= self.start_day && day < self.start_day + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorConfig {
    /// Revenue as a share of the day's borrow volume.
    pub revenue_rate: f64,
    /// Log-scale multiplicative noise on revenue and TVL.
    pub noise: f64,
    pub token_initial_price: f64,
    pub token_volatility: f64,
    pub max_supply: f64,
    pub initial_circulating_supply: f64,
    pub initial_holders: u64,
    pub initial_developers: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            revenue_rate: 0.001,
            noise: 0.05,
            token_initial_price: 100.0,
            token_volatility: 0.04,
            max_supply: 16_000_000.0,
            initial_circulating_supply: 12_000_000.0,
            initial_holders: 1_000,
            initial_developers: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub start_date: NaiveDate,
    pub horizon_days: u32,
    pub depositor_count: usize,
    pub borrower_count: usize,
    pub liquidator_count: usize,
    pub assets: Vec<AssetConfig>,
    #[serde(default)]
    pub behavior: BehaviorConfig,
    #[serde(default)]
    pub stress: Option<StressConfig>,
    #[serde(default)]
    pub factors: FactorConfig,
    /// Level shifts applied to the factor panel around the bundled hack dates
    /// that fall inside the horizon.
    #[serde(default)]
    pub hack_shock: Option<super::HackShock>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        let b = &self.behavior;
        if self.horizon_days == 0 {
            return bad("horizon_days must be positive".into());
        }
        if self.assets.is_empty() {
            return bad("at least one asset is required".into());
        }
        let mut seen = HashSet::new();
        for a in &self.assets {
            if a.symbol.is_empty() || !seen.insert(a.symbol.as_str()) {
                return bad(format!("asset symbol {:?} is empty or repeated", a.symbol));
            }
            if !(a.initial_price.is_finite() && a.initial_price > 0.0) {
                return bad(format!("{}: initial_price must be positive", a.symbol));
            }
            if !(a.volatility.is_finite() && a.volatility >= 0.0) {
                return bad(format!("{}: volatility must be non-negative", a.symbol));
            }
        }
        let nonneg = [
            ("deposit_intensity", b.deposit_intensity),
            ("withdraw_intensity", b.withdraw_intensity),
            ("borrow_intensity", b.borrow_intensity),
            ("repay_intensity", b.repay_intensity),
            ("deposit_sigma", b.deposit_sigma),
            ("depositor_size_sigma", b.depositor_size_sigma),
            ("borrow_sigma", b.borrow_sigma),
            ("collateral_buffer", b.collateral_buffer),
            ("factors.noise", self.factors.noise),
            ("factors.revenue_rate", self.factors.revenue_rate),
            ("factors.token_volatility", self.factors.token_volatility),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a finite non-negative number"));
            }
        }
        let positive = [
            ("deposit_median_usd", b.deposit_median_usd),
            ("borrow_median_usd", b.borrow_median_usd),
            ("factors.token_initial_price", self.factors.token_initial_price),
            ("factors.max_supply", self.factors.max_supply),
            ("factors.initial_circulating_supply", self.factors.initial_circulating_supply),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&b.repeat_activity_prob) {
            return bad("repeat_activity_prob must lie in [0, 1]".into());
        }
        if !(b.collateral_factor > 0.0 && b.collateral_factor < 1.0) {
            return bad("collateral_factor must lie in (0, 1)".into());
        }
        if !(0.0..=0.5).contains(&b.liquidation_bonus) {
            return bad("liquidation_bonus must lie in [0, 0.5]".into());
        }
        if !(b.close_factor > 0.0 && b.close_factor <= 1.0) {
            return bad("close_factor must lie in (0, 1]".into());
        }
        if self.depositor_count == 0 && self.borrower_count == 0 {
            return bad("no agents configured".into());
        }
        if self.depositor_count == 0 && self.borrower_count > 0 && b.borrow_intensity > 0.0 {
            return Err(SimError::Infeasible(
                "borrowing is configured but there are no depositors to lend".into(),
            ));
        }
        if let Some(s) = &self.stress {
            if s.top_k_depositors == 0 || s.top_k_depositors > self.depositor_count {
                return bad("stress.top_k_depositors must be between 1 and depositor_count".into());
            }
            if !(0.0..=1.0).contains(&s.withdrawal_fraction_per_day) {
                return bad("stress.withdrawal_fraction_per_day must lie in [0, 1]".into());
            }
            if s.duration == 0 || s.start_day + s.duration > self.horizon_days {
                return bad("stress window must be non-empty and end within the horizon".into());
            }
        }
        Ok(())
    }
}
