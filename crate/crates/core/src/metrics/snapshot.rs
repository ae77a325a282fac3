use chrono::NaiveDate;

use crate::decimal::Decimal;
use crate::ledger::PoolState;

/// End-of-day state of one asset pool.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAssetSnapshot {
    pub asset: String,
    pub date: NaiveDate,
    pub outstanding_deposit_native: Decimal,
    pub outstanding_debt_native: Decimal,
    pub close_price_usd: Decimal,
    pub liquidity_native: Decimal,
    /// Debt over deposits; `None` when nothing is deposited.
    pub utilization: Option<f64>,
}

impl DailyAssetSnapshot {
    pub fn new(
        asset: impl Into<String>,
        date: NaiveDate,
        outstanding_deposit_native: Decimal,
        outstanding_debt_native: Decimal,
        close_price_usd: Decimal,
    ) -> Self {
        let liquidity_native = &outstanding_deposit_native - &outstanding_debt_native;
        let utilization = outstanding_deposit_native
            .is_positive()
            .then(|| outstanding_debt_native.to_f64() / outstanding_deposit_native.to_f64());
        DailyAssetSnapshot {
            asset: asset.into(),
            date,
            outstanding_deposit_native,
            outstanding_debt_native,
            close_price_usd,
            liquidity_native,
            utilization,
        }
    }

    pub fn from_pool(pool: &PoolState, date: NaiveDate, close_price_usd: Decimal) -> Self {
        Self::new(
            pool.asset.clone(),
            date,
            pool.outstanding_deposit.clone(),
            pool.outstanding_debt.clone(),
            close_price_usd,
        )
    }

    pub fn deposit_usd(&self) -> Decimal {
        &self.outstanding_deposit_native * &self.close_price_usd
    }

    pub fn debt_usd(&self) -> Decimal {
        &self.outstanding_debt_native * &self.close_price_usd
    }
}

/// USD value of available liquidity across assets, exact.
pub fn protocol_liquidity_usd(snapshots: &[DailyAssetSnapshot]) -> Decimal {
    debug_assert!(distinct_assets(snapshots));
    snapshots
        .iter()
        .map(|s| &s.liquidity_native * &s.close_price_usd)
        .sum()
}

/// Value-weighted protocol utilization: USD debt over USD deposits.
/// `None` when USD deposits are zero.
pub fn protocol_utilization(snapshots: &[DailyAssetSnapshot]) -> Option<f64> {
    debug_assert!(distinct_assets(snapshots));
    let debt: Decimal = snapshots.iter().map(DailyAssetSnapshot::debt_usd).sum();
    let deposit: Decimal = snapshots.iter().map(DailyAssetSnapshot::deposit_usd).sum();
    deposit
        .is_positive()
        .then(|| debt.to_f64() / deposit.to_f64())
}

fn distinct_assets(snapshots: &[DailyAssetSnapshot]) -> bool {
    let mut seen: Vec<&str> = snapshots.iter().map(|s| s.asset.as_str()).collect();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}
