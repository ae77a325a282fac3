use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::FactorConfig;
use super::SimError;
use crate::econometrics::dummy_hack;
use crate::ingest::FactorPanelRow;

/// End-of-day aggregates the factor synthesis feeds on.
#[derive(Debug, Clone, Default)]
pub(crate) struct DayActivity {
    pub deposits_usd: f64,
    pub loan_vol_usd: f64,
    pub active_users: u64,
    pub new_actors: u64,
}

pub(crate) fn synthesize_factors(
    days: &[(NaiveDate, DayActivity)],
    cfg: &FactorConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<FactorPanelRow> {
    let mut token = cfg.token_initial_price;
    let mut circulating = cfg.initial_circulating_supply;
    let mut holders = cfg.initial_holders;
    let mut developers = cfg.initial_developers.max(1);
    let mut rows = Vec::with_capacity(days.len());
    for (i, (date, act)) in days.iter().enumerate() {
        let mut z = || rng.sample::<f64, _>(StandardNormal);
        if i > 0 {
            let v = cfg.token_volatility;
            token *= (v * z() - 0.5 * v * v).exp();
            circulating = (circulating * (1.0 + 0.0005 + 0.0002 * z())).min(cfg.max_supply);
            let churn = (2.0 * z()).round() as i64;
            holders = (holders as i64 + act.new_actors as i64 + churn).max(0) as u64;
        }
        let tvl = act.deposits_usd * (cfg.noise * z()).exp();
        let revenue = cfg.revenue_rate * act.loan_vol_usd * (cfg.noise * z()).exp();
        if i > 0 {
            let u: f64 = rng.gen();
            if u < 0.1 {
                developers = developers.saturating_sub(1).max(1);
            } else if u > 0.9 {
                developers += 1;
            }
        }
        rows.push(FactorPanelRow {
            date: *date,
            mktc_f: Some(token * cfg.max_supply),
            mktc_c: Some(token * circulating),
            token_price_usd: Some(token),
            tvl_usd: Some(tvl),
            revenue_usd: Some(revenue),
            holder_count: Some(holders),
            active_users: Some(act.active_users),
            developers: Some(developers),
        });
    }
    rows
}

/// Proportional level shifts applied on every day inside a hack window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HackShock {
    pub revenue: f64,
    pub tvl: f64,
    pub token_price: f64,
}

/// Multiplies the shocked columns by `1 + shock` on days whose hack dummy is 1.
/// Market caps move with the token price.
pub fn inject_hacks(
    rows: &[FactorPanelRow],
    hack_dates: &[NaiveDate],
    shock: &HackShock,
) -> Result<Vec<FactorPanelRow>, SimError> {
    let (Some(first), Some(last)) = (rows.first().map(|r| r.date), rows.last().map(|r| r.date)) else {
        return Err(SimError::Invalid("cannot inject hacks into an empty panel".into()));
    };
    if let Some(h) = hack_dates.iter().find(|h| **h < first || **h > last) {
        return Err(SimError::HackOutOfRange { date: *h, first, last });
    }
    let scale = |v: Option<f64>, s: f64| v.map(|x| x * (1.0 + s));
    Ok(rows
        .iter()
        .map(|r| {
            if dummy_hack(r.date, hack_dates) == 0 {
                return r.clone();
            }
            FactorPanelRow {
                revenue_usd: scale(r.revenue_usd, shock.revenue),
                tvl_usd: scale(r.tvl_usd, shock.tvl),
                token_price_usd: scale(r.token_price_usd, shock.token_price),
                mktc_f: scale(r.mktc_f, shock.token_price),
                mktc_c: scale(r.mktc_c, shock.token_price),
                ..r.clone()
            }
        })
        .collect())
}

/// The hack dates that fall inside `[first, last]`.
pub fn hacks_within(hack_dates: &[NaiveDate], first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    hack_dates.iter().copied().filter(|h| *h >= first && *h <= last).collect()
}
