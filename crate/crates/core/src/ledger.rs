//! Per-asset pool accounting: replays lending events into supply and debt
//! positions.
//!
//! Outstanding deposits are the sum of every depositor's supply. Outstanding
//! debt is the sum of every borrower's demand minus the cumulative amount
//! repaid by liquidators. Both aggregates are kept incrementally and always
//! equal the brute-force sums exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::metrics::DailyAssetSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Deposit,
    Withdraw,
    Borrow,
    Repay,
    Liquidation,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::Deposit,
        EventKind::Withdraw,
        EventKind::Borrow,
        EventKind::Repay,
        EventKind::Liquidation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Deposit => "deposit",
            EventKind::Withdraw => "withdraw",
            EventKind::Borrow => "borrow",
            EventKind::Repay => "repay",
            EventKind::Liquidation => "liquidation",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown event_kind {0:?}")]
pub struct UnknownEventKind(pub String);

impl FromStr for EventKind {
    type Err = UnknownEventKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownEventKind(s.to_string()))
    }
}

/// One dated lending action. `amount` is in native units of `asset`,
/// `price_usd` is USD per native unit at the time of the event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub timestamp: DateTime<Utc>,
    pub kind: EventKind,
    pub asset: String,
    pub actor: String,
    pub amount: Decimal,
    pub price_usd: Decimal,
}

impl EventRecord {
    /// UTC calendar day of the event.
    pub fn day(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn usd_value(&self) -> Decimal {
        &self.amount * &self.price_usd
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplayMode {
    /// Reject overdrafts, over-repayments and over-liquidation.
    Strict,
    /// Clamp at zero and record a [`Clamp`] warning.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("event for asset {found} applied to pool {expected}")]
    AssetMismatch { expected: String, found: String },
    #[error("negative amount {0}")]
    NegativeAmount(Decimal),
    #[error("{actor} withdraws {requested} but supplies only {available}")]
    Overdraft {
        actor: String,
        requested: Decimal,
        available: Decimal,
    },
    #[error("{actor} repays {requested} but owes only {outstanding}")]
    Overpayment {
        actor: String,
        requested: Decimal,
        outstanding: Decimal,
    },
    #[error("repayment of {requested} exceeds the pool's outstanding debt {outstanding}")]
    RepayExceedsDebt {
        requested: Decimal,
        outstanding: Decimal,
    },
    #[error("liquidation of {requested} exceeds outstanding debt {outstanding}")]
    LiquidationExceedsDebt {
        requested: Decimal,
        outstanding: Decimal,
    },
}

/// Lenient-mode record of an amount that was cut down to keep balances
/// non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clamp {
    pub kind: EventKind,
    pub actor: String,
    pub requested: Decimal,
    pub applied: Decimal,
}

impl fmt::Display for Clamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} by {} clamped from {} to {}",
            self.kind, self.actor, self.requested, self.applied
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    pub asset: String,
    pub supply_by_user: BTreeMap<String, Decimal>,
    pub debt_by_user: BTreeMap<String, Decimal>,
    pub liquidator_repaid_total: Decimal,
    pub outstanding_deposit: Decimal,
    pub outstanding_debt: Decimal,
}

impl PoolState {
    pub fn new(asset: impl Into<String>) -> Self {
        PoolState {
            asset: asset.into(),
            supply_by_user: BTreeMap::new(),
            debt_by_user: BTreeMap::new(),
            liquidator_repaid_total: Decimal::zero(),
            outstanding_deposit: Decimal::zero(),
            outstanding_debt: Decimal::zero(),
        }
    }

    /// Net supply of `actor`: deposits minus withdrawals to date.
    pub fn user_supply(&self, actor: &str) -> Decimal {
        self.supply_by_user.get(actor).cloned().unwrap_or_default()
    }

    /// Net demand of `actor`: borrows minus own repayments to date.
    /// Liquidator repayments are not attributed to individual borrowers.
    pub fn user_demand(&self, actor: &str) -> Decimal {
        self.debt_by_user.get(actor).cloned().unwrap_or_default()
    }

    /// Available liquidity in native units.
    pub fn liquidity(&self) -> Decimal {
        &self.outstanding_deposit - &self.outstanding_debt
    }

    /// Checks both aggregate identities against the per-user maps.
    pub fn invariants_hold(&self) -> bool {
        let supply: Decimal = self.supply_by_user.values().sum();
        let demand: Decimal = self.debt_by_user.values().sum();
        supply == self.outstanding_deposit
            && &demand - &self.liquidator_repaid_total == self.outstanding_debt
    }

    /// Applies one event in place. On error the state is left untouched.
    pub fn apply(&mut self, ev: &EventRecord, mode: ReplayMode) -> Result<Option<Clamp>, LedgerError> {
        if ev.asset != self.asset {
            return Err(LedgerError::AssetMismatch {
                expected: self.asset.clone(),
                found: ev.asset.clone(),
            });
        }
        if ev.amount.is_negative() {
            return Err(LedgerError::NegativeAmount(ev.amount.clone()));
        }
        let clamp = |applied: &Decimal| Clamp {
            kind: ev.kind,
            actor: ev.actor.clone(),
            requested: ev.amount.clone(),
            applied: applied.clone(),
        };
        match ev.kind {
            EventKind::Deposit => {
                *self.supply_by_user.entry(ev.actor.clone()).or_default() += &ev.amount;
                self.outstanding_deposit += &ev.amount;
                Ok(None)
            }
            EventKind::Withdraw => {
                let available = self.user_supply(&ev.actor);
                let applied = if ev.amount > available {
                    if mode == ReplayMode::Strict {
                        return Err(LedgerError::Overdraft {
                            actor: ev.actor.clone(),
                            requested: ev.amount.clone(),
                            available,
                        });
                    }
                    available
                } else {
                    ev.amount.clone()
                };
                *self.supply_by_user.entry(ev.actor.clone()).or_default() -= &applied;
                self.outstanding_deposit -= &applied;
                Ok((applied != ev.amount).then(|| clamp(&applied)))
            }
            EventKind::Borrow => {
                *self.debt_by_user.entry(ev.actor.clone()).or_default() += &ev.amount;
                self.outstanding_debt += &ev.amount;
                Ok(None)
            }
            EventKind::Repay => {
                let owed = self.user_demand(&ev.actor);
                // liquidator repayments are pooled, so a borrower's own demand
                // can exceed what the pool still has outstanding
                let pool_debt = self.outstanding_debt.clone().max(Decimal::zero());
                let applied = if ev.amount > owed || ev.amount > pool_debt {
                    if mode == ReplayMode::Strict {
                        return Err(if ev.amount > owed {
                            LedgerError::Overpayment {
                                actor: ev.actor.clone(),
                                requested: ev.amount.clone(),
                                outstanding: owed,
                            }
                        } else {
                            LedgerError::RepayExceedsDebt {
                                requested: ev.amount.clone(),
                                outstanding: pool_debt,
                            }
                        });
                    }
                    owed.min(pool_debt)
                } else {
                    ev.amount.clone()
                };
                *self.debt_by_user.entry(ev.actor.clone()).or_default() -= &applied;
                self.outstanding_debt -= &applied;
                Ok((applied != ev.amount).then(|| clamp(&applied)))
            }
            EventKind::Liquidation => {
                let outstanding = self.outstanding_debt.clone().max(Decimal::zero());
                let applied = if ev.amount > outstanding {
                    if mode == ReplayMode::Strict {
                        return Err(LedgerError::LiquidationExceedsDebt {
                            requested: ev.amount.clone(),
                            outstanding,
                        });
                    }
                    outstanding
                } else {
                    ev.amount.clone()
                };
                self.liquidator_repaid_total += &applied;
                self.outstanding_debt -= &applied;
                Ok((applied != ev.amount).then(|| clamp(&applied)))
            }
        }
    }
}

/// Pure form of [`PoolState::apply`].
pub fn apply_event(
    state: &PoolState,
    ev: &EventRecord,
    mode: ReplayMode,
) -> Result<(PoolState, Option<Clamp>), LedgerError> {
    let mut next = state.clone();
    let clamp = next.apply(ev, mode)?;
    Ok((next, clamp))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayErrorKind {
    #[error("timestamp {found} is earlier than the preceding {previous}")]
    OutOfOrder {
        previous: DateTime<Utc>,
        found: DateTime<Utc>,
    },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ReplayError {
    pub index: usize,
    pub line: Option<u64>,
    pub kind: ReplayErrorKind,
}

impl ReplayError {
    /// Attaches source line numbers (`lines[i]` is the line of event `i`).
    pub fn with_lines(mut self, lines: &[u64]) -> Self {
        self.line = lines.get(self.index).copied();
        self
    }
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "event {} (line {}): {}", self.index, line, self.kind),
            None => write!(f, "event {}: {}", self.index, self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayWarning {
    pub index: usize,
    pub clamp: Clamp,
}

/// Result of a full replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub pools: BTreeMap<String, PoolState>,
    /// End-of-day snapshots, one per (asset, day) with at least one event for
    /// that asset, ordered by day then asset.
    pub snapshots: Vec<DailyAssetSnapshot>,
    pub warnings: Vec<ReplayWarning>,
}

/// Incremental replay driver. Feeding a log in pieces is equivalent to
/// feeding it whole.
#[derive(Debug, Clone)]
pub struct Replayer {
    mode: ReplayMode,
    pools: BTreeMap<String, PoolState>,
    close_prices: BTreeMap<String, Decimal>,
    last_timestamp: Option<DateTime<Utc>>,
    current_day: Option<NaiveDate>,
    touched: BTreeSet<String>,
    index: usize,
    snapshots: Vec<DailyAssetSnapshot>,
    warnings: Vec<ReplayWarning>,
}

impl Replayer {
    pub fn new(mode: ReplayMode) -> Self {
        Replayer {
            mode,
            pools: BTreeMap::new(),
            close_prices: BTreeMap::new(),
            last_timestamp: None,
            current_day: None,
            touched: BTreeSet::new(),
            index: 0,
            snapshots: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, ev: &EventRecord) -> Result<(), ReplayError> {
        let index = self.index;
        let err = |kind| ReplayError {
            index,
            line: None,
            kind,
        };
        if let Some(previous) = self.last_timestamp {
            if ev.timestamp < previous {
                return Err(err(ReplayErrorKind::OutOfOrder {
                    previous,
                    found: ev.timestamp,
                }));
            }
        }
        let day = ev.day();
        if self.current_day.is_some_and(|d| d != day) {
            self.flush_day();
        }
        let pool = self
            .pools
            .entry(ev.asset.clone())
            .or_insert_with(|| PoolState::new(ev.asset.clone()));
        match pool.apply(ev, self.mode) {
            Ok(Some(clamp)) => self.warnings.push(ReplayWarning { index, clamp }),
            Ok(None) => {}
            Err(e) => return Err(err(e.into())),
        }
        self.close_prices.insert(ev.asset.clone(), ev.price_usd.clone());
        self.touched.insert(ev.asset.clone());
        self.current_day = Some(day);
        self.last_timestamp = Some(ev.timestamp);
        self.index += 1;
        Ok(())
    }

    fn flush_day(&mut self) {
        let Some(day) = self.current_day else { return };
        for asset in std::mem::take(&mut self.touched) {
            let pool = &self.pools[&asset];
            let price = self.close_prices[&asset].clone();
            self.snapshots.push(DailyAssetSnapshot::from_pool(pool, day, price));
        }
    }

    pub fn pools(&self) -> &BTreeMap<String, PoolState> {
        &self.pools
    }

    /// Last observed price of `asset` so far.
    pub fn close_price(&self, asset: &str) -> Option<&Decimal> {
        self.close_prices.get(asset)
    }

    pub fn events_applied(&self) -> usize {
        self.index
    }

    pub fn warnings(&self) -> &[ReplayWarning] {
        &self.warnings
    }

    pub fn finish(mut self) -> Replay {
        self.flush_day();
        Replay {
            pools: self.pools,
            snapshots: self.snapshots,
            warnings: self.warnings,
        }
    }
}

/// Replays a timestamp-ordered log.
pub fn replay(events: &[EventRecord], mode: ReplayMode) -> Result<Replay, ReplayError> {
    let mut replayer = Replayer::new(mode);
    for ev in events {
        replayer.push(ev)?;
    }
    Ok(replayer.finish())
}
