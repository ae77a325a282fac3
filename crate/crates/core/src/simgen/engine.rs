use std::collections::BTreeSet;

use chrono::{Days, NaiveDate, NaiveTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, StandardNormal};

use super::config::ScenarioConfig;
use super::factors::{hacks_within, inject_hacks, synthesize_factors, DayActivity};
use super::SimError;
use crate::decimal::Decimal;
use crate::ingest::{bundled_hack_calendar, FactorPanelRow};
use crate::ledger::{EventKind, EventRecord};

/// A generated event log with its matching factor panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub events: Vec<EventRecord>,
    pub factors: Vec<FactorPanelRow>,
    /// Off-ledger detail of every liquidation, in log order.
    pub liquidations: Vec<LiquidationRecord>,
}

/// The borrower side of a liquidation, which the event log does not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct LiquidationRecord {
    pub date: NaiveDate,
    pub borrower: String,
    pub liquidator: String,
    pub asset: String,
    pub debt_before: Decimal,
    pub repaid: Decimal,
    pub debt_usd: f64,
    pub collateral_usd: f64,
    pub seized_usd: f64,
}

pub fn depositor_id(i: usize) -> String {
    format!("dep{i:04}")
}

pub fn borrower_id(j: usize) -> String {
    format!("bor{j:04}")
}

pub fn liquidator_id(k: usize) -> String {
    format!("liq{k:03}")
}

/// Exact decimal for a non-negative float, via its shortest round-trip text.
fn exact(x: f64) -> Decimal {
    format!("{x}").parse().expect("finite float prints as a plain decimal")
}

/// Price with about eight significant digits.
fn quantize_price(p: f64) -> Decimal {
    let magnitude = p.log10().floor() as i64;
    let places = (7 - magnitude).clamp(2, 18) as usize;
    Decimal::from_f64_rounded(p, places)
}

fn native_amount(usd: f64, price: f64) -> Decimal {
    Decimal::from_f64_rounded(usd / price, 8)
}

/// Fraction in (0, 1] with four decimals.
fn fraction(rng: &mut ChaCha8Rng) -> Decimal {
    let u: f64 = rng.gen();
    Decimal::from_f64_rounded((1.0 - u).max(1e-4), 4)
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

struct Borrower {
    collateral_asset: usize,
    collateral_qty: f64,
    /// Debt net of liquidations, per asset.
    debt: Vec<Decimal>,
}

/// Picks an actor, favouring those first active before today with
/// probability `p_repeat`.
fn pick_actor(rng: &mut ChaCha8Rng, seen_prior: &[bool], p_repeat: f64) -> usize {
    let (old, fresh): (Vec<usize>, Vec<usize>) = (0..seen_prior.len()).partition(|&i| seen_prior[i]);
    let use_old = !old.is_empty() && (fresh.is_empty() || rng.gen::<f64>() < p_repeat);
    let pool = if use_old { &old } else { &fresh };
    pool[rng.gen_range(0..pool.len())]
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    prices: Vec<Decimal>,
    prices_f: Vec<f64>,
    depositor_scale: Vec<f64>,
    supply: Vec<Vec<Decimal>>,
    deposits_total: Vec<Decimal>,
    debt_total: Vec<Decimal>,
    borrowers: Vec<Borrower>,
    dep_seen: Vec<bool>,
    bor_seen: Vec<bool>,
    stress_targets: Option<Vec<usize>>,
    today: Vec<(EventKind, usize, String, Decimal)>,
    liquidations: Vec<LiquidationRecord>,
    date: NaiveDate,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a ScenarioConfig, rng: &mut ChaCha8Rng) -> Self {
        let n_assets = cfg.assets.len();
        let size = LogNormal::new(0.0, cfg.behavior.depositor_size_sigma).expect("valid sigma");
        let depositor_scale = (0..cfg.depositor_count).map(|_| size.sample(rng)).collect();
        let borrowers = (0..cfg.borrower_count)
            .map(|_| Borrower {
                collateral_asset: rng.gen_range(0..n_assets),
                collateral_qty: 0.0,
                debt: vec![Decimal::zero(); n_assets],
            })
            .collect();
        let prices: Vec<Decimal> = cfg.assets.iter().map(|a| quantize_price(a.initial_price)).collect();
        Sim {
            cfg,
            prices_f: prices.iter().map(Decimal::to_f64).collect(),
            prices,
            depositor_scale,
            supply: vec![vec![Decimal::zero(); n_assets]; cfg.depositor_count],
            deposits_total: vec![Decimal::zero(); n_assets],
            debt_total: vec![Decimal::zero(); n_assets],
            borrowers,
            dep_seen: vec![false; cfg.depositor_count],
            bor_seen: vec![false; cfg.borrower_count],
            stress_targets: None,
            today: Vec::new(),
            liquidations: Vec::new(),
            date: cfg.start_date,
        }
    }

    fn liquidity(&self, a: usize) -> Decimal {
        &self.deposits_total[a] - &self.debt_total[a]
    }

    fn emit(&mut self, kind: EventKind, asset: usize, actor: String, amount: Decimal) {
        self.today.push((kind, asset, actor, amount));
    }

    fn debt_usd(&self, b: &Borrower) -> f64 {
        b.debt.iter().zip(&self.prices_f).map(|(d, p)| d.to_f64() * p).sum()
    }

    fn move_prices(&mut self, rng: &mut ChaCha8Rng) {
        for (i, a) in self.cfg.assets.iter().enumerate() {
            if a.volatility == 0.0 {
                continue;
            }
            let z: f64 = rng.sample(StandardNormal);
            let next = self.prices_f[i] * (a.volatility * z - 0.5 * a.volatility * a.volatility).exp();
            self.prices[i] = quantize_price(next);
            self.prices_f[i] = self.prices[i].to_f64();
        }
    }

    fn liquidate(&mut self, rng: &mut ChaCha8Rng) {
        let cfg = self.cfg;
        let b = &cfg.behavior;
        if self.cfg.liquidator_count == 0 {
            return;
        }
        let close = exact(b.close_factor).truncate(6);
        for j in 0..self.borrowers.len() {
            let debt_usd = self.debt_usd(&self.borrowers[j]);
            let borrower = &self.borrowers[j];
            let coll_price = self.prices_f[borrower.collateral_asset];
            if debt_usd <= 0.0 || debt_usd <= borrower.collateral_qty * coll_price * b.collateral_factor {
                continue;
            }
            let (asset, _) = borrower
                .debt
                .iter()
                .enumerate()
                .map(|(a, d)| (a, d.to_f64() * self.prices_f[a]))
                .fold((0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
            let repay = (&borrower.debt[asset] * &close).truncate(8);
            if !repay.is_positive() {
                continue;
            }
            let liquidator = rng.gen_range(0..self.cfg.liquidator_count);
            let collateral_usd = borrower.collateral_qty * coll_price;
            let seized_usd = (repay.to_f64() * self.prices_f[asset] * (1.0 + b.liquidation_bonus)).min(collateral_usd);
            self.liquidations.push(LiquidationRecord {
                date: self.date,
                borrower: borrower_id(j),
                liquidator: liquidator_id(liquidator),
                asset: cfg.assets[asset].symbol.clone(),
                debt_before: borrower.debt[asset].clone(),
                repaid: repay.clone(),
                debt_usd,
                collateral_usd,
                seized_usd,
            });
            let borrower = &mut self.borrowers[j];
            borrower.debt[asset] -= &repay;
            borrower.collateral_qty = (borrower.collateral_qty - seized_usd / coll_price).max(0.0);
            self.debt_total[asset] -= &repay;
            self.emit(EventKind::Liquidation, asset, liquidator_id(liquidator), repay);
        }
    }

    fn deposit(&mut self, rng: &mut ChaCha8Rng) {
        let cfg = self.cfg;
        let b = &cfg.behavior;
        if self.cfg.depositor_count == 0 {
            return;
        }
        let amount = LogNormal::new(b.deposit_median_usd.ln(), b.deposit_sigma).expect("valid deposit distribution");
        for _ in 0..poisson(rng, b.deposit_intensity * self.cfg.depositor_count as f64) {
            let i = pick_actor(rng, &self.dep_seen, b.repeat_activity_prob);
            let a = rng.gen_range(0..self.cfg.assets.len());
            let usd = self.depositor_scale[i] * amount.sample(rng);
            let amt = native_amount(usd, self.prices_f[a]);
            if !amt.is_positive() {
                continue;
            }
            self.supply[i][a] += &amt;
            self.deposits_total[a] += &amt;
            self.emit(EventKind::Deposit, a, depositor_id(i), amt);
        }
    }

    fn withdraw_share(&mut self, i: usize, a: usize, share: &Decimal) {
        let amt = (&self.supply[i][a] * share)
            .truncate(8)
            .min(self.supply[i][a].clone())
            .min(self.liquidity(a));
        if amt.is_positive() {
            self.supply[i][a] -= &amt;
            self.deposits_total[a] -= &amt;
            self.emit(EventKind::Withdraw, a, depositor_id(i), amt);
        }
    }

    fn withdraw(&mut self, rng: &mut ChaCha8Rng) {
        let cfg = self.cfg;
        let b = &cfg.behavior;
        for _ in 0..poisson(rng, b.withdraw_intensity * self.cfg.depositor_count as f64) {
            let holders: Vec<(usize, usize)> = (0..self.supply.len())
                .flat_map(|i| (0..self.cfg.assets.len()).map(move |a| (i, a)))
                .filter(|&(i, a)| self.supply[i][a].is_positive())
                .collect();
            let Some(&(i, a)) = holders.choose(rng) else {
                return;
            };
            let share = fraction(rng);
            self.withdraw_share(i, a, &share);
        }
    }

    fn stress_withdraw(&mut self, day: u32) {
        let Some(stress) = &self.cfg.stress else {
            return;
        };
        if !stress.is_active(day) {
            return;
        }
        let share = exact(stress.withdrawal_fraction_per_day).truncate(6);
        if self.stress_targets.is_none() {
            let mut by_size: Vec<(usize, f64)> = (0..self.supply.len())
                .map(|i| {
                    let usd = self.supply[i].iter().zip(&self.prices_f).map(|(s, p)| s.to_f64() * p).sum();
                    (i, usd)
                })
                .collect();
            by_size.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            self.stress_targets = Some(by_size.iter().take(stress.top_k_depositors).map(|x| x.0).collect());
        }
        let targets = self.stress_targets.clone().unwrap_or_default();
        for i in targets {
            for a in 0..self.cfg.assets.len() {
                self.withdraw_share(i, a, &share);
            }
        }
    }

    fn borrow(&mut self, rng: &mut ChaCha8Rng) {
        let cfg = self.cfg;
        let b = &cfg.behavior;
        if self.cfg.borrower_count == 0 {
            return;
        }
        let amount = LogNormal::new(b.borrow_median_usd.ln(), b.borrow_sigma).expect("valid borrow distribution");
        let n_assets = self.cfg.assets.len();
        for _ in 0..poisson(rng, b.borrow_intensity * self.cfg.borrower_count as f64) {
            let j = pick_actor(rng, &self.bor_seen, b.repeat_activity_prob);
            let coll = self.borrowers[j].collateral_asset;
            let a = if n_assets == 1 {
                0
            } else {
                (coll + rng.gen_range(1..n_assets)) % n_assets
            };
            let usd = amount.sample(rng);
            let amt = native_amount(usd, self.prices_f[a]).min(self.liquidity(a));
            if !amt.is_positive() {
                continue;
            }
            self.borrowers[j].debt[a] += &amt;
            self.debt_total[a] += &amt;
            let required = self.debt_usd(&self.borrowers[j]) / b.collateral_factor * (1.0 + b.collateral_buffer);
            let borrower = &mut self.borrowers[j];
            let coll_price = self.prices_f[coll];
            if borrower.collateral_qty * coll_price < required {
                borrower.collateral_qty = required / coll_price;
            }
            self.emit(EventKind::Borrow, a, borrower_id(j), amt);
        }
    }

    fn repay(&mut self, rng: &mut ChaCha8Rng) {
        let cfg = self.cfg;
        let b = &cfg.behavior;
        for _ in 0..poisson(rng, b.repay_intensity * self.cfg.borrower_count as f64) {
            let owing: Vec<(usize, usize)> = (0..self.borrowers.len())
                .flat_map(|j| (0..self.cfg.assets.len()).map(move |a| (j, a)))
                .filter(|&(j, a)| self.borrowers[j].debt[a].is_positive())
                .collect();
            let Some(&(j, a)) = owing.choose(rng) else {
                return;
            };
            let full = rng.gen::<f64>() < 0.25;
            let debt = self.borrowers[j].debt[a].clone();
            let amt = if full { debt } else { (&debt * &fraction(rng)).truncate(8) };
            if !amt.is_positive() {
                continue;
            }
            self.borrowers[j].debt[a] -= &amt;
            self.debt_total[a] -= &amt;
            self.emit(EventKind::Repay, a, borrower_id(j), amt);
        }
    }

    fn step(&mut self, day: u32, rng: &mut ChaCha8Rng) -> DayActivity {
        self.date = self.cfg.start_date + Days::new(day as u64);
        if day > 0 {
            self.move_prices(rng);
        }
        let stressed = self.cfg.stress.as_ref().is_some_and(|s| s.is_active(day));
        self.liquidate(rng);
        if !stressed {
            self.deposit(rng);
        }
        self.withdraw(rng);
        self.stress_withdraw(day);
        self.borrow(rng);
        if !stressed {
            self.repay(rng);
        }

        let mut activity = DayActivity {
            deposits_usd: self.deposits_total.iter().zip(&self.prices_f).map(|(d, p)| d.to_f64() * p).sum(),
            ..DayActivity::default()
        };
        let mut actors = BTreeSet::new();
        for (kind, a, actor, amt) in &self.today {
            actors.insert(actor.clone());
            if *kind == EventKind::Borrow {
                activity.loan_vol_usd += amt.to_f64() * self.prices_f[*a];
            }
        }
        activity.active_users = actors.len() as u64;
        for (kind, _, actor, _) in &self.today {
            let idx = |s: &str| s[3..].parse::<usize>().expect("generated id");
            match kind {
                EventKind::Deposit if !self.dep_seen[idx(actor)] => {
                    self.dep_seen[idx(actor)] = true;
                    activity.new_actors += 1;
                }
                EventKind::Borrow if !self.bor_seen[idx(actor)] => {
                    self.bor_seen[idx(actor)] = true;
                    activity.new_actors += 1;
                }
                _ => {}
            }
        }
        activity
    }

    fn drain_events(&mut self, date: NaiveDate) -> Vec<EventRecord> {
        let start = date.and_time(NaiveTime::MIN).and_utc();
        let n = self.today.len() as i64;
        self.today
            .drain(..)
            .enumerate()
            .map(|(k, (kind, a, actor, amount))| EventRecord {
                timestamp: start + chrono::Duration::seconds(k as i64 * 86_400 / n),
                kind,
                asset: self.cfg.assets[a].symbol.clone(),
                actor,
                amount,
                price_usd: self.prices[a].clone(),
            })
            .collect()
    }
}

/// Runs the agent simulation. Output depends only on the config, seed included.
pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sim = Sim::new(cfg, &mut rng);
    let mut events = Vec::new();
    let mut days = Vec::with_capacity(cfg.horizon_days as usize);
    for day in 0..cfg.horizon_days {
        let date = cfg.start_date + Days::new(day as u64);
        let activity = sim.step(day, &mut rng);
        events.extend(sim.drain_events(date));
        days.push((date, activity));
    }
    let mut factors = synthesize_factors(&days, &cfg.factors, &mut rng);
    if let Some(shock) = &cfg.hack_shock {
        let last = cfg.start_date + Days::new(cfg.horizon_days as u64 - 1);
        let calendar: Vec<NaiveDate> = bundled_hack_calendar().iter().map(|h| h.date).collect();
        factors = inject_hacks(&factors, &hacks_within(&calendar, cfg.start_date, last), shock)?;
    }
    Ok(Scenario {
        events,
        factors,
        liquidations: sim.liquidations,
    })
}
