//! Independent reference computations shared by the integration tests.
//!
//! The oracles never call into the ledger, metrics or OLS code under test: sums
//! are recomputed from raw events in scaled integers, regressions are solved
//! in exact rationals.
#![allow(dead_code)]

pub mod golden;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use lprisk::ledger::{EventKind, EventRecord};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Native amounts in generated logs carry at most this many decimals.
pub const AMOUNT_DP: u32 = 8;
/// Prices in generated logs carry at most this many decimals.
pub const PRICE_DP: u32 = 8;

/// Parses a plain decimal string into an integer scaled by 10^dp.
pub fn scaled(s: &str, dp: u32) -> i128 {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    assert!(frac.len() as u32 <= dp, "{s} has more than {dp} decimals");
    let mut v: i128 = int.parse().unwrap();
    for _ in 0..dp {
        v *= 10;
    }
    let frac_val: i128 = if frac.is_empty() { 0 } else { frac.parse().unwrap() };
    v += frac_val * 10i128.pow(dp - frac.len() as u32);
    if neg {
        -v
    } else {
        v
    }
}

pub fn fmt_scaled(v: i128, dp: u32) -> String {
    let p = 10i128.pow(dp);
    let sign = if v < 0 { "-" } else { "" };
    let a = v.abs();
    format!("{sign}{}.{:0width$}", a / p, a % p, width = dp as usize)
}

pub fn event(ts: DateTime<Utc>, kind: EventKind, asset: &str, actor: &str, amount: i128, price: i128) -> EventRecord {
    EventRecord {
        timestamp: ts,
        kind,
        asset: asset.to_string(),
        actor: actor.to_string(),
        amount: fmt_scaled(amount, AMOUNT_DP).parse().unwrap(),
        price_usd: fmt_scaled(price, PRICE_DP).parse().unwrap(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LogShape {
    pub events: usize,
    pub assets: usize,
    pub actors: usize,
    pub days: u32,
}

pub const AC_SHAPE: LogShape = LogShape {
    events: 1000,
    assets: 5,
    actors: 50,
    days: 30,
};

pub fn asset_name(a: usize) -> String {
    format!("TK{a}")
}

pub fn actor_name(u: usize) -> String {
    format!("0x{u:040x}")
}

/// A strictly valid random log: withdrawals, repayments and liquidations never
/// exceed what the ledger holds, and outstanding debt never goes negative.
/// Borrows may exceed pool liquidity, so negative liquidity does occur.
pub fn random_log(seed: u64, shape: LogShape) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
    let mut secs: Vec<i64> = (0..shape.events)
        .map(|_| rng.gen_range(0..shape.days as i64 * 86_400))
        .collect();
    secs.sort_unstable();
    let mut supply: HashMap<(usize, usize), i128> = HashMap::new();
    let mut demand: HashMap<(usize, usize), i128> = HashMap::new();
    let mut debt = vec![0i128; shape.assets];
    let mut price: Vec<i128> = (0..shape.assets).map(|_| rng.gen_range(1..=50_000_000)).collect();
    let mut out = Vec::with_capacity(shape.events);
    for s in secs {
        let ts = start + Duration::seconds(s);
        let a = rng.gen_range(0..shape.assets);
        let u = rng.gen_range(0..shape.actors);
        if rng.gen_bool(0.2) {
            let p = price[a] as f64 * rng.gen_range(0.8..1.25);
            price[a] = (p as i128).max(1);
        }
        let roll: f64 = rng.gen();
        let sup = *supply.get(&(a, u)).unwrap_or(&0);
        let dem = *demand.get(&(a, u)).unwrap_or(&0);
        let (kind, amount) = if roll < 0.15 && sup > 0 {
            (EventKind::Withdraw, rng.gen_range(1..=sup))
        } else if roll < 0.30 && dem > 0 && debt[a] > 0 {
            (EventKind::Repay, rng.gen_range(1..=dem.min(debt[a])))
        } else if roll < 0.38 && debt[a] > 0 {
            (EventKind::Liquidation, rng.gen_range(1..=debt[a]))
        } else if roll < 0.62 {
            (EventKind::Borrow, rng.gen_range(1..=2_000_000_000))
        } else {
            (EventKind::Deposit, rng.gen_range(1..=2_000_000_000))
        };
        match kind {
            EventKind::Deposit => *supply.entry((a, u)).or_default() += amount,
            EventKind::Withdraw => *supply.entry((a, u)).or_default() -= amount,
            EventKind::Borrow => {
                *demand.entry((a, u)).or_default() += amount;
                debt[a] += amount;
            }
            EventKind::Repay => {
                *demand.entry((a, u)).or_default() -= amount;
                debt[a] -= amount;
            }
            EventKind::Liquidation => debt[a] -= amount,
        }
        out.push(event(ts, kind, &asset_name(a), &actor_name(u), amount, price[a]));
    }
    out
}

/// Outstanding (deposit, debt) per asset after `events`, in units of 10^-AMOUNT_DP,
/// summed from scratch.
pub fn brute_outstanding(events: &[EventRecord]) -> BTreeMap<String, (i128, i128)> {
    let mut out: BTreeMap<String, (i128, i128)> = BTreeMap::new();
    for asset in events.iter().map(|e| e.asset.clone()).collect::<BTreeSet<_>>() {
        let sum = |k: EventKind| -> i128 {
            events
                .iter()
                .filter(|e| e.asset == asset && e.kind == k)
                .map(|e| scaled(&e.amount.to_string(), AMOUNT_DP))
                .sum()
        };
        let deposit = sum(EventKind::Deposit) - sum(EventKind::Withdraw);
        let debt = sum(EventKind::Borrow) - sum(EventKind::Repay) - sum(EventKind::Liquidation);
        out.insert(asset, (deposit, debt));
    }
    out
}

/// Everything the daily panel should say about one day, recomputed naively.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDay {
    pub date: NaiveDate,
    /// USD scaled by 10^(AMOUNT_DP + PRICE_DP)
    pub liquidity_usd: i128,
    pub deposit_usd: i128,
    pub debt_usd: i128,
    pub loans: OracleRole,
    pub deposits: OracleRole,
    pub liquidation_usd: i128,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleRole {
    pub actors: usize,
    pub new_actors: usize,
    pub count: usize,
    pub new_count: usize,
    pub volume: i128,
    pub new_volume: i128,
}

impl OracleRole {
    pub fn repeat_ratio(&self) -> Option<f64> {
        ratio_f64(self.volume - self.new_volume, self.volume)
    }
}

pub const USD_DP: u32 = AMOUNT_DP + PRICE_DP;

fn usd(e: &EventRecord) -> i128 {
    scaled(&e.amount.to_string(), AMOUNT_DP) * scaled(&e.price_usd.to_string(), PRICE_DP)
}

fn role_oracle(events: &[&EventRecord], kind: EventKind, date: NaiveDate, all: &[EventRecord]) -> OracleRole {
    let is_new = |actor: &str| {
        !all.iter()
            .any(|e| e.kind == kind && e.actor == actor && e.timestamp.date_naive() < date)
    };
    let mut r = OracleRole::default();
    let mut actors = BTreeSet::new();
    for e in events.iter().filter(|e| e.kind == kind) {
        actors.insert(e.actor.as_str());
        r.count += 1;
        r.volume += usd(e);
        if is_new(&e.actor) {
            r.new_count += 1;
            r.new_volume += usd(e);
        }
    }
    r.actors = actors.len();
    r.new_actors = actors.iter().filter(|a| is_new(a)).count();
    r
}

/// Day-by-day reference panel: a first-occurrence scan over the whole log for
/// every actor, from-scratch sums for every balance, last price of the day
/// carried forward.
pub fn oracle_panel(all: &[EventRecord]) -> Vec<OracleDay> {
    let first = all.first().unwrap().timestamp.date_naive();
    let last = all.last().unwrap().timestamp.date_naive();
    let mut days = Vec::new();
    for date in first.iter_days().take_while(|d| *d <= last) {
        let upto: Vec<EventRecord> = all.iter().filter(|e| e.timestamp.date_naive() <= date).cloned().collect();
        let today: Vec<&EventRecord> = all.iter().filter(|e| e.timestamp.date_naive() == date).collect();
        let balances = brute_outstanding(&upto);
        let (mut dep_usd, mut debt_usd) = (0i128, 0i128);
        for (asset, (dep, debt)) in &balances {
            let close = upto
                .iter()
                .rev()
                .find(|e| &e.asset == asset)
                .map(|e| scaled(&e.price_usd.to_string(), PRICE_DP))
                .unwrap();
            dep_usd += dep * close;
            debt_usd += debt * close;
        }
        days.push(OracleDay {
            date,
            liquidity_usd: dep_usd - debt_usd,
            deposit_usd: dep_usd,
            debt_usd,
            loans: role_oracle(&today, EventKind::Borrow, date, all),
            deposits: role_oracle(&today, EventKind::Deposit, date, all),
            liquidation_usd: today.iter().filter(|e| e.kind == EventKind::Liquidation).map(|e| usd(e)).sum(),
        });
    }
    days
}

pub fn ratio_f64(num: i128, den: i128) -> Option<f64> {
    (den != 0).then(|| {
        BigRational::new(BigInt::from(num), BigInt::from(den))
            .to_f64()
            .unwrap()
    })
}

// ----- exact OLS -----

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Solves A x = b exactly by Gauss-Jordan elimination.
pub fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for v in b[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
            for c in 0..b[r].len() {
                let sub = &factor * &b[col][c];
                b[r][c] -= sub;
            }
        }
    }
    b
}

#[derive(Debug, Clone)]
pub struct OracleOls {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
}

/// Normal-equation OLS in exact rationals; only the final square roots are
/// taken in floating point. `columns` excludes the intercept, which is added.
pub fn oracle_ols(columns: &[Vec<f64>], y: &[f64]) -> OracleOls {
    let n = y.len();
    let mut xs: Vec<Vec<BigRational>> = vec![vec![BigRational::one(); n]];
    xs.extend(columns.iter().map(|c| c.iter().map(|v| rat(*v)).collect()));
    let k = xs.len();
    let yr: Vec<BigRational> = y.iter().map(|v| rat(*v)).collect();
    let dot = |a: &[BigRational], b: &[BigRational]| a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y);
    let xtx: Vec<Vec<BigRational>> = (0..k).map(|i| (0..k).map(|j| dot(&xs[i], &xs[j])).collect()).collect();
    let mut rhs: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            let mut row = vec![dot(&xs[i], &yr)];
            row.extend((0..k).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    rhs = solve_exact(xtx, rhs);
    let beta: Vec<BigRational> = rhs.iter().map(|r| r[0].clone()).collect();
    // at the normal-equation solution e'e = y'y - b'X'y exactly
    let xty: Vec<BigRational> = xs.iter().map(|c| dot(c, &yr)).collect();
    let sse = dot(&yr, &yr) - dot(&beta, &xty);
    let mean = yr.iter().fold(BigRational::zero(), |a, v| a + v) / BigRational::from_integer(BigInt::from(n));
    let tss = yr.iter().fold(BigRational::zero(), |a, v| {
        let d = v - &mean;
        a + &d * &d
    });
    let s2 = &sse / BigRational::from_integer(BigInt::from(n - k));
    let se: Vec<f64> = (0..k).map(|j| (&s2 * &rhs[j][1 + j]).to_f64().unwrap().sqrt()).collect();
    let beta_f: Vec<f64> = beta.iter().map(|b| b.to_f64().unwrap()).collect();
    let r2_exact = BigRational::one() - &sse / &tss;
    let adj_exact = BigRational::one()
        - (BigRational::one() - &r2_exact) * BigRational::new(BigInt::from(n - 1), BigInt::from(n - k));
    OracleOls {
        t: beta_f.iter().zip(&se).map(|(b, s)| b / s).collect(),
        beta: beta_f,
        se,
        r2: r2_exact.to_f64().unwrap(),
        adj_r2: adj_exact.to_f64().unwrap(),
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

/// Mean, median, max, min and sample std by the textbook two-pass route.
pub fn two_pass(values: &[f64]) -> (f64, f64, f64, f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 { sorted[m / 2] } else { (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0 };
    let std = (m > 1).then(|| (ss / (n - 1.0)).sqrt());
    (mean, median, sorted[m - 1], sorted[0], std)
}
