//! Liquidity-risk analytics for pool-based lending protocols.
//!
//! The pipeline is: [`ingest`] parses event logs and factor panels,
//! [`ledger`] replays events into per-asset pools, [`metrics`] turns pool
//! states into daily risk measurements, and [`econometrics`] fits the preset
//! OLS suites. [`simgen`] produces synthetic inputs for all of the above.

pub mod cli;
pub mod decimal;
pub mod econometrics;
pub mod ingest;
pub mod ledger;
pub mod manifest;
pub mod metrics;
pub mod simgen;
