//! Seeded agent-based generator for event logs and factor panels.

mod config;
mod engine;
mod factors;
mod planted;

use chrono::NaiveDate;

pub use config::{AssetConfig, BehaviorConfig, FactorConfig, ScenarioConfig, StressConfig};
pub use engine::{borrower_id, depositor_id, generate, liquidator_id, LiquidationRecord, Scenario};
pub use factors::{hacks_within, inject_hacks, HackShock};
pub use planted::{plant_effects, PlantSpec, PlantedEffect};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("scenario config: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error("hack date {date} lies outside the panel ({first} to {last})")]
    HackOutOfRange {
        date: NaiveDate,
        first: NaiveDate,
        last: NaiveDate,
    },
}
