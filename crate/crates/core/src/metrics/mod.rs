//! Daily liquidity-risk measurements built from a replayed event log.

mod first_seen;
mod panel;
mod report;
mod snapshot;
mod stats;

pub use first_seen::{FirstSeenIndex, Novelty, Role};
pub use panel::{
    build_daily_panel, read_panel_csv, repeat_ratios, write_panel_csv, DailyPanelRow,
    RepeatRatios, RoleActivity, PANEL_COLUMNS,
};
pub use report::{render_stats_markdown, stats_sections, StatsSection};
pub use snapshot::{protocol_liquidity_usd, protocol_utilization, DailyAssetSnapshot};
pub use stats::{descriptive_stats, describe_present, Descriptive};

use chrono::NaiveDate;

use crate::ledger::ReplayError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no events")]
    NoEvents,
    #[error("{role} {actor} has no first-seen day on or before {date}")]
    UnknownActor {
        role: Role,
        actor: String,
        date: NaiveDate,
    },
    #[error("empty series")]
    EmptySeries,
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("daily panel: {0}")]
    PanelFormat(String),
}
