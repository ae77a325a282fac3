use std::collections::HashMap;
use std::fmt;

use chrono::NaiveDate;

use super::MetricsError;
use crate::ledger::{EventKind, EventRecord};

/// Role an actor plays; each role has its own first-seen history, so a
/// long-time depositor borrowing for the first time is a new borrower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Borrower,
    Depositor,
}

impl Role {
    /// The role initiated by an event kind, if any.
    pub fn initiated_by(kind: EventKind) -> Option<Role> {
        match kind {
            EventKind::Borrow => Some(Role::Borrower),
            EventKind::Deposit => Some(Role::Depositor),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Borrower => "borrower",
            Role::Depositor => "depositor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Novelty {
    New,
    Repeat,
}

#[derive(Debug, Clone, Default)]
pub struct FirstSeenIndex {
    first: HashMap<(Role, String), NaiveDate>,
}

impl FirstSeenIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a>(events: impl IntoIterator<Item = &'a EventRecord>) -> Self {
        let mut index = Self::new();
        for ev in events {
            index.observe_event(ev);
        }
        index
    }

    /// Records an activity. Events arrive in time order, so only the first
    /// observation per (role, actor) is kept.
    pub fn observe(&mut self, role: Role, actor: &str, date: NaiveDate) {
        self.first.entry((role, actor.to_string())).or_insert(date);
    }

    pub fn observe_event(&mut self, ev: &EventRecord) {
        if let Some(role) = Role::initiated_by(ev.kind) {
            self.observe(role, &ev.actor, ev.day());
        }
    }

    pub fn first_seen(&self, role: Role, actor: &str) -> Option<NaiveDate> {
        self.first.get(&(role, actor.to_string())).copied()
    }

    pub fn classify(&self, role: Role, actor: &str, date: NaiveDate) -> Result<Novelty, MetricsError> {
        match self.first_seen(role, actor) {
            Some(first) if first == date => Ok(Novelty::New),
            Some(first) if first < date => Ok(Novelty::Repeat),
            _ => Err(MetricsError::UnknownActor {
                role,
                actor: actor.to_string(),
                date,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }
}
