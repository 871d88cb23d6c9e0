//! Coded events: one record's values for the grammar categories.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::{CharSpan, EventKind};
use crate::grammar::CategoryPath;
use crate::text::nfc_trim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Auto,
    Flagged,
    Resolved,
    Rejected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Auto => "auto",
            Status::Flagged => "flagged",
            Status::Resolved => "resolved",
            Status::Rejected => "rejected",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Extracted,
    Enriched,
    Human,
}

/// Why an event was queued for a human verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    NoHonorific,
    MissingRole,
    UnresolvedActor,
    AmbiguousName,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub path: CategoryPath,
    pub value: String,
    pub provenance: Provenance,
}

impl Assignment {
    pub fn new(path: CategoryPath, value: impl AsRef<str>, provenance: Provenance) -> Self {
        Assignment {
            path,
            value: nfc_trim(value.as_ref()),
            provenance,
        }
    }
}

/// Store key: source record plus 1-based actor ordinal within the record.
///
/// Ordered numerically when both record ids are integers, so record `10`
/// sorts after record `9`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventKey {
    pub record_id: String,
    pub ordinal: u32,
}

impl EventKey {
    pub fn new(record_id: impl Into<String>, ordinal: u32) -> Self {
        EventKey {
            record_id: record_id.into(),
            ordinal,
        }
    }
}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.record_id.parse::<u64>().ok();
        let b = other.record_id.parse::<u64>().ok();
        let by_id = match (a, b) {
            (Some(x), Some(y)) => x.cmp(&y).then_with(|| self.record_id.cmp(&other.record_id)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.record_id.cmp(&other.record_id),
        };
        by_id.then(self.ordinal.cmp(&other.ordinal))
    }
}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.record_id, self.ordinal)
    }
}

/// One coded event. Multi-actor meetings yield one event per actor, so the
/// counting unit everywhere downstream is the (record, actor) pair.
///
/// Besides the grammar assignments the event keeps the source description and
/// the character spans of every mention found in it, which the KML export and
/// the review queue need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedEvent {
    pub record_id: String,
    pub ordinal: u32,
    pub kind: EventKind,
    pub status: Status,
    pub assignments: Vec<Assignment>,
    #[serde(default)]
    pub flags: Vec<FlagReason>,
    pub description: String,
    #[serde(default)]
    pub mentions: Vec<CharSpan>,
    /// Index into `mentions` of the actor this event is about.
    #[serde(default)]
    pub actor: Option<usize>,
}

impl CodedEvent {
    pub fn new(record_id: impl Into<String>, ordinal: u32) -> Self {
        CodedEvent {
            record_id: record_id.into(),
            ordinal,
            kind: EventKind::Unclassified,
            status: Status::Auto,
            assignments: Vec::new(),
            flags: Vec::new(),
            description: String::new(),
            mentions: Vec::new(),
            actor: None,
        }
    }

    pub fn key(&self) -> EventKey {
        EventKey::new(self.record_id.clone(), self.ordinal)
    }

    /// Values at exactly `path`, in assignment order.
    pub fn values_at<'a, 'p>(&'a self, path: &'p CategoryPath) -> impl Iterator<Item = &'a str> + use<'a, 'p> {
        self.assignments
            .iter()
            .filter(move |a| &a.path == path)
            .map(|a| a.value.as_str())
    }

    pub fn first_value(&self, path: &CategoryPath) -> Option<&str> {
        self.values_at(path).next()
    }

    /// Whether any assignment lies in the subtree rooted at `prefix`.
    pub fn has_under(&self, prefix: &CategoryPath) -> bool {
        self.assignments.iter().any(|a| a.path.starts_with(prefix))
    }
}
