//! Human review of flagged events: the pending queue, resolutions and
//! progress counts.

use serde::{Deserialize, Serialize};

use crate::event::{CodedEvent, EventKey, FlagReason, Status};
use crate::extract::CharSpan;
use crate::grammar::CategoryPath;
use crate::store::EventStore;
use crate::text::nfc_trim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AcceptAsIs,
    Corrected,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditedAssignment {
    pub path: CategoryPath,
    pub value: String,
}

/// A verifier's decision on one event.
///
/// With `corrected`, every path in `assignments` replaces whatever values the
/// event held at that path, and every subtree in `cleared` is emptied first.
/// The other verdicts carry no edits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewResolution {
    pub record_id: String,
    pub ordinal: u32,
    pub verdict: Verdict,
    #[serde(default)]
    pub assignments: Vec<EditedAssignment>,
    #[serde(default)]
    pub cleared: Vec<CategoryPath>,
    pub verifier_id: String,
    #[serde(default)]
    pub timestamp: String,
}

impl ReviewResolution {
    pub fn key(&self) -> EventKey {
        EventKey::new(self.record_id.clone(), self.ordinal)
    }

    /// Equal in everything but the timestamp.
    pub fn same_decision(&self, other: &ReviewResolution) -> bool {
        let norm = |r: &ReviewResolution| -> Vec<(CategoryPath, String)> {
            r.assignments.iter().map(|a| (a.path.clone(), nfc_trim(&a.value))).collect()
        };
        self.key() == other.key()
            && self.verdict == other.verdict
            && norm(self) == norm(other)
            && self.cleared == other.cleared
            && self.verifier_id == other.verifier_id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub key: EventKey,
    pub description: String,
    pub mentions: Vec<CharSpan>,
    pub actor: Option<usize>,
    pub flags: Vec<FlagReason>,
    pub event: CodedEvent,
}

impl ReviewItem {
    pub fn of(event: &CodedEvent) -> Self {
        ReviewItem {
            key: event.key(),
            description: event.description.clone(),
            mentions: event.mentions.clone(),
            actor: event.actor,
            flags: event.flags.clone(),
            event: event.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total: usize,
    pub page: usize,
    pub size: usize,
}

/// Flagged events ordered by key, `size` per page, pages numbered from 1.
/// A page past the end is empty but still reports the total.
pub fn list_pending(store: &EventStore, page: usize, size: usize) -> Page<ReviewItem> {
    let mut pending: Vec<&CodedEvent> = store.events().filter(|e| e.status == Status::Flagged).collect();
    pending.sort_by_key(|e| e.key());
    let total = pending.len();
    let skip = page.saturating_sub(1).saturating_mul(size);
    let items = pending.into_iter().skip(skip).take(size).map(ReviewItem::of).collect();
    Page {
        items,
        total,
        page,
        size,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub auto: usize,
    pub flagged: usize,
    pub resolved: usize,
    pub rejected: usize,
    pub total: usize,
}

pub fn progress(store: &EventStore) -> Progress {
    let mut p = Progress::default();
    for e in store.events() {
        match e.status {
            Status::Auto => p.auto += 1,
            Status::Flagged => p.flagged += 1,
            Status::Resolved => p.resolved += 1,
            Status::Rejected => p.rejected += 1,
        }
        p.total += 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrich::Coder;
    use crate::fixtures;
    use crate::grammar::validate_event;
    use crate::ingest::{parse_records, FormatConfig};

    fn store() -> EventStore {
        let (schema, vocab, kb) = (fixtures::schema(), fixtures::vocab(), fixtures::kb());
        let records = parse_records(fixtures::TABLE1_TSV, &FormatConfig::default()).records;
        let events = Coder::new(&schema, &vocab, &kb).code_all(&records).unwrap();
        let mut store = EventStore::new(schema);
        store.put_events(events).unwrap();
        store
    }

    fn p(segments: &[&str]) -> CategoryPath {
        CategoryPath::new(segments.iter().copied())
    }

    fn edit(path: &[&str], value: &str) -> EditedAssignment {
        EditedAssignment {
            path: p(path),
            value: value.into(),
        }
    }

    #[test]
    fn pending_pages() {
        let store = store();
        let page = list_pending(&store, 1, 10);
        assert_eq!(page.total, 1);
        assert_eq!(page.items[0].key, EventKey::new("1", 2));
        assert_eq!(page.items[0].flags, [FlagReason::UnresolvedActor]);
        let beyond = list_pending(&store, 5, 10);
        assert!(beyond.items.is_empty());
        assert_eq!(beyond.total, 1);
        let empty = EventStore::new(fixtures::schema());
        assert_eq!(list_pending(&empty, 1, 10).total, 0);
        assert_eq!(progress(&empty), Progress::default());
    }

    #[test]
    fn correcting_with_the_worked_example_resolves() {
        let mut store = store();
        let before = progress(&store);
        assert_eq!(before.total, before.auto + before.flagged + before.resolved + before.rejected);
        let po = ["Internal Politics", "Political Organizations"];
        let resolution = ReviewResolution {
            record_id: "1".into(),
            ordinal: 2,
            verdict: Verdict::Corrected,
            assignments: vec![
                edit(&[po[0], po[1], "Political Parties"], "Leader of party"),
                edit(&[po[0], po[1], "Goverment"], "Prodi II"),
                edit(&[po[0], po[1], "Parliamentary/Extraparliamentary"], "Parliamentary"),
                edit(&[po[0], po[1], "Majority/Minority Political Parties"], "Minority"),
                edit(&[po[0], po[1], "Party Name"], "Forza Italia"),
                edit(&["Internal Politics", "Legislative Power", "Chamber of Deputies"], "Leader of Minority Group"),
            ],
            cleared: vec![],
            verifier_id: "v1".into(),
            timestamp: "2026-01-01T00:00:00Z".into(),
        };
        let event = store.apply_resolution(&resolution).unwrap().clone();
        assert_eq!(event.status, Status::Resolved);
        assert!(validate_event(store.schema(), &event).is_empty());
        assert_eq!(list_pending(&store, 1, 10).total, 0);
        let after = progress(&store);
        assert_eq!(after.flagged, before.flagged - 1);
        assert_eq!(after.resolved, before.resolved + 1);
        assert_eq!(after.total, before.total);
    }

    #[test]
    fn edits_need_corrected_verdict() {
        let mut store = store();
        let resolution = ReviewResolution {
            record_id: "1".into(),
            ordinal: 2,
            verdict: Verdict::AcceptAsIs,
            assignments: vec![edit(&["Verb"], "meets")],
            cleared: vec![],
            verifier_id: "v1".into(),
            timestamp: String::new(),
        };
        assert!(store.apply_resolution(&resolution).is_err());
    }
}
