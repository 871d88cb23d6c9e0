//! Event persistence and the correction log.
//!
//! A store directory holds three files:
//!
//! * `schema.json` - the grammar the events were coded against;
//! * `events.ndjson` - the events as first coded, one canonical JSON object
//!   per line;
//! * `corrections.ndjson` - append-only review resolutions, replayed over the
//!   events on load.
//!
//! The in-memory state is always `events` with every correction applied in
//! log order, so replaying the two files reconstructs it exactly.

pub mod query;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{Assignment, CodedEvent, EventKey, Provenance, Status};
use crate::grammar::{validate_event, GrammarSchema, SchemaError, Violation};
use crate::ndjson::{self, NdjsonError};
use crate::review::{ReviewResolution, Verdict};

pub use query::{Clause, Predicate, QueryError, QueryFilter};

pub const SCHEMA_FILE: &str = "schema.json";
pub const EVENTS_FILE: &str = "events.ndjson";
pub const CORRECTIONS_FILE: &str = "corrections.ndjson";

/// One line of the corrections log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub seq: u64,
    /// Identical to the previous resolution for the same key.
    pub duplicate: bool,
    #[serde(flatten)]
    pub resolution: ReviewResolution,
}

/// A field-level validation message, addressed by category path or by the
/// name of a resolution field (`verifier_id`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    pub message: String,
}

impl From<Violation> for FieldError {
    fn from(v: Violation) -> Self {
        FieldError {
            field: v.path.to_string(),
            path: Some(v.path.segments().to_vec()),
            message: v.message,
        }
    }
}

impl FieldError {
    fn named(field: &str, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            path: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("event {key} violates the schema: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        key: EventKey,
        violations: Vec<Violation>,
    },
    #[error("event {0} is already stored")]
    DuplicateKey(EventKey),
    #[error(transparent)]
    Ndjson(#[from] NdjsonError),
    #[error("cannot read schema {path}: {source}")]
    SchemaIo { path: PathBuf, source: io::Error },
    #[error("schema {path}: {source}")]
    Schema { path: PathBuf, source: SchemaError },
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrections log entry {seq} does not replay: {source}")]
    Replay { seq: u64, source: Box<ApplyError> },
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("no event {0}")]
    UnknownKey(EventKey),
    #[error("resolution rejected: {}", .0.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
    #[error(transparent)]
    Io(#[from] NdjsonError),
}

/// A validated resolution that has not been committed yet.
#[derive(Debug, Clone)]
pub struct PreparedCorrection {
    pub entry: CorrectionEntry,
    pub event: CodedEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStore {
    schema: GrammarSchema,
    base: IndexMap<EventKey, CodedEvent>,
    current: IndexMap<EventKey, CodedEvent>,
    corrections: Vec<CorrectionEntry>,
}

impl EventStore {
    pub fn new(schema: GrammarSchema) -> Self {
        EventStore {
            schema,
            base: IndexMap::new(),
            current: IndexMap::new(),
            corrections: Vec::new(),
        }
    }

    pub fn schema(&self) -> &GrammarSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    /// Current events (corrections applied) in insertion order.
    pub fn events(&self) -> impl Iterator<Item = &CodedEvent> {
        self.current.values()
    }

    /// Current events minus the rejected ones: the input of every analysis.
    pub fn analysis_events(&self) -> Vec<CodedEvent> {
        self.events()
            .filter(|e| e.status != Status::Rejected)
            .cloned()
            .collect()
    }

    /// Events as originally coded, before any correction.
    pub fn original_events(&self) -> impl Iterator<Item = &CodedEvent> {
        self.base.values()
    }

    pub fn corrections(&self) -> &[CorrectionEntry] {
        &self.corrections
    }

    pub fn get(&self, key: &EventKey) -> Option<&CodedEvent> {
        self.current.get(key)
    }

    /// Adds events. All-or-nothing: one invalid event leaves the store as it was.
    pub fn put_events(&mut self, events: Vec<CodedEvent>) -> Result<(), StoreError> {
        let mut batch = std::collections::HashSet::new();
        for e in &events {
            let key = e.key();
            let violations = validate_event(&self.schema, e);
            if !violations.is_empty() {
                return Err(StoreError::Invalid { key, violations });
            }
            if self.base.contains_key(&key) || !batch.insert(key.clone()) {
                return Err(StoreError::DuplicateKey(key));
            }
        }
        for e in events {
            self.base.insert(e.key(), e.clone());
            self.current.insert(e.key(), e);
        }
        Ok(())
    }

    pub fn query(&self, filter: &QueryFilter) -> Result<Vec<&CodedEvent>, QueryError> {
        filter.validate(&self.schema)?;
        Ok(self.events().filter(|e| filter.matches(e)).collect())
    }

    /// Validates `resolution` against the current state without changing it.
    pub fn prepare(&self, resolution: &ReviewResolution) -> Result<PreparedCorrection, ApplyError> {
        let key = resolution.key();
        let current = self.current.get(&key).ok_or_else(|| ApplyError::UnknownKey(key.clone()))?;
        let mut errors = Vec::new();
        if resolution.verifier_id.trim().is_empty() {
            errors.push(FieldError::named("verifier_id", "verifier_id is required"));
        }
        let has_edits = !resolution.assignments.is_empty() || !resolution.cleared.is_empty();

        let mut event = current.clone();
        match resolution.verdict {
            Verdict::AcceptAsIs | Verdict::Rejected if has_edits => errors.push(FieldError::named(
                "assignments",
                "edits are only allowed with verdict `corrected`",
            )),
            Verdict::AcceptAsIs => event.status = Status::Resolved,
            Verdict::Rejected => event.status = Status::Rejected,
            Verdict::Corrected => {
                for path in &resolution.cleared {
                    event.assignments.retain(|a| !a.path.starts_with(path));
                }
                let mut edited: Vec<&crate::grammar::CategoryPath> = Vec::new();
                for edit in &resolution.assignments {
                    if !edited.contains(&&edit.path) {
                        event.assignments.retain(|a| a.path != edit.path);
                        edited.push(&edit.path);
                    }
                }
                for edit in &resolution.assignments {
                    event
                        .assignments
                        .push(Assignment::new(edit.path.clone(), &edit.value, Provenance::Human));
                }
                sort_by_schema(&self.schema, &mut event.assignments);
                event.status = Status::Resolved;
            }
        }
        errors.extend(validate_event(&self.schema, &event).into_iter().map(FieldError::from));
        if !errors.is_empty() {
            return Err(ApplyError::Invalid(errors));
        }
        let duplicate = self
            .corrections
            .iter()
            .rev()
            .find(|c| c.resolution.key() == key)
            .is_some_and(|c| c.resolution.same_decision(resolution));
        Ok(PreparedCorrection {
            entry: CorrectionEntry {
                seq: self.corrections.len() as u64 + 1,
                duplicate,
                resolution: resolution.clone(),
            },
            event,
        })
    }

    pub fn commit(&mut self, prepared: PreparedCorrection) -> &CodedEvent {
        let key = prepared.entry.resolution.key();
        self.corrections.push(prepared.entry);
        let slot = self.current.get_mut(&key).expect("prepared against this store");
        *slot = prepared.event;
        slot
    }

    /// Applies a resolution in memory only.
    pub fn apply_resolution(&mut self, resolution: &ReviewResolution) -> Result<&CodedEvent, ApplyError> {
        let prepared = self.prepare(resolution)?;
        Ok(self.commit(prepared))
    }

    /// Applies a resolution after durably appending it to the store
    /// directory's corrections log. On any error the store is unchanged.
    pub fn apply_durable(
        &mut self,
        dir: &Path,
        resolution: &ReviewResolution,
    ) -> Result<(&CodedEvent, bool), ApplyError> {
        let prepared = self.prepare(resolution)?;
        ndjson::append(&dir.join(CORRECTIONS_FILE), &prepared.entry)?;
        let duplicate = prepared.entry.duplicate;
        Ok((self.commit(prepared), duplicate))
    }

    /// Writes schema, events and corrections into `dir` (created if needed).
    pub fn save(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir).map_err(|source| StoreError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let schema_path = dir.join(SCHEMA_FILE);
        let mut schema = self.schema.to_json_pretty();
        schema.push('\n');
        fs::write(&schema_path, schema).map_err(|source| StoreError::Io {
            path: schema_path,
            source,
        })?;
        let events: Vec<&CodedEvent> = self.base.values().collect();
        ndjson::write_file(&dir.join(EVENTS_FILE), &events)?;
        ndjson::write_file(&dir.join(CORRECTIONS_FILE), &self.corrections)?;
        Ok(())
    }

    /// Reads a store directory and replays its corrections log.
    pub fn load(dir: &Path) -> Result<Self, StoreError> {
        let schema_path = dir.join(SCHEMA_FILE);
        let text = fs::read_to_string(&schema_path).map_err(|source| StoreError::SchemaIo {
            path: schema_path.clone(),
            source,
        })?;
        let schema = GrammarSchema::from_json(&text).map_err(|source| StoreError::Schema {
            path: schema_path,
            source,
        })?;
        let events: Vec<CodedEvent> = ndjson::read_file(&dir.join(EVENTS_FILE))?;
        let corrections: Vec<CorrectionEntry> = ndjson::read_file(&dir.join(CORRECTIONS_FILE))?;
        Self::replay(schema, events, corrections)
    }

    /// Rebuilds the state from original events plus a corrections log.
    pub fn replay(
        schema: GrammarSchema,
        events: Vec<CodedEvent>,
        corrections: Vec<CorrectionEntry>,
    ) -> Result<Self, StoreError> {
        let mut store = EventStore::new(schema);
        store.put_events(events)?;
        for entry in corrections {
            let seq = entry.seq;
            let prepared = store.prepare(&entry.resolution).map_err(|e| StoreError::Replay {
                seq,
                source: Box::new(e),
            })?;
            store.commit(PreparedCorrection {
                entry,
                event: prepared.event,
            });
        }
        Ok(store)
    }
}

/// Orders assignments by the preorder position of their path in the schema,
/// keeping the relative order of equal paths.
fn sort_by_schema(schema: &GrammarSchema, assignments: &mut [Assignment]) {
    let order: Vec<_> = schema.paths().into_iter().map(|(p, _)| p).collect();
    assignments.sort_by_key(|a| order.iter().position(|p| *p == a.path).unwrap_or(usize::MAX));
}
