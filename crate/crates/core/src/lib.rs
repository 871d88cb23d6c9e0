//! Story-grammar coding of diary-style institutional records.
//!
//! The pipeline reads raw agenda rows ([`ingest`]), finds the people named in
//! each description with rule-based matching ([`extract`]), fills a
//! user-defined hierarchical coding scheme from an auxiliary knowledge base
//! ([`enrich`], [`grammar`]), persists the coded events with an append-only
//! correction log ([`store`], [`review`]) and aggregates or exports them
//! ([`analyze`], [`export`]).

pub mod analyze;
pub mod enrich;
pub mod event;
pub mod export;
pub mod extract;
pub mod fixtures;
pub mod grammar;
pub mod ingest;
pub mod ndjson;
pub mod review;
pub mod store;
pub mod synth;
pub mod text;

pub use enrich::{CodingConfig, CodingPaths, KnowledgeBase};
pub use event::{Assignment, CodedEvent, EventKey, FlagReason, Provenance, Status};
pub use extract::{ActorMention, EventKind, RoleVocabulary};
pub use grammar::{CategoryDef, CategoryPath, GrammarSchema, Violation};
pub use ingest::DiaryRecord;
pub use store::EventStore;
