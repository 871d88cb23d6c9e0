//! The sample schema, vocabulary, knowledge base and records bundled with the
//! repository, compiled in so tests and the synthetic generator need no paths.

use crate::enrich::KnowledgeBase;
use crate::extract::RoleVocabulary;
use crate::grammar::GrammarSchema;

pub const SCHEMA_JSON: &str = include_str!("../../../fixtures/schema_por.json");
pub const VOCAB_JSON: &str = include_str!("../../../fixtures/vocab_it.json");
pub const KB_JSON: &str = include_str!("../../../fixtures/kb_it.json");
pub const TABLE1_TSV: &str = include_str!("../../../fixtures/table1.tsv");

pub fn schema() -> GrammarSchema {
    GrammarSchema::from_json(SCHEMA_JSON).expect("bundled schema parses")
}

pub fn vocab() -> RoleVocabulary {
    RoleVocabulary::from_json(VOCAB_JSON).expect("bundled vocabulary parses")
}

pub fn kb() -> KnowledgeBase {
    KnowledgeBase::from_json(KB_JSON).expect("bundled knowledge base parses")
}
