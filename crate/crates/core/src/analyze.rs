//! Aggregations over coded events: frequency tables, duration-normalised
//! counts, cross-tabulations and the ego meeting network.
//!
//! The counting unit is the coded event, i.e. one (record, actor) pair. A
//! meeting with two people counts twice. When an event holds several values
//! at a grouping path the first one is used.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::enrich::KnowledgeBase;
use crate::event::{CodedEvent, EventKey};
use crate::extract::EventKind;
use crate::grammar::{CategoryPath, GrammarSchema, PathError};

pub const UNSET: &str = "⟨unset⟩";
pub const OTHER: &str = "⟨other⟩";
pub const EGO: &str = "Presidente della Repubblica";

/// A grouping key component. `Unset` sorts after every value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupValue {
    Value(String),
    Unset,
}

impl GroupValue {
    pub fn of(event: &CodedEvent, path: &CategoryPath) -> Self {
        match event.first_value(path) {
            Some(v) => GroupValue::Value(v.to_string()),
            None => GroupValue::Unset,
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            GroupValue::Value(v) => v,
            GroupValue::Unset => UNSET,
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for GroupValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupValue::Value(v) => s.serialize_some(v),
            GroupValue::Unset => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for GroupValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Option::<String>::deserialize(d)? {
            Some(v) => GroupValue::Value(v),
            None => GroupValue::Unset,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub key: Vec<GroupValue>,
    pub count: u64,
    /// Count per unit of government duration, when normalised.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub group_by: Vec<CategoryPath>,
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyTable {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, key: &[GroupValue]) -> Option<&FrequencyRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// Row label: key components joined with " / ".
    pub fn label(row: &FrequencyRow) -> String {
        let parts: Vec<&str> = row.key.iter().map(GroupValue::as_str).collect();
        if parts.is_empty() {
            "all".to_string()
        } else {
            parts.join(" / ")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    InvalidPath(#[from] PathError),
    #[error("event {0} has no government assignment")]
    MissingGovernment(EventKey),
    #[error("government `{name}` of event {key} is not in the knowledge base")]
    UnknownGovernment { key: EventKey, name: String },
    #[error("government `{0}` has a zero or negative duration")]
    NonPositiveDuration(String),
}

fn check_paths(schema: &GrammarSchema, paths: &[CategoryPath]) -> Result<(), AnalyzeError> {
    for p in paths {
        schema.resolve(p)?;
    }
    Ok(())
}

fn tally<'a>(events: impl IntoIterator<Item = &'a CodedEvent>, group_by: &[CategoryPath]) -> BTreeMap<Vec<GroupValue>, u64> {
    let mut counts = BTreeMap::new();
    for e in events {
        let key: Vec<GroupValue> = group_by.iter().map(|p| GroupValue::of(e, p)).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// Counts events per tuple of values at `group_by`, rows in key order.
pub fn frequency_table(
    schema: &GrammarSchema,
    events: &[CodedEvent],
    group_by: &[CategoryPath],
) -> Result<FrequencyTable, AnalyzeError> {
    check_paths(schema, group_by)?;
    let rows = tally(events, group_by)
        .into_iter()
        .map(|(key, count)| FrequencyRow {
            key,
            count,
            normalized: None,
        })
        .collect();
    Ok(FrequencyTable {
        group_by: group_by.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationUnit {
    #[default]
    Days,
    Weeks,
    Months,
    Years,
}

impl DurationUnit {
    /// Length of the unit in days. Months and years use the Gregorian mean.
    pub fn days(self) -> f64 {
        match self {
            DurationUnit::Days => 1.0,
            DurationUnit::Weeks => 7.0,
            DurationUnit::Months => 365.2425 / 12.0,
            DurationUnit::Years => 365.2425,
        }
    }
}

/// Counts per government (plus any `extra` grouping paths), each divided by
/// the government's duration in `unit`s. Durations are `end - start` days.
pub fn normalized_counts(
    schema: &GrammarSchema,
    events: &[CodedEvent],
    kb: &KnowledgeBase,
    government: &CategoryPath,
    extra: &[CategoryPath],
    unit: DurationUnit,
) -> Result<FrequencyTable, AnalyzeError> {
    let mut group_by = vec![government.clone()];
    group_by.extend_from_slice(extra);
    check_paths(schema, &group_by)?;
    for e in events {
        let name = e
            .first_value(government)
            .ok_or_else(|| AnalyzeError::MissingGovernment(e.key()))?;
        kb.government(name).ok_or_else(|| AnalyzeError::UnknownGovernment {
            key: e.key(),
            name: name.to_string(),
        })?;
    }
    let mut rows = Vec::new();
    for (key, count) in tally(events, &group_by) {
        let GroupValue::Value(name) = &key[0] else { unreachable!("checked above") };
        let period = kb.government(name).expect("checked above");
        let days = period.duration_days();
        if days <= 0 {
            return Err(AnalyzeError::NonPositiveDuration(name.clone()));
        }
        let normalized = count as f64 / (days as f64 / unit.days());
        rows.push(FrequencyRow {
            key,
            count,
            normalized: Some(normalized),
        });
    }
    Ok(FrequencyTable { group_by, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: String,
    pub weight: u64,
    /// Prefix the label came from; `None` for the catch-all node.
    pub prefix: Option<CategoryPath>,
}

/// Star graph around the ego. Edges sorted by label, all weights positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingNetwork {
    pub ego: String,
    pub edges: Vec<Edge>,
}

impl MeetingNetwork {
    pub fn nodes(&self) -> Vec<&str> {
        let mut nodes = vec![self.ego.as_str()];
        nodes.extend(self.edges.iter().map(|e| e.label.as_str()));
        nodes
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn weight(&self, label: &str) -> Option<u64> {
        self.edges.iter().find(|e| e.label == label).map(|e| e.weight)
    }
}

/// Attributes every meeting event to the first prefix whose subtree holds one
/// of its assignments, or to `⟨other⟩`. Prefixes sharing a last segment share
/// a node.
pub fn build_network(
    schema: &GrammarSchema,
    events: &[CodedEvent],
    prefixes: &[CategoryPath],
) -> Result<MeetingNetwork, AnalyzeError> {
    check_paths(schema, prefixes)?;
    let mut weights: BTreeMap<String, (u64, Option<CategoryPath>)> = BTreeMap::new();
    for e in events.iter().filter(|e| e.kind == EventKind::Meeting) {
        let hit = prefixes.iter().find(|p| e.has_under(p));
        let label = match hit.and_then(|p| p.last()) {
            Some(last) => last.to_string(),
            None => OTHER.to_string(),
        };
        let slot = weights.entry(label).or_insert((0, hit.cloned()));
        slot.0 += 1;
    }
    Ok(MeetingNetwork {
        ego: EGO.to_string(),
        edges: weights
            .into_iter()
            .map(|(label, (weight, prefix))| Edge { label, weight, prefix })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crosstab {
    pub row_path: CategoryPath,
    pub col_path: CategoryPath,
    pub rows: Vec<GroupValue>,
    pub cols: Vec<GroupValue>,
    /// `cells[i][j]` counts events with row value `rows[i]` and column value `cols[j]`.
    pub cells: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub col_totals: Vec<u64>,
    pub total: u64,
}

pub fn crosstab(
    schema: &GrammarSchema,
    events: &[CodedEvent],
    row_path: &CategoryPath,
    col_path: &CategoryPath,
) -> Result<Crosstab, AnalyzeError> {
    check_paths(schema, &[row_path.clone(), col_path.clone()])?;
    let counts = tally(events, &[row_path.clone(), col_path.clone()]);
    let mut rows: Vec<GroupValue> = counts.keys().map(|k| k[0].clone()).collect();
    let mut cols: Vec<GroupValue> = counts.keys().map(|k| k[1].clone()).collect();
    rows.dedup();
    cols.sort();
    cols.dedup();
    let mut cells = vec![vec![0; cols.len()]; rows.len()];
    for (k, n) in &counts {
        let i = rows.binary_search(&k[0]).expect("row present");
        let j = cols.binary_search(&k[1]).expect("col present");
        cells[i][j] = *n;
    }
    let row_totals: Vec<u64> = cells.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..cols.len()).map(|j| cells.iter().map(|r| r[j]).sum()).collect();
    Ok(Crosstab {
        row_path: row_path.clone(),
        col_path: col_path.clone(),
        total: row_totals.iter().sum(),
        rows,
        cols,
        cells,
        row_totals,
        col_totals,
    })
}
