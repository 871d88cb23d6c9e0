//! The user-defined coding scheme ("story grammar") and its validation.
//!
//! A schema is a tree of [`CategoryDef`] nodes rooted at `Event`. Containers
//! (`kind = none`) only group children; every other node accepts values of its
//! [`ValueKind`]. Coded events address nodes by [`CategoryPath`], the sequence
//! of names below the root.

use std::collections::{HashMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{CodedEvent, Status};
use crate::text::nfc_trim;

/// Deepest tree accepted by [`validate_schema`].
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueKind {
    /// Pure container.
    None,
    FreeText,
    ClosedVocabulary(Vec<String>),
    EntityReference,
    CalendarDate,
    PlaceName,
}

impl ValueKind {
    fn tag(&self) -> KindTag {
        match self {
            ValueKind::None => KindTag::None,
            ValueKind::FreeText => KindTag::FreeText,
            ValueKind::ClosedVocabulary(_) => KindTag::ClosedVocabulary,
            ValueKind::EntityReference => KindTag::EntityReference,
            ValueKind::CalendarDate => KindTag::CalendarDate,
            ValueKind::PlaceName => KindTag::PlaceName,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.tag() {
            KindTag::None => "none",
            KindTag::FreeText => "free_text",
            KindTag::ClosedVocabulary => "closed_vocabulary",
            KindTag::EntityReference => "entity_reference",
            KindTag::CalendarDate => "calendar_date",
            KindTag::PlaceName => "place_name",
        }
    }

    /// Checks a single value against this kind.
    pub fn check(&self, value: &str) -> Result<(), String> {
        if matches!(self, ValueKind::None) {
            return Err("container categories take no value".into());
        }
        if value.trim().is_empty() {
            return Err("value is empty".into());
        }
        match self {
            ValueKind::ClosedVocabulary(allowed) => {
                let v = nfc_trim(value);
                if allowed.iter().any(|a| *a == v) {
                    Ok(())
                } else {
                    Err(format!("`{value}` is not one of [{}]", allowed.join(", ")))
                }
            }
            ValueKind::CalendarDate => NaiveDate::parse_from_str(value.trim(), "%Y-%m-%d")
                .map(|_| ())
                .map_err(|_| format!("`{value}` is not an ISO-8601 calendar date")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    #[default]
    Optional,
    Required,
    Repeated,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    None,
    FreeText,
    ClosedVocabulary,
    EntityReference,
    CalendarDate,
    PlaceName,
}

#[derive(Serialize, Deserialize)]
struct RawCategory {
    name: String,
    kind: KindTag,
    #[serde(default)]
    cardinality: Cardinality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<CategoryDef>,
}

/// One node of the coding scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCategory", into = "RawCategory")]
pub struct CategoryDef {
    pub name: String,
    pub kind: ValueKind,
    pub cardinality: Cardinality,
    pub children: Vec<CategoryDef>,
}

impl TryFrom<RawCategory> for CategoryDef {
    type Error = String;

    fn try_from(raw: RawCategory) -> Result<Self, Self::Error> {
        let name = nfc_trim(&raw.name);
        let kind = match (raw.kind, raw.vocabulary) {
            (KindTag::ClosedVocabulary, vocab) => ValueKind::ClosedVocabulary(
                vocab.unwrap_or_default().iter().map(|v| nfc_trim(v)).collect(),
            ),
            (_, Some(_)) => {
                return Err(format!(
                    "category `{name}`: `vocabulary` is only allowed with kind closed_vocabulary"
                ))
            }
            (KindTag::None, None) => ValueKind::None,
            (KindTag::FreeText, None) => ValueKind::FreeText,
            (KindTag::EntityReference, None) => ValueKind::EntityReference,
            (KindTag::CalendarDate, None) => ValueKind::CalendarDate,
            (KindTag::PlaceName, None) => ValueKind::PlaceName,
        };
        Ok(CategoryDef {
            name,
            kind,
            cardinality: raw.cardinality,
            children: raw.children,
        })
    }
}

impl From<CategoryDef> for RawCategory {
    fn from(def: CategoryDef) -> Self {
        let kind = def.kind.tag();
        let vocabulary = match def.kind {
            ValueKind::ClosedVocabulary(v) => Some(v),
            _ => None,
        };
        RawCategory {
            name: def.name,
            kind,
            cardinality: def.cardinality,
            vocabulary,
            children: def.children,
        }
    }
}

impl CategoryDef {
    pub fn container(name: &str, children: Vec<CategoryDef>) -> Self {
        CategoryDef {
            name: nfc_trim(name),
            kind: ValueKind::None,
            cardinality: Cardinality::Optional,
            children,
        }
    }

    pub fn leaf(name: &str, kind: ValueKind) -> Self {
        CategoryDef {
            name: nfc_trim(name),
            kind,
            cardinality: Cardinality::Optional,
            children: Vec::new(),
        }
    }

    pub fn with_cardinality(mut self, cardinality: Cardinality) -> Self {
        self.cardinality = cardinality;
        self
    }

    pub fn child(&self, name: &str) -> Option<&CategoryDef> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn is_container(&self) -> bool {
        matches!(self.kind, ValueKind::None)
    }
}

/// A complete coding scheme. On disk the root node object carries an extra
/// optional `version` member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarSchema {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub version: String,
    #[serde(flatten)]
    pub root: CategoryDef,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("schema document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema is invalid:\n{}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

impl GrammarSchema {
    pub fn new(version: impl Into<String>, root: CategoryDef) -> Self {
        GrammarSchema {
            version: version.into(),
            root,
        }
    }

    /// Parses and validates a schema document.
    pub fn from_json(json: &str) -> Result<Self, SchemaError> {
        let schema: GrammarSchema = serde_json::from_str(json)?;
        let violations = validate_schema(&schema);
        if violations.is_empty() {
            Ok(schema)
        } else {
            Err(SchemaError::Invalid(violations))
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn resolve(&self, path: &CategoryPath) -> Result<&CategoryDef, PathError> {
        resolve_path(self, path)
    }

    /// Every node below the root with its path, in preorder.
    pub fn paths(&self) -> Vec<(CategoryPath, &CategoryDef)> {
        fn walk<'a>(
            node: &'a CategoryDef,
            prefix: &CategoryPath,
            out: &mut Vec<(CategoryPath, &'a CategoryDef)>,
        ) {
            for child in &node.children {
                let path = prefix.child(&child.name);
                out.push((path.clone(), child));
                walk(child, &path, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &CategoryPath::root(), &mut out);
        out
    }

    /// Paths of nodes that accept values, in preorder.
    pub fn value_paths(&self) -> Vec<CategoryPath> {
        self.paths()
            .into_iter()
            .filter(|(_, def)| !def.is_container())
            .map(|(p, _)| p)
            .collect()
    }
}

/// Names from the root's child downward.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct CategoryPath(Vec<String>);

impl From<Vec<String>> for CategoryPath {
    fn from(segments: Vec<String>) -> Self {
        CategoryPath(segments.iter().map(|s| nfc_trim(s)).collect())
    }
}

impl From<CategoryPath> for Vec<String> {
    fn from(path: CategoryPath) -> Self {
        path.0
    }
}

impl CategoryPath {
    pub fn new<I, S>(segments: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        CategoryPath(segments.into_iter().map(|s| nfc_trim(s.as_ref())).collect())
    }

    pub fn root() -> Self {
        CategoryPath(Vec::new())
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> Option<&str> {
        self.0.last().map(String::as_str)
    }

    pub fn child(&self, name: &str) -> CategoryPath {
        let mut segments = self.0.clone();
        segments.push(nfc_trim(name));
        CategoryPath(segments)
    }

    pub fn parent(&self) -> Option<CategoryPath> {
        if self.0.is_empty() {
            None
        } else {
            Some(CategoryPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn starts_with(&self, prefix: &CategoryPath) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Parses a `/`-joined path against `schema`. Category names may
    /// themselves contain `/` (`Parliamentary/Extraparliamentary`), so the
    /// split is decided by the schema: the longest sibling name that matches
    /// wins, with backtracking.
    pub fn parse_in(schema: &GrammarSchema, text: &str) -> Result<CategoryPath, PathError> {
        let text = nfc_trim(text);
        if text.is_empty() {
            return Err(PathError::Empty);
        }
        let mut acc = Vec::new();
        if match_segments(&schema.root, &text, &mut acc) {
            return Ok(CategoryPath(acc));
        }
        // Report against the naive split so the prefix is meaningful.
        let naive = CategoryPath::new(text.split('/'));
        match resolve_path(schema, &naive) {
            Ok(_) => Ok(naive),
            Err(e) => Err(e),
        }
    }
}

fn match_segments(node: &CategoryDef, rest: &str, acc: &mut Vec<String>) -> bool {
    let mut candidates: Vec<&CategoryDef> = node
        .children
        .iter()
        .filter(|c| {
            rest.starts_with(c.name.as_str())
                && (rest.len() == c.name.len() || rest[c.name.len()..].starts_with('/'))
        })
        .collect();
    candidates.sort_by_key(|c| std::cmp::Reverse(c.name.len()));
    for c in candidates {
        acc.push(c.name.clone());
        let after = &rest[c.name.len()..];
        if after.is_empty() {
            return true;
        }
        let after = &after[1..];
        if !after.is_empty() && match_segments(c, after, acc) {
            return true;
        }
        acc.pop();
    }
    false
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("empty category path")]
    Empty,
    #[error("no category at `{path}` (longest resolvable prefix: `{prefix}`)")]
    NotFound {
        path: CategoryPath,
        prefix: CategoryPath,
    },
}

/// A schema or event problem, anchored at the offending path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: CategoryPath,
    pub message: String,
}

impl Violation {
    pub fn new(path: CategoryPath, message: impl Into<String>) -> Self {
        Violation {
            path,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "<root>: {}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Checks every structural invariant of the scheme. Returns one violation per
/// problem; an empty list means the schema is valid.
pub fn validate_schema(schema: &GrammarSchema) -> Vec<Violation> {
    let mut out = Vec::new();
    check_node(&schema.root, &CategoryPath::root(), 0, &mut out);
    out
}

fn check_node(node: &CategoryDef, path: &CategoryPath, depth: usize, out: &mut Vec<Violation>) {
    if depth > MAX_DEPTH {
        out.push(Violation::new(
            path.clone(),
            format!("tree deeper than {MAX_DEPTH} levels"),
        ));
        return;
    }
    if node.name.is_empty() {
        out.push(Violation::new(path.clone(), "category name is empty"));
    }
    match &node.kind {
        ValueKind::None if node.children.is_empty() => {
            out.push(Violation::new(path.clone(), "container without children"))
        }
        ValueKind::ClosedVocabulary(values) => {
            if values.is_empty() {
                out.push(Violation::new(path.clone(), "closed vocabulary is empty"));
            }
            let mut seen = HashSet::new();
            for v in values {
                if !seen.insert(v) {
                    out.push(Violation::new(
                        path.clone(),
                        format!("closed vocabulary lists `{v}` twice"),
                    ));
                }
            }
        }
        _ => {}
    }
    let mut seen = HashSet::new();
    for child in &node.children {
        if !seen.insert(child.name.as_str()) {
            out.push(Violation::new(
                path.child(&child.name),
                "duplicate sibling name",
            ));
        }
    }
    for child in &node.children {
        check_node(child, &path.child(&child.name), depth + 1, out);
    }
}

/// Finds the unique node at `path`.
pub fn resolve_path<'a>(
    schema: &'a GrammarSchema,
    path: &CategoryPath,
) -> Result<&'a CategoryDef, PathError> {
    if path.is_empty() {
        return Err(PathError::Empty);
    }
    let mut node = &schema.root;
    for (i, segment) in path.segments().iter().enumerate() {
        match node.child(segment) {
            Some(child) => node = child,
            None => {
                return Err(PathError::NotFound {
                    path: path.clone(),
                    prefix: CategoryPath(path.segments()[..i].to_vec()),
                })
            }
        }
    }
    Ok(node)
}

/// Checks a coded event against the schema. Required categories are only
/// enforced once the event is resolved.
pub fn validate_event(schema: &GrammarSchema, event: &CodedEvent) -> Vec<Violation> {
    let mut out = Vec::new();
    if event.record_id.trim().is_empty() {
        out.push(Violation::new(CategoryPath::root(), "record_id is empty"));
    }
    let mut counts: HashMap<&CategoryPath, usize> = HashMap::new();
    for assignment in &event.assignments {
        match resolve_path(schema, &assignment.path) {
            Ok(def) => {
                if let Err(msg) = def.kind.check(&assignment.value) {
                    out.push(Violation::new(assignment.path.clone(), msg));
                }
                let n = counts.entry(&assignment.path).or_default();
                *n += 1;
                if *n == 2 && def.cardinality != Cardinality::Repeated {
                    out.push(Violation::new(
                        assignment.path.clone(),
                        "category takes a single value but is assigned more than once",
                    ));
                }
            }
            Err(e) => out.push(Violation::new(assignment.path.clone(), e.to_string())),
        }
    }
    if event.status == Status::Resolved {
        check_required(&schema.root, &CategoryPath::root(), event, &mut out);
    }
    out
}

fn check_required(
    node: &CategoryDef,
    path: &CategoryPath,
    event: &CodedEvent,
    out: &mut Vec<Violation>,
) {
    for child in &node.children {
        let child_path = path.child(&child.name);
        let present = event
            .assignments
            .iter()
            .any(|a| a.path.starts_with(&child_path));
        if !present && child.cardinality == Cardinality::Required {
            out.push(Violation::new(child_path.clone(), "required category missing"));
        }
        if present && !child.children.is_empty() {
            check_required(child, &child_path, event, out);
        }
    }
}
