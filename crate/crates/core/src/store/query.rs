//! Conjunctive filters over coded events.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::CodedEvent;
use crate::grammar::{CategoryPath, GrammarSchema, PathError, ValueKind};
use crate::text::nfc_trim;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Equals(String),
    InSet(Vec<String>),
    /// Inclusive on both ends.
    DateBetween { lo: NaiveDate, hi: NaiveDate },
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub path: CategoryPath,
    pub predicate: Predicate,
}

impl Clause {
    pub fn new(path: CategoryPath, predicate: Predicate) -> Self {
        Clause { path, predicate }
    }

    /// Parses the command-line clause syntax:
    ///
    /// | text              | predicate                     |
    /// |-------------------|-------------------------------|
    /// | `path=value`      | equals                        |
    /// | `path~=a\|b\|c`   | in set                        |
    /// | `path@lo..hi`     | date between (ISO dates)      |
    /// | `path?`           | exists                        |
    pub fn parse(schema: &GrammarSchema, text: &str) -> Result<Clause, QueryError> {
        let bad = |msg: &str| QueryError::Syntax(format!("`{text}`: {msg}"));
        if let Some(path) = text.strip_suffix('?') {
            return Ok(Clause::new(CategoryPath::parse_in(schema, path)?, Predicate::Exists));
        }
        if let Some((path, set)) = text.split_once("~=") {
            let values = set.split('|').map(nfc_trim).collect();
            return Ok(Clause::new(CategoryPath::parse_in(schema, path)?, Predicate::InSet(values)));
        }
        if let Some((path, value)) = text.split_once('=') {
            return Ok(Clause::new(
                CategoryPath::parse_in(schema, path)?,
                Predicate::Equals(nfc_trim(value)),
            ));
        }
        if let Some((path, range)) = text.rsplit_once('@') {
            let (lo, hi) = range.split_once("..").ok_or_else(|| bad("expected lo..hi"))?;
            let date = |s: &str| {
                NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|_| bad("dates must be YYYY-MM-DD"))
            };
            return Ok(Clause::new(
                CategoryPath::parse_in(schema, path)?,
                Predicate::DateBetween {
                    lo: date(lo)?,
                    hi: date(hi)?,
                },
            ));
        }
        Err(bad("expected path=value, path~=a|b, path@lo..hi or path?"))
    }

    pub fn matches(&self, event: &CodedEvent) -> bool {
        let mut values = event.values_at(&self.path);
        match &self.predicate {
            Predicate::Exists => values.next().is_some(),
            Predicate::Equals(v) => {
                let v = nfc_trim(v);
                values.any(|x| x == v)
            }
            Predicate::InSet(set) => values.any(|x| set.iter().any(|v| nfc_trim(v) == x)),
            Predicate::DateBetween { lo, hi } => values.any(|x| {
                NaiveDate::parse_from_str(x, "%Y-%m-%d").is_ok_and(|d| *lo <= d && d <= *hi)
            }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryFilter {
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    InvalidPath(#[from] PathError),
    #[error("`{0}` is not a calendar-date category")]
    NotADate(CategoryPath),
    #[error("bad filter {0}")]
    Syntax(String),
}

impl QueryFilter {
    pub fn new(clauses: Vec<Clause>) -> Self {
        QueryFilter { clauses }
    }

    pub fn and(mut self, clause: Clause) -> Self {
        self.clauses.push(clause);
        self
    }

    pub fn validate(&self, schema: &GrammarSchema) -> Result<(), QueryError> {
        for c in &self.clauses {
            let def = schema.resolve(&c.path)?;
            if matches!(c.predicate, Predicate::DateBetween { .. }) && def.kind != ValueKind::CalendarDate {
                return Err(QueryError::NotADate(c.path.clone()));
            }
        }
        Ok(())
    }

    pub fn matches(&self, event: &CodedEvent) -> bool {
        self.clauses.iter().all(|c| c.matches(event))
    }
}
