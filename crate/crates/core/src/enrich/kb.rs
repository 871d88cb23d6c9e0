//! Auxiliary knowledge base: governments, parties, people, places.

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{fold_key, nfc_trim};

/// A government in office over the half-open interval `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernmentPeriod {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl GovernmentPeriod {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }

    pub fn duration_days(&self) -> i64 {
        (self.end - self.start).num_days()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Majority,
    Minority,
}

impl Alignment {
    pub fn label(self) -> &'static str {
        match self {
            Alignment::Majority => "Majority",
            Alignment::Minority => "Minority",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standing {
    Parliamentary,
    Extraparliamentary,
}

impl Standing {
    pub fn label(self) -> &'static str {
        match self {
            Standing::Parliamentary => "Parliamentary",
            Standing::Extraparliamentary => "Extraparliamentary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyStanding {
    pub alignment: Alignment,
    pub standing: Standing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyRecord {
    pub name: String,
    /// Government name -> position of the party under that government.
    #[serde(default)]
    pub governments: IndexMap<String, PartyStanding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerBranch {
    Legislative,
    Executive,
    Judiciary,
    Other,
}

/// One role held over `[start, end)`; an absent `end` means still held.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affiliation {
    pub start: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<String>,
    /// Role inside the party (`Leader of party`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party_role: Option<String>,
    pub power_branch: PowerBranch,
    /// Grammar leaf under the branch container that receives `role_label`
    /// (`Chamber of Deputies`).
    pub institution: String,
    pub role_label: String,
}

impl Affiliation {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && self.end.is_none_or(|end| date < end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub surname: String,
    #[serde(default)]
    pub given_name: String,
    #[serde(default)]
    pub affiliations: Vec<Affiliation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KnowledgeBase {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub governments: Vec<GovernmentPeriod>,
    #[serde(default)]
    pub parties: Vec<PartyRecord>,
    #[serde(default)]
    pub persons: Vec<PersonRecord>,
    #[serde(default)]
    pub gazetteer: IndexMap<String, Coordinates>,
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("knowledge base is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("knowledge base is inconsistent:\n{}", .0.iter().map(|p| format!("  {p}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

impl KnowledgeBase {
    /// Parses, NFC-normalizes names, sorts governments by start and checks
    /// every cross-reference.
    pub fn from_json(json: &str) -> Result<Self, KbError> {
        let kb: KnowledgeBase = serde_json::from_str(json)?;
        kb.normalized()
    }

    pub fn normalized(mut self) -> Result<Self, KbError> {
        for g in &mut self.governments {
            g.name = nfc_trim(&g.name);
        }
        self.governments.sort_by_key(|g| g.start);
        for p in &mut self.parties {
            p.name = nfc_trim(&p.name);
            p.governments = std::mem::take(&mut p.governments)
                .into_iter()
                .map(|(k, v)| (nfc_trim(&k), v))
                .collect();
        }
        for person in &mut self.persons {
            person.surname = nfc_trim(&person.surname);
            person.given_name = nfc_trim(&person.given_name);
            for a in &mut person.affiliations {
                a.party = a.party.as_deref().map(nfc_trim);
                a.party_role = a.party_role.as_deref().map(nfc_trim);
                a.institution = nfc_trim(&a.institution);
                a.role_label = nfc_trim(&a.role_label);
            }
            person.affiliations.sort_by_key(|a| a.start);
        }
        self.gazetteer = std::mem::take(&mut self.gazetteer)
            .into_iter()
            .map(|(k, v)| (nfc_trim(&k), v))
            .collect();
        let problems = self.problems();
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(KbError::Invalid(problems))
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for g in &self.governments {
            if g.start >= g.end {
                out.push(format!("government `{}` does not end after it starts", g.name));
            }
            if !names.insert(g.name.as_str()) {
                out.push(format!("government `{}` listed twice", g.name));
            }
        }
        for pair in self.governments.windows(2) {
            if pair[1].start < pair[0].end {
                out.push(format!(
                    "governments `{}` and `{}` overlap",
                    pair[0].name, pair[1].name
                ));
            }
        }
        let mut parties = HashSet::new();
        for p in &self.parties {
            if !parties.insert(p.name.as_str()) {
                out.push(format!("party `{}` listed twice", p.name));
            }
            for g in p.governments.keys() {
                if !names.contains(g.as_str()) {
                    out.push(format!("party `{}` references unknown government `{g}`", p.name));
                }
            }
        }
        for person in &self.persons {
            let who = format!("{} {}", person.given_name, person.surname);
            if person.surname.is_empty() {
                out.push("person with empty surname".into());
            }
            for a in &person.affiliations {
                if a.end.is_some_and(|end| end <= a.start) {
                    out.push(format!("{who}: affiliation ends before it starts"));
                }
                if let Some(party) = &a.party {
                    if !parties.contains(party.as_str()) {
                        out.push(format!("{who}: unknown party `{party}`"));
                    }
                }
                if a.institution.is_empty() || a.role_label.is_empty() {
                    out.push(format!("{who}: affiliation needs institution and role_label"));
                }
            }
            for pair in person.affiliations.windows(2) {
                if pair[0].end.is_none_or(|end| pair[1].start < end) {
                    out.push(format!("{who}: overlapping affiliations"));
                }
            }
        }
        let mut seen: HashMap<String, &str> = HashMap::new();
        for key in self.gazetteer.keys() {
            if let Some(prev) = seen.insert(nfc_trim(key), key) {
                out.push(format!("gazetteer repeats `{prev}`"));
            }
        }
        out
    }

    pub fn government(&self, name: &str) -> Option<&GovernmentPeriod> {
        self.governments.iter().find(|g| g.name == name)
    }

    pub fn party(&self, name: &str) -> Option<&PartyRecord> {
        self.parties.iter().find(|p| p.name == name)
    }

    /// Persons whose surname matches case- and accent-form-insensitively.
    pub fn persons_by_surname(&self, surname: &str) -> Vec<&PersonRecord> {
        let key = fold_key(surname);
        self.persons
            .iter()
            .filter(|p| fold_key(&p.surname) == key)
            .collect()
    }

    pub fn locate(&self, place: &str) -> Option<Coordinates> {
        self.gazetteer.get(&nfc_trim(place)).copied()
    }
}
