//! Filling grammar categories from extracted mentions and the knowledge base.

mod kb;

pub use kb::{
    Affiliation, Alignment, Coordinates, GovernmentPeriod, KbError, KnowledgeBase, PartyRecord,
    PartyStanding, PersonRecord, PowerBranch, Standing,
};

use chrono::NaiveDate;
use thiserror::Error;

use crate::event::{Assignment, CodedEvent, EventKey, FlagReason, Provenance, Status};
use crate::extract::{classify_event, extract_actors, ActorMention, EventKind, RoleVocabulary};
use crate::grammar::{validate_event, CategoryPath, GrammarSchema, Violation};
use crate::ingest::DiaryRecord;
use crate::text::fold_key;

/// Where the coder writes each piece of information. The defaults match the
/// bundled schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingPaths {
    pub subject: CategoryPath,
    pub verb: CategoryPath,
    pub object: CategoryPath,
    pub date: CategoryPath,
    pub place: CategoryPath,
    pub party_role: CategoryPath,
    pub government: CategoryPath,
    pub standing: CategoryPath,
    pub alignment: CategoryPath,
    pub party_name: CategoryPath,
    /// Parent of the per-branch containers.
    pub branch_root: CategoryPath,
    pub legislative: String,
    pub executive: String,
    pub judiciary: String,
    pub other: String,
}

impl Default for CodingPaths {
    fn default() -> Self {
        let orgs = CategoryPath::new(["Internal Politics", "Political Organizations"]);
        CodingPaths {
            subject: CategoryPath::new(["Subject"]),
            verb: CategoryPath::new(["Verb"]),
            object: CategoryPath::new(["Object"]),
            date: CategoryPath::new(["Date"]),
            place: CategoryPath::new(["Place"]),
            party_role: orgs.child("Political Parties"),
            government: orgs.child("Goverment"),
            standing: orgs.child("Parliamentary/Extraparliamentary"),
            alignment: orgs.child("Majority/Minority Political Parties"),
            party_name: orgs.child("Party Name"),
            branch_root: CategoryPath::new(["Internal Politics"]),
            legislative: "Legislative Power".into(),
            executive: "Executive Power".into(),
            judiciary: "Judicial Power".into(),
            other: "Other Institutions".into(),
        }
    }
}

impl CodingPaths {
    pub fn branch(&self, branch: PowerBranch) -> CategoryPath {
        let name = match branch {
            PowerBranch::Legislative => &self.legislative,
            PowerBranch::Executive => &self.executive,
            PowerBranch::Judiciary => &self.judiciary,
            PowerBranch::Other => &self.other,
        };
        self.branch_root.child(name)
    }

    /// The four branch containers, legislative first.
    pub fn branches(&self) -> impl Iterator<Item = CategoryPath> + '_ {
        [
            PowerBranch::Legislative,
            PowerBranch::Executive,
            PowerBranch::Judiciary,
            PowerBranch::Other,
        ]
        .into_iter()
        .map(|b| self.branch(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingConfig {
    /// The fixed ego actor written into `Subject` for every event.
    pub subject: String,
    pub paths: CodingPaths,
}

impl Default for CodingConfig {
    fn default() -> Self {
        CodingConfig {
            subject: "Presidente della Repubblica".into(),
            paths: CodingPaths::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnrichError {
    #[error("no government in office on {0}")]
    NoGovernment(NaiveDate),
}

/// The government with `start <= date < end`.
pub fn government_for_date(kb: &KnowledgeBase, date: NaiveDate) -> Result<&GovernmentPeriod, EnrichError> {
    let idx = kb.governments.partition_point(|g| g.start <= date);
    idx.checked_sub(1)
        .map(|i| &kb.governments[i])
        .filter(|g| g.contains(date))
        .ok_or(EnrichError::NoGovernment(date))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unresolved {
    NotFound,
    Ambiguous,
}

impl Unresolved {
    pub fn flag(self) -> FlagReason {
        match self {
            Unresolved::NotFound => FlagReason::UnresolvedActor,
            Unresolved::Ambiguous => FlagReason::AmbiguousName,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActorResolution {
    Resolved(Vec<Assignment>),
    Unresolved(Unresolved),
}

/// Looks the mention up by surname (given name breaks ties) and emits the
/// enrichment assignments valid on `date`. Attributes that do not apply are
/// left out.
pub fn resolve_actor(
    mention: &ActorMention,
    date: NaiveDate,
    kb: &KnowledgeBase,
    paths: &CodingPaths,
) -> ActorResolution {
    let mut matches = kb.persons_by_surname(&mention.surname_title);
    if matches.len() > 1 {
        if mention.given_name.is_empty() {
            return ActorResolution::Unresolved(Unresolved::Ambiguous);
        }
        let given = fold_key(&mention.given_name);
        matches.retain(|p| fold_key(&p.given_name) == given);
        if matches.len() != 1 {
            return ActorResolution::Unresolved(Unresolved::Ambiguous);
        }
    }
    let Some(person) = matches.first() else {
        return ActorResolution::Unresolved(Unresolved::NotFound);
    };

    let government = government_for_date(kb, date).ok();
    let affiliation = person.affiliations.iter().find(|a| a.contains(date));
    let enriched = |path: &CategoryPath, value: &str| Assignment::new(path.clone(), value, Provenance::Enriched);

    let mut out = Vec::new();
    if let Some(role) = affiliation.and_then(|a| a.party_role.as_deref()) {
        out.push(enriched(&paths.party_role, role));
    }
    if let Some(g) = government {
        out.push(enriched(&paths.government, &g.name));
    }
    let party = affiliation.and_then(|a| a.party.as_deref());
    let standing = party
        .and_then(|name| kb.party(name))
        .zip(government)
        .and_then(|(p, g)| p.governments.get(&g.name));
    if let Some(s) = standing {
        out.push(enriched(&paths.standing, s.standing.label()));
        out.push(enriched(&paths.alignment, s.alignment.label()));
    }
    if let Some(name) = party {
        out.push(enriched(&paths.party_name, name));
    }
    if let Some(a) = affiliation {
        out.push(enriched(&paths.branch(a.power_branch).child(&a.institution), &a.role_label));
    }
    ActorResolution::Resolved(out)
}

#[derive(Debug, Error)]
pub enum CodingError {
    #[error("coded event {key} violates the schema: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    SchemaViolation {
        key: EventKey,
        violations: Vec<Violation>,
    },
}

/// Turns diary records into coded events.
pub struct Coder<'a> {
    pub schema: &'a GrammarSchema,
    pub vocab: &'a RoleVocabulary,
    pub kb: &'a KnowledgeBase,
    pub config: CodingConfig,
}

impl<'a> Coder<'a> {
    pub fn new(schema: &'a GrammarSchema, vocab: &'a RoleVocabulary, kb: &'a KnowledgeBase) -> Self {
        Coder {
            schema,
            vocab,
            kb,
            config: CodingConfig::default(),
        }
    }

    /// Extracts, classifies and codes one record.
    pub fn code(&self, record: &DiaryRecord) -> Result<Vec<CodedEvent>, CodingError> {
        let mentions = extract_actors(&record.description, self.vocab);
        let kind = classify_event(&record.description, &mentions, self.vocab);
        self.code_record(record, &mentions, kind)
    }

    pub fn code_all(&self, records: &[DiaryRecord]) -> Result<Vec<CodedEvent>, CodingError> {
        let mut out = Vec::with_capacity(records.len());
        for r in records {
            out.extend(self.code(r)?);
        }
        Ok(out)
    }

    /// One event per mention for meetings, a single event otherwise.
    ///
    /// Flags are decided per event: an unresolved or low-confidence actor
    /// only flags its own event, not the other actors of the same record.
    pub fn code_record(
        &self,
        record: &DiaryRecord,
        mentions: &[ActorMention],
        kind: EventKind,
    ) -> Result<Vec<CodedEvent>, CodingError> {
        let paths = &self.config.paths;
        let extracted = |path: &CategoryPath, value: &str| Assignment::new(path.clone(), value, Provenance::Extracted);
        let spans: Vec<_> = mentions.iter().map(|m| m.extent).collect();

        let base = |ordinal: u32| {
            let mut e = CodedEvent::new(record.record_id.clone(), ordinal);
            e.kind = kind;
            e.description = record.description.clone();
            e.mentions = spans.clone();
            e
        };
        let tail = [
            extracted(&paths.date, &record.date.format("%Y-%m-%d").to_string()),
            extracted(&paths.place, &record.place),
        ];

        let mut events = Vec::new();
        if kind == EventKind::Meeting && !mentions.is_empty() {
            for (n, mention) in mentions.iter().enumerate() {
                let mut e = base(n as u32 + 1);
                e.actor = Some(n);
                e.assignments.push(extracted(&paths.subject, &self.config.subject));
                e.assignments.push(extracted(&paths.verb, &self.vocab.meeting_verb));
                e.assignments.push(extracted(&paths.object, &mention.display_name()));
                e.flags = mention.flags();
                match resolve_actor(mention, record.date, self.kb, paths) {
                    ActorResolution::Resolved(enrichment) => e.assignments.extend(enrichment),
                    ActorResolution::Unresolved(why) => e.flags.push(why.flag()),
                }
                e.assignments.extend(tail.iter().cloned());
                events.push(e);
            }
        } else {
            let mut e = base(1);
            e.assignments.push(extracted(&paths.subject, &self.config.subject));
            e.assignments.extend(tail.iter().cloned());
            if kind == EventKind::Unclassified {
                e.flags.push(FlagReason::Unclassified);
            }
            events.push(e);
        }

        for e in &mut events {
            e.flags.sort();
            e.flags.dedup();
            e.status = if e.flags.is_empty() {
                Status::Auto
            } else {
                Status::Flagged
            };
            let violations = validate_event(self.schema, e);
            if !violations.is_empty() {
                return Err(CodingError::SchemaViolation {
                    key: e.key(),
                    violations,
                });
            }
        }
        Ok(events)
    }
}
