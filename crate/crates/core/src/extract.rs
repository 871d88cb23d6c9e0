//! Rule-based actor extraction and event classification.
//!
//! The diary writes every counterpart as `[titles] [Given names] SURNAME`,
//! optionally followed by `, role phrase`. Extraction anchors on runs of
//! ALL-CAPS tokens, extends leftwards over capitalized given names and then
//! over honorific tokens from the vocabulary, and reads the role phrase that
//! follows the comma up to the next joining delimiter.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{FlagReason, Status};
use crate::text::{fold_key, nfc, nfc_trim, title_case};

const MAX_GIVEN_TOKENS: usize = 2;
const LEADING_PUNCT: &[char] = &['(', '[', '"', '«', '“'];
const TRAILING_PUNCT: &[char] = &[',', ';', ':', '.', '!', '?', ')', ']', '"', '»', '”'];

static TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\S+").unwrap());
static ROLE_END: LazyLock<Regex> = LazyLock::new(|| Regex::new(r",\s+e\s|\se\s|;").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Honorific {
    pub token: String,
    pub hint: String,
}

/// Closed vocabulary driving extraction; loaded from a JSON file so the
/// rules can be retargeted without code changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleVocabulary {
    pub honorifics: Vec<Honorific>,
    pub ceremony_markers: Vec<String>,
    #[serde(default)]
    pub org_stoplist: Vec<String>,
    #[serde(default = "default_meeting_verb")]
    pub meeting_verb: String,
    /// Surname particles (`DI`, `DEL`) that never form a surname alone.
    #[serde(default = "default_particles")]
    pub surname_particles: Vec<String>,
}

fn default_meeting_verb() -> String {
    "incontra".into()
}

fn default_particles() -> Vec<String> {
    ["DI", "DE", "DEL", "DELLA", "DELLE", "DEI", "DEGLI", "DA", "DAL", "DALLA", "LA", "LO"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("vocabulary list `{0}` is empty")]
    Empty(&'static str),
    #[error("vocabulary list `{list}` repeats `{entry}`")]
    Duplicate { list: &'static str, entry: String },
}

impl RoleVocabulary {
    pub fn from_json(json: &str) -> Result<Self, VocabError> {
        let raw: RoleVocabulary = serde_json::from_str(json)?;
        raw.normalized()
    }

    /// NFC-normalizes every entry and checks the list invariants.
    pub fn normalized(mut self) -> Result<Self, VocabError> {
        for h in &mut self.honorifics {
            h.token = nfc_trim(&h.token);
        }
        for list in [
            &mut self.ceremony_markers,
            &mut self.org_stoplist,
            &mut self.surname_particles,
        ] {
            for entry in list.iter_mut() {
                *entry = nfc_trim(entry);
            }
        }
        self.meeting_verb = nfc_trim(&self.meeting_verb);

        if self.honorifics.is_empty() {
            return Err(VocabError::Empty("honorifics"));
        }
        if self.ceremony_markers.is_empty() {
            return Err(VocabError::Empty("ceremony_markers"));
        }
        let tokens: Vec<String> = self.honorifics.iter().map(|h| h.token.clone()).collect();
        check_unique("honorifics", &tokens)?;
        check_unique("ceremony_markers", &self.ceremony_markers)?;
        check_unique("org_stoplist", &self.org_stoplist)?;
        check_unique("surname_particles", &self.surname_particles)?;
        Ok(self)
    }

    pub fn is_honorific(&self, token: &str) -> bool {
        let token = nfc(token);
        self.honorifics.iter().any(|h| h.token == token)
    }

    pub fn hint(&self, token: &str) -> Option<&str> {
        let token = nfc(token);
        self.honorifics
            .iter()
            .find(|h| h.token == token)
            .map(|h| h.hint.as_str())
    }

    fn is_stoplisted(&self, text: &str) -> bool {
        self.org_stoplist.iter().any(|s| *s == text)
    }

    fn is_particle(&self, text: &str) -> bool {
        self.surname_particles.iter().any(|s| *s == text)
    }
}

fn check_unique(list: &'static str, entries: &[String]) -> Result<(), VocabError> {
    let mut seen = std::collections::HashSet::new();
    for e in entries {
        if e.is_empty() {
            return Err(VocabError::Empty(list));
        }
        if !seen.insert(e) {
            return Err(VocabError::Duplicate {
                list,
                entry: e.clone(),
            });
        }
    }
    Ok(())
}

/// Half-open range of character (not byte) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Slices `text` by character offsets.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
        let start = indices.nth(self.start).unwrap_or(text.len());
        let end = if self.end > self.start {
            indices.nth(self.end - self.start - 1).unwrap_or(text.len())
        } else {
            start
        };
        &text[start..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    High,
    Low,
}

/// One person found in a description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorMention {
    pub honorifics: Vec<String>,
    pub given_name: String,
    /// Surname as written (upper case).
    pub surname: String,
    /// Title-cased surname used for knowledge-base matching.
    pub surname_title: String,
    pub role_phrase: String,
    /// Character span of the surname tokens.
    pub span: CharSpan,
    /// Character span from the first honorific or given name to the surname.
    pub extent: CharSpan,
    pub confidence: Confidence,
}

impl ActorMention {
    /// `On. Silvio BERLUSCONI`.
    pub fn display_name(&self) -> String {
        let mut parts: Vec<&str> = self.honorifics.iter().map(String::as_str).collect();
        if !self.given_name.is_empty() {
            parts.push(&self.given_name);
        }
        parts.push(&self.surname);
        parts.join(" ")
    }

    pub fn flags(&self) -> Vec<FlagReason> {
        let mut out = Vec::new();
        if self.honorifics.is_empty() {
            out.push(FlagReason::NoHonorific);
        }
        if self.role_phrase.is_empty() {
            out.push(FlagReason::MissingRole);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Meeting,
    CeremonyOrSpeech,
    Unclassified,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Meeting => "meeting",
            EventKind::CeremonyOrSpeech => "ceremony_or_speech",
            EventKind::Unclassified => "unclassified",
        }
    }
}

struct Token<'a> {
    /// Byte range of the token without surrounding punctuation.
    core_start: usize,
    core_end: usize,
    start: usize,
    core: &'a str,
    leading: bool,
    trailing: bool,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    TOKEN
        .find_iter(text)
        .map(|m| {
            let raw = m.as_str();
            let without_lead = raw.trim_start_matches(LEADING_PUNCT);
            let core = without_lead.trim_end_matches(TRAILING_PUNCT);
            let core_start = m.start() + (raw.len() - without_lead.len());
            Token {
                core_start,
                core_end: core_start + core.len(),
                start: m.start(),
                core,
                leading: core_start != m.start(),
                trailing: core_start + core.len() != m.end(),
            }
        })
        .collect()
}

fn is_surname_token(core: &str) -> bool {
    let core = nfc(core);
    let letters = core.chars().filter(|c| c.is_alphabetic()).count();
    let first = core.chars().next();
    let last = core.chars().last();
    letters >= 2
        && first.is_some_and(char::is_uppercase)
        && last.is_some_and(char::is_uppercase)
        && core
            .chars()
            .all(|c| c.is_uppercase() || matches!(c, '\'' | '’' | '-'))
}

fn is_given_token(core: &str) -> bool {
    let core = nfc(core);
    let mut chars = core.chars();
    chars.next().is_some_and(char::is_uppercase)
        && core.chars().any(char::is_lowercase)
        && core
            .chars()
            .all(|c| c.is_alphabetic() || matches!(c, '\'' | '’' | '-'))
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Finds actor mentions, left to right with non-overlapping spans.
///
/// Honorific-less candidates whose surname is on the organization stop-list
/// (`FAO`) are dropped. A mention is low-confidence when it has no honorific
/// or no role phrase.
pub fn extract_actors(description: &str, vocab: &RoleVocabulary) -> Vec<ActorMention> {
    struct Candidate {
        honor: std::ops::Range<usize>,
        given: std::ops::Range<usize>,
        surname: std::ops::Range<usize>,
    }

    let tokens = tokenize(description);
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut floor = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !is_surname_token(tokens[i].core) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i + 1;
        while j < tokens.len()
            && !tokens[j - 1].trailing
            && !tokens[j].leading
            && is_surname_token(tokens[j].core)
        {
            j += 1;
        }
        let run = run_start..j;
        i = j;

        let words: Vec<String> = tokens[run.clone()].iter().map(|t| nfc(t.core)).collect();
        if words.iter().all(|w| vocab.is_particle(w)) {
            continue;
        }

        let mut g = run_start;
        while g > floor
            && run_start - g < MAX_GIVEN_TOKENS
            && !tokens[g - 1].trailing
            && !vocab.is_honorific(token_text(description, &tokens[g - 1]))
            && is_given_token(tokens[g - 1].core)
        {
            g -= 1;
        }
        let mut h = g;
        while h > floor && vocab.is_honorific(token_text(description, &tokens[h - 1])) {
            h -= 1;
        }

        if h == g {
            let joined = words.join(" ");
            if vocab.is_stoplisted(&joined) || words.iter().all(|w| vocab.is_stoplisted(w)) {
                continue;
            }
        }
        candidates.push(Candidate {
            honor: h..g,
            given: g..run_start,
            surname: run,
        });
        floor = j;
    }

    let mut mentions = Vec::with_capacity(candidates.len());
    for (n, c) in candidates.iter().enumerate() {
        let surname_start = tokens[c.surname.start].core_start;
        let surname_end = tokens[c.surname.end - 1].core_end;
        let extent_start = if c.honor.start < c.surname.start {
            tokens[c.honor.start].core_start
        } else {
            surname_start
        };
        // Role phrases stop before the next honorific-led mention. Bare
        // candidates do not cut them, so the stop-list never changes the
        // fields of the mentions that survive it.
        let next_limit = candidates[n + 1..]
            .iter()
            .find(|c| !c.honor.is_empty())
            .map(|c| tokens[c.honor.start].start)
            .unwrap_or(description.len());
        let role_phrase = read_role(description, surname_end, next_limit);

        let honorifics: Vec<String> = tokens[c.honor.clone()]
            .iter()
            .map(|t| nfc(token_text(description, t)))
            .collect();
        let given_name = tokens[c.given.clone()]
            .iter()
            .map(|t| nfc(t.core))
            .collect::<Vec<_>>()
            .join(" ");
        let surname = description[surname_start..surname_end].to_string();
        let confidence = if honorifics.is_empty() || role_phrase.is_empty() {
            Confidence::Low
        } else {
            Confidence::High
        };
        mentions.push(ActorMention {
            honorifics,
            given_name,
            surname_title: title_case(&nfc(&surname)),
            surname,
            role_phrase,
            span: CharSpan {
                start: char_offset(description, surname_start),
                end: char_offset(description, surname_end),
            },
            extent: CharSpan {
                start: char_offset(description, extent_start),
                end: char_offset(description, surname_end),
            },
            confidence,
        });
    }
    mentions
}

/// Honorifics keep their trailing period (`On.`) but drop a leading bracket.
fn token_text<'a>(text: &'a str, t: &Token<'_>) -> &'a str {
    let end = t.core_end + text[t.core_end..].find(char::is_whitespace).unwrap_or(text.len() - t.core_end);
    text[t.core_start..end].trim_end_matches([',', ';', ':'])
}

fn read_role(text: &str, after_surname: usize, limit: usize) -> String {
    let rest = &text[after_surname..];
    let trimmed = rest.trim_start();
    if !trimmed.starts_with(',') {
        return String::new();
    }
    let start = after_surname + (rest.len() - trimmed.len()) + 1;
    if start >= limit {
        return String::new();
    }
    let window = &text[start..limit];
    let end = ROLE_END.find(window).map(|m| m.start()).unwrap_or(window.len());
    nfc(window[..end].trim().trim_end_matches(',').trim_end())
}

/// Meeting iff at least one mention; otherwise a ceremony when the trimmed
/// description starts with a ceremony marker (case-insensitive, whole word).
pub fn classify_event(description: &str, mentions: &[ActorMention], vocab: &RoleVocabulary) -> EventKind {
    if !mentions.is_empty() {
        return EventKind::Meeting;
    }
    let text = fold_key(description);
    for marker in &vocab.ceremony_markers {
        let marker = marker.to_lowercase();
        if let Some(rest) = text.strip_prefix(&marker) {
            if !rest.chars().next().is_some_and(char::is_alphanumeric) {
                return EventKind::CeremonyOrSpeech;
            }
        }
    }
    EventKind::Unclassified
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewFlag {
    pub status: Status,
    pub reasons: Vec<FlagReason>,
}

/// Record-level review decision from extraction alone. Knowledge-base
/// misses are added later by the coder, which can only escalate.
pub fn flag_for_review(mentions: &[ActorMention], kind: EventKind) -> ReviewFlag {
    let mut reasons = Vec::new();
    if kind == EventKind::Unclassified {
        reasons.push(FlagReason::Unclassified);
    }
    for m in mentions {
        for r in m.flags() {
            if !reasons.contains(&r) {
                reasons.push(r);
            }
        }
    }
    reasons.sort();
    let status = if reasons.is_empty() {
        Status::Auto
    } else {
        Status::Flagged
    };
    ReviewFlag { status, reasons }
}
