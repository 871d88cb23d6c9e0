//! Seeded synthetic diary corpora with a matching knowledge base and the
//! mentions the extractor is expected to find.

use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use indexmap::IndexMap;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enrich::{
    Affiliation, Alignment, Coordinates, GovernmentPeriod, KnowledgeBase, PartyRecord, PartyStanding, PersonRecord,
    PowerBranch, Standing,
};
use crate::extract::{EventKind, RoleVocabulary};
use crate::ingest::DiaryRecord;

const SYLLABLES: &[&str] = &[
    "RO", "SSI", "BA", "LDI", "MA", "RI", "NO", "TE", "LLI", "GA", "VI", "CO", "NTI", "FE", "RRA", "ZZI", "PE", "LU",
    "GHI", "SA", "BO", "TTA", "NE", "GRI", "MO",
];
const GIVEN: &[&str] = &[
    "Mario", "Giulia", "Franco", "Anna", "Luca", "Paola", "Giorgio", "Elena", "Pier", "Rosa",
];
const HONORIFICS: &[&str] = &["On.", "Sen.", "Ministro", "Prof.", "Dott.", "Gen.", "On. Sen."];
const ROLES: &[&str] = &[
    "Presidente del Senato della Repubblica",
    "Ministro degli Affari Esteri",
    "Presidente della Corte costituzionale",
    "Sindaco di Roma",
    "Vicepresidente del Consiglio superiore della magistratura",
    "Sottosegretario alla Presidenza del Consiglio",
    "Capogruppo alla Camera dei Deputati",
];
const CEREMONIES: &[&str] = &[
    "Intervento alla cerimonia di apertura dell'anno accademico",
    "Cerimonia di consegna delle onorificenze promossa dalla FAO",
    "Partecipazione al concerto per la Festa della Repubblica",
    "Visita alla sede della RAI",
    "Messaggio di fine anno",
    "Inaugurazione della mostra al Vittoriano",
];
const OTHER: &[&str] = &[
    "Colazione di lavoro",
    "Riunione con una delegazione ONU",
    "Udienza generale",
    "Conferenza stampa congiunta",
    "Colloquio telefonico",
];
const PLACES: &[&str] = &[
    "Palazzo del Quirinale",
    "Palazzo Giustiniani",
    "Castelporziano",
    "Villa Rosebery",
];

/// (branch, institution leaf) pairs present in the bundled schema.
const POSTS: &[(PowerBranch, &str)] = &[
    (PowerBranch::Legislative, "Chamber of Deputies"),
    (PowerBranch::Legislative, "Senate"),
    (PowerBranch::Executive, "Council of Ministers"),
    (PowerBranch::Judiciary, "Constitutional Court"),
    (PowerBranch::Judiciary, "Superior Council of the Magistracy"),
    (PowerBranch::Other, "Local Government"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub records: usize,
    /// Probabilities of a meeting and of a ceremony; the rest is neither.
    pub p_meeting: f64,
    pub p_ceremony: f64,
    /// Share of people who are absent from the knowledge base.
    pub p_unknown: f64,
    /// Chance that a mention carries no honorific.
    pub p_no_honorific: f64,
    pub max_actors: usize,
    pub people: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            records: 200,
            p_meeting: 0.6,
            p_ceremony: 0.25,
            p_unknown: 0.15,
            p_no_honorific: 0.1,
            max_actors: 3,
            people: 40,
        }
    }
}

/// What the extractor should report for one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedRecord {
    pub kind: EventKind,
    pub surnames: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub records: Vec<DiaryRecord>,
    pub expected: Vec<ExpectedRecord>,
    pub kb: KnowledgeBase,
}

struct Person {
    surname: String,
    given: String,
}

fn surname(rng: &mut ChaCha8Rng, vocab: &RoleVocabulary, taken: &BTreeSet<String>) -> String {
    loop {
        let n = rng.random_range(2..=3);
        let s: String = (0..n).map(|_| *SYLLABLES.choose(rng).expect("nonempty")).collect();
        let reserved = vocab.org_stoplist.contains(&s) || vocab.surname_particles.contains(&s);
        if !reserved && !taken.contains(&s) {
            return s;
        }
    }
}

/// Two consecutive governments starting 2001-01-01 with random lengths.
fn governments(rng: &mut ChaCha8Rng) -> Vec<GovernmentPeriod> {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date");
    let mid = start + Days::new(rng.random_range(100..=800));
    let end = mid + Days::new(rng.random_range(100..=800));
    vec![
        GovernmentPeriod {
            name: "Governo Alfa".into(),
            start,
            end: mid,
        },
        GovernmentPeriod {
            name: "Governo Beta".into(),
            start: mid,
            end,
        },
    ]
}

pub fn generate(seed: u64, config: &SynthConfig, vocab: &RoleVocabulary) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let governments = governments(&mut rng);
    let parties: Vec<PartyRecord> = ["Partito Uno", "Partito Due", "Partito Tre"]
        .iter()
        .map(|name| PartyRecord {
            name: name.to_string(),
            governments: governments
                .iter()
                .map(|g| {
                    let alignment = if rng.random_bool(0.5) {
                        Alignment::Majority
                    } else {
                        Alignment::Minority
                    };
                    let standing = if rng.random_bool(0.8) {
                        Standing::Parliamentary
                    } else {
                        Standing::Extraparliamentary
                    };
                    (g.name.clone(), PartyStanding { alignment, standing })
                })
                .collect(),
        })
        .collect();

    let mut taken = BTreeSet::new();
    let mut people = Vec::new();
    let mut persons = Vec::new();
    for _ in 0..config.people.max(1) {
        let s = surname(&mut rng, vocab, &taken);
        taken.insert(s.clone());
        let given = GIVEN.choose(&mut rng).expect("nonempty").to_string();
        if !rng.random_bool(config.p_unknown) {
            let (branch, institution) = *POSTS.choose(&mut rng).expect("nonempty");
            let partisan = matches!(branch, PowerBranch::Legislative | PowerBranch::Executive);
            persons.push(PersonRecord {
                surname: s.clone(),
                given_name: given.clone(),
                affiliations: vec![Affiliation {
                    start: governments[0].start,
                    end: None,
                    party: partisan.then(|| parties.choose(&mut rng).expect("nonempty").name.clone()),
                    party_role: (partisan && rng.random_bool(0.3)).then(|| "Leader of party".to_string()),
                    power_branch: branch,
                    institution: institution.to_string(),
                    role_label: ROLES.choose(&mut rng).expect("nonempty").to_string(),
                }],
            });
        }
        people.push(Person { surname: s, given });
    }

    let first = governments[0].start;
    let span = (governments[1].end - first).num_days() as u64;
    let mut records = Vec::with_capacity(config.records);
    let mut expected = Vec::with_capacity(config.records);
    for i in 0..config.records {
        let date = first + Days::new(rng.random_range(0..span));
        let place = PLACES.choose(&mut rng).expect("nonempty").to_string();
        let roll: f64 = rng.random();
        let (description, exp) = if roll < config.p_meeting {
            let n = rng.random_range(1..=config.max_actors.max(1));
            let mut chosen: Vec<&Person> = Vec::with_capacity(n);
            while chosen.len() < n.min(people.len()) {
                let p = people.choose(&mut rng).expect("nonempty");
                if !chosen.iter().any(|c| c.surname == p.surname) {
                    chosen.push(p);
                }
            }
            let parts: Vec<String> = chosen
                .iter()
                .map(|p| {
                    let mut s = String::new();
                    if !rng.random_bool(config.p_no_honorific) {
                        s.push_str(HONORIFICS.choose(&mut rng).expect("nonempty"));
                        s.push(' ');
                    }
                    if rng.random_bool(0.8) {
                        s.push_str(&p.given);
                        s.push(' ');
                    }
                    s.push_str(&p.surname);
                    if rng.random_bool(0.9) {
                        s.push_str(", ");
                        s.push_str(ROLES.choose(&mut rng).expect("nonempty"));
                    }
                    s
                })
                .collect();
            let exp = ExpectedRecord {
                kind: EventKind::Meeting,
                surnames: chosen.iter().map(|p| p.surname.clone()).collect(),
            };
            (parts.join(", e "), exp)
        } else if roll < config.p_meeting + config.p_ceremony {
            let text = CEREMONIES.choose(&mut rng).expect("nonempty").to_string();
            (
                text,
                ExpectedRecord {
                    kind: EventKind::CeremonyOrSpeech,
                    surnames: vec![],
                },
            )
        } else {
            let text = OTHER.choose(&mut rng).expect("nonempty").to_string();
            (
                text,
                ExpectedRecord {
                    kind: EventKind::Unclassified,
                    surnames: vec![],
                },
            )
        };
        records.push(DiaryRecord {
            record_id: (i + 1).to_string(),
            date,
            place,
            description,
        });
        expected.push(exp);
    }

    let gazetteer: IndexMap<String, Coordinates> = [
        ("Palazzo del Quirinale", 41.899606, 12.487339),
        ("Palazzo Giustiniani", 41.89917, 12.47528),
        ("Castelporziano", 41.7425, 12.4),
    ]
    .into_iter()
    .map(|(n, lat, lon)| (n.to_string(), Coordinates { lat, lon }))
    .collect();

    let kb = KnowledgeBase {
        note: "synthetic".into(),
        governments,
        parties,
        persons,
        gazetteer,
    }
    .normalized()
    .expect("generated knowledge base is consistent");

    SyntheticCorpus { records, expected, kb }
}
