use std::fs;
use std::path::Path;

use diario_core::analyze::{self, DurationUnit};
use diario_core::enrich::{Coder, CodingPaths};
use diario_core::export::{self, HistogramOptions};
use diario_core::grammar::{CategoryPath, GrammarSchema};
use diario_core::ingest::{parse_records_bytes, DateOrder, FormatConfig};
use diario_core::review::progress;
use diario_core::store::{Clause, EventStore, QueryFilter};
use diario_core::{ndjson, CodedEvent, DiaryRecord, KnowledgeBase, RoleVocabulary, Status};
use diario_review::{AppState, ServiceConfig};

use crate::args::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

type Result<T> = std::result::Result<T, CliError>;

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Code(a) => code(a),
        Command::Review(ReviewCommand::Serve(a)) => serve(a),
        Command::Query(a) => query(a),
        Command::Analyze(a) => analyze(a),
        Command::Export(a) => export(a),
    }
}

fn delimiter(spec: &str) -> Result<char> {
    Ok(match spec {
        "tab" | "\\t" | "tsv" => '\t',
        "comma" | "csv" => ',',
        "semicolon" => ';',
        "pipe" => '|',
        s if s.chars().count() == 1 => s.chars().next().expect("one char"),
        s => return Err(usage(format!("unknown delimiter `{s}`"))),
    })
}

fn ingest(a: IngestArgs) -> Result<()> {
    let config = FormatConfig {
        delimiter: delimiter(&a.format)?,
        quoted: a.quoted,
        date_order: match a.date_order {
            DateOrderArg::Md => DateOrder::MonthFirst,
            DateOrderArg::Dm => DateOrder::DayFirst,
        },
        pivot_year: a.pivot_year,
        ..FormatConfig::default()
    };
    let bytes = fs::read(&a.input).map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    let outcome = parse_records_bytes(&bytes, &config).map_err(data)?;
    for r in &outcome.rejects {
        eprintln!("{}:{}: {}", a.input.display(), r.line, r.reason);
    }
    ndjson::write_file(&a.out, &outcome.records).map_err(data)?;
    eprintln!("records={} rejects={}", outcome.records.len(), outcome.rejects.len());
    Ok(())
}

fn load_schema(path: &Path) -> Result<GrammarSchema> {
    GrammarSchema::from_json(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    KnowledgeBase::from_json(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn code(a: CodeArgs) -> Result<()> {
    let schema = load_schema(&a.schema)?;
    let vocab =
        RoleVocabulary::from_json(&read(&a.vocab)?).map_err(|e| CliError::Data(format!("{}: {e}", a.vocab.display())))?;
    let kb = load_kb(&a.kb)?;
    let records: Vec<DiaryRecord> = ndjson::read_file(&a.records).map_err(data)?;
    let events = Coder::new(&schema, &vocab, &kb).code_all(&records).map_err(data)?;
    let mut store = EventStore::new(schema);
    store.put_events(events).map_err(data)?;
    store.save(&a.store).map_err(data)?;
    let p = progress(&store);
    println!("auto={} flagged={}", p.auto, p.flagged);
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let state = AppState::open(ServiceConfig {
        store_dir: a.store.clone(),
        token: a.token,
        static_dir: a.ui,
    })
    .map_err(data)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(data)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port))
            .await
            .map_err(|e| CliError::Data(format!("cannot bind {}:{}: {e}", a.host, a.port)))?;
        eprintln!("review service on http://{}", listener.local_addr().map_err(data)?);
        diario_review::serve(listener, state).await.map_err(data)
    })
}

fn load_store(dir: &Path) -> Result<EventStore> {
    EventStore::load(dir).map_err(data)
}

fn parse_filter(schema: &GrammarSchema, clauses: &[String]) -> Result<QueryFilter> {
    let clauses = clauses
        .iter()
        .map(|c| Clause::parse(schema, c))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(usage)?;
    let filter = QueryFilter::new(clauses);
    filter.validate(schema).map_err(usage)?;
    Ok(filter)
}

fn parse_paths(schema: &GrammarSchema, paths: &[String]) -> Result<Vec<CategoryPath>> {
    paths
        .iter()
        .map(|p| CategoryPath::parse_in(schema, p).map_err(usage))
        .collect()
}

fn query(a: QueryArgs) -> Result<()> {
    let store = load_store(&a.store)?;
    let filter = parse_filter(store.schema(), &a.filter)?;
    let hits: Vec<&CodedEvent> = store
        .query(&filter)
        .map_err(usage)?
        .into_iter()
        .filter(|e| a.include_rejected || e.status != Status::Rejected)
        .collect();
    let text = match a.format {
        QueryFormat::Ndjson => ndjson::to_string(&hits),
        QueryFormat::Csv => export::events_csv(store.schema(), hits.iter().copied()),
    };
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    eprintln!("matched={}", hits.len());
    Ok(())
}

fn unit(u: UnitArg) -> DurationUnit {
    match u {
        UnitArg::Days => DurationUnit::Days,
        UnitArg::Weeks => DurationUnit::Weeks,
        UnitArg::Months => DurationUnit::Months,
        UnitArg::Years => DurationUnit::Years,
    }
}

/// Analysis input: non-rejected events passing the pre-filter.
fn selected(store: &EventStore, shape: &ShapeArgs) -> Result<Vec<CodedEvent>> {
    let filter = parse_filter(store.schema(), &shape.filter)?;
    Ok(store.analysis_events().into_iter().filter(|e| filter.matches(e)).collect())
}

fn prefixes(schema: &GrammarSchema, shape: &ShapeArgs) -> Result<Vec<CategoryPath>> {
    if shape.depth_prefix.is_empty() {
        Ok(CodingPaths::default().branches().collect())
    } else {
        parse_paths(schema, &shape.depth_prefix)
    }
}

fn normalized(store: &EventStore, shape: &ShapeArgs, mut events: Vec<CodedEvent>) -> Result<analyze::FrequencyTable> {
    let kb_path = shape
        .kb
        .as_ref()
        .ok_or_else(|| usage("normalised counts need --kb"))?;
    let kb = load_kb(kb_path)?;
    let government = CodingPaths::default().government;
    if shape.skip_unset {
        let before = events.len();
        events.retain(|e| e.first_value(&government).is_some());
        if events.len() != before {
            eprintln!("skipped {} events without a government", before - events.len());
        }
    }
    let extra = parse_paths(store.schema(), &shape.group_by)?;
    analyze::normalized_counts(store.schema(), &events, &kb, &government, &extra, unit(shape.unit)).map_err(data)
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let store = load_store(&a.store)?;
    let schema = store.schema();
    let events = selected(&store, &a.shape)?;
    let text = match a.analysis {
        Analysis::Freq => {
            let group_by = parse_paths(schema, &a.shape.group_by)?;
            export::frequency_csv(&analyze::frequency_table(schema, &events, &group_by).map_err(usage)?)
        }
        Analysis::Norm => export::frequency_csv(&normalized(&store, &a.shape, events)?),
        Analysis::Crosstab => {
            let [row, col] = <[CategoryPath; 2]>::try_from(parse_paths(schema, &a.shape.group_by)?)
                .map_err(|_| usage("crosstab needs exactly two --group-by paths"))?;
            export::crosstab_csv(&analyze::crosstab(schema, &events, &row, &col).map_err(usage)?)
        }
        Analysis::Network => {
            let prefixes = prefixes(schema, &a.shape)?;
            export::network_csv(&analyze::build_network(schema, &events, &prefixes).map_err(usage)?)
        }
    };
    write(&a.out, &text)
}

fn export(a: ExportArgs) -> Result<()> {
    let store = load_store(&a.store)?;
    let schema = store.schema();
    let events = selected(&store, &a.shape)?;
    let text = match a.artifact {
        Artifact::Kml => {
            let kb_path = a.shape.kb.as_ref().ok_or_else(|| usage("kml export needs --kb"))?;
            let kb = load_kb(kb_path)?;
            let paths = CodingPaths::default();
            let out = export::to_kml(&events, &kb.gazetteer, &paths.place, &paths.date);
            for u in &out.unlocated {
                eprintln!("unlocated {} place={}", u.key, u.place.as_deref().unwrap_or("-"));
            }
            eprintln!("located={} unlocated={}", out.located, out.unlocated.len());
            out.document
        }
        Artifact::Dot => {
            let prefixes = prefixes(schema, &a.shape)?;
            export::to_dot(&analyze::build_network(schema, &events, &prefixes).map_err(usage)?)
        }
        Artifact::Svg => {
            let table = if a.normalize {
                normalized(&store, &a.shape, events)?
            } else {
                let mut group_by = parse_paths(schema, &a.shape.group_by)?;
                if group_by.is_empty() {
                    group_by.push(CodingPaths::default().government);
                }
                analyze::frequency_table(schema, &events, &group_by).map_err(usage)?
            };
            let options = HistogramOptions {
                title: a.title.clone(),
                ..HistogramOptions::default()
            };
            export::to_histogram_svg(&table, &options).map_err(data)?
        }
    };
    write(&a.out, &text)
}
