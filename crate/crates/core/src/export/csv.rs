use crate::analyze::{Crosstab, FrequencyTable, MeetingNetwork};
use crate::event::CodedEvent;
use crate::grammar::GrammarSchema;

fn finish(w: ::csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8 input yields UTF-8 output")
}

fn writer() -> ::csv::Writer<Vec<u8>> {
    ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

/// Columns: one per grouping path (header is the path), then `count`, then
/// `normalized` when any row carries it. Unset cells read `⟨unset⟩`.
pub fn frequency_csv(table: &FrequencyTable) -> String {
    let normalized = table.rows.iter().any(|r| r.normalized.is_some());
    let mut w = writer();
    let mut header: Vec<String> = table.group_by.iter().map(|p| p.to_string()).collect();
    header.push("count".into());
    if normalized {
        header.push("normalized".into());
    }
    w.write_record(&header).expect("in-memory write");
    for row in &table.rows {
        let mut rec: Vec<String> = row.key.iter().map(|v| v.to_string()).collect();
        rec.push(row.count.to_string());
        if normalized {
            rec.push(row.normalized.map(super::decimal).unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// First column holds row values, then one column per column value, then
/// `total`; the last row holds the column totals.
pub fn crosstab_csv(ct: &Crosstab) -> String {
    let mut w = writer();
    let mut header = vec![format!("{} \\ {}", ct.row_path, ct.col_path)];
    header.extend(ct.cols.iter().map(|c| c.to_string()));
    header.push("total".into());
    w.write_record(&header).expect("in-memory write");
    for (i, r) in ct.rows.iter().enumerate() {
        let mut rec = vec![r.to_string()];
        rec.extend(ct.cells[i].iter().map(u64::to_string));
        rec.push(ct.row_totals[i].to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    let mut rec = vec!["total".to_string()];
    rec.extend(ct.col_totals.iter().map(u64::to_string));
    rec.push(ct.total.to_string());
    w.write_record(&rec).expect("in-memory write");
    finish(w)
}

/// Columns: `source,target,weight`.
pub fn network_csv(net: &MeetingNetwork) -> String {
    let mut w = writer();
    w.write_record(["source", "target", "weight"]).expect("in-memory write");
    for e in &net.edges {
        w.write_record([net.ego.as_str(), e.label.as_str(), &e.weight.to_string()])
            .expect("in-memory write");
    }
    finish(w)
}

/// Columns: `record_id,ordinal,status,kind`, then one per value-bearing
/// schema path in schema order. Several values at a path are joined by "; ".
pub fn events_csv<'a>(schema: &GrammarSchema, events: impl IntoIterator<Item = &'a CodedEvent>) -> String {
    let paths = schema.value_paths();
    let mut w = writer();
    let mut header: Vec<String> = ["record_id", "ordinal", "status", "kind"].map(String::from).to_vec();
    header.extend(paths.iter().map(|p| p.to_string()));
    w.write_record(&header).expect("in-memory write");
    for e in events {
        let mut rec = vec![
            e.record_id.clone(),
            e.ordinal.to_string(),
            e.status.to_string(),
            e.kind.as_str().to_string(),
        ];
        rec.extend(paths.iter().map(|p| e.values_at(p).collect::<Vec<_>>().join("; ")));
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}
