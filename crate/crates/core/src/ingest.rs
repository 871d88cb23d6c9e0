//! Reading raw diary rows (date, place, description) from delimited text.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One raw agenda entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiaryRecord {
    /// 1-based ordinal among accepted rows.
    pub record_id: String,
    pub date: NaiveDate,
    pub place: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateOrder {
    #[default]
    MonthFirst,
    DayFirst,
}

#[derive(Debug, Clone)]
pub struct FormatConfig {
    pub delimiter: char,
    /// RFC-4180 style quoting. Quoted fields may not span lines.
    pub quoted: bool,
    pub date_order: DateOrder,
    pub pivot_year: i32,
    pub earliest: NaiveDate,
    pub latest: NaiveDate,
}

impl Default for FormatConfig {
    fn default() -> Self {
        FormatConfig {
            delimiter: '\t',
            quoted: false,
            date_order: DateOrder::MonthFirst,
            pivot_year: 1970,
            earliest: NaiveDate::from_ymd_opt(1900, 1, 1).unwrap(),
            latest: NaiveDate::from_ymd_opt(2100, 12, 31).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    ColumnCount { found: usize },
    UnparseableDate { text: String },
    DateOutOfWindow { date: NaiveDate },
    EmptyPlace,
    EmptyDescription,
    ControlCharacter,
    BadQuoting { message: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::ColumnCount { found } => write!(f, "expected 3 columns, found {found}"),
            RejectReason::UnparseableDate { text } => write!(f, "unparseable date `{text}`"),
            RejectReason::DateOutOfWindow { date } => {
                write!(f, "date {date} outside the plausible window")
            }
            RejectReason::EmptyPlace => f.write_str("empty place"),
            RejectReason::EmptyDescription => f.write_str("empty description"),
            RejectReason::ControlCharacter => f.write_str("control character in text"),
            RejectReason::BadQuoting { message } => write!(f, "bad quoting: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    pub line: usize,
    #[serde(flatten)]
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub records: Vec<DiaryRecord>,
    pub rejects: Vec<Reject>,
    /// Lines starting with `#`.
    pub comments: usize,
    pub header_skipped: bool,
}

impl ParseOutcome {
    /// Number of nonblank lines this outcome accounts for.
    pub fn rows_seen(&self) -> usize {
        self.records.len() + self.rejects.len() + self.comments + usize::from(self.header_skipped)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    NotUtf8 { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unparseable date `{text}`")]
pub struct DateError {
    pub text: String,
}

/// Parses `5/30/06`-style dates (`/`, `-` or `.` separated). A leading
/// four-digit field is read as ISO year-month-day regardless of `order`.
/// Two-digit years land in the century window starting at `pivot_year`.
pub fn parse_date(text: &str, order: DateOrder, pivot_year: i32) -> Result<NaiveDate, DateError> {
    let err = || DateError {
        text: text.to_string(),
    };
    let parts: Vec<&str> = text.trim().split(['/', '-', '.']).collect();
    if parts.len() != 3
        || parts
            .iter()
            .any(|p| p.is_empty() || p.len() > 4 || !p.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(err());
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| err());
    let (year_text, month, day) = if parts[0].len() == 4 {
        (parts[0], num(parts[1])?, num(parts[2])?)
    } else {
        let (m, d) = match order {
            DateOrder::MonthFirst => (parts[0], parts[1]),
            DateOrder::DayFirst => (parts[1], parts[0]),
        };
        if m.len() > 2 || d.len() > 2 {
            return Err(err());
        }
        (parts[2], num(m)?, num(d)?)
    };
    let year = match year_text.len() {
        4 => year_text.parse::<i32>().map_err(|_| err())?,
        2 => expand_two_digit_year(year_text.parse().map_err(|_| err())?, pivot_year),
        _ => return Err(err()),
    };
    NaiveDate::from_ymd_opt(year, month, day).ok_or_else(err)
}

fn expand_two_digit_year(yy: i32, pivot: i32) -> i32 {
    let century = pivot - pivot.rem_euclid(100);
    let year = century + yy;
    if year >= pivot {
        year
    } else {
        year + 100
    }
}

/// Decodes `bytes` as UTF-8 and parses it. Only undecodable input is fatal.
pub fn parse_records_bytes(bytes: &[u8], config: &FormatConfig) -> Result<ParseOutcome, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::NotUtf8 {
        offset: e.valid_up_to(),
    })?;
    Ok(parse_records(text, config))
}

/// Parses delimited rows into records. Row problems go to `rejects` with
/// their 1-based line number; blank lines are ignored and `#` lines counted
/// as comments. A first data row whose date column reads `Date` is treated
/// as a header.
pub fn parse_records(input: &str, config: &FormatConfig) -> ParseOutcome {
    let mut out = ParseOutcome::default();
    let mut first_row = true;
    for (idx, raw_line) in input.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            out.comments += 1;
            continue;
        }
        let fields = match split_fields(line, config) {
            Ok(f) => f,
            Err(reason) => {
                out.rejects.push(Reject {
                    line: line_no,
                    reason,
                });
                first_row = false;
                continue;
            }
        };
        if first_row {
            first_row = false;
            let head = fields.first().map(|s| s.trim()).unwrap_or("");
            if head.eq_ignore_ascii_case("date")
                && parse_date(head, config.date_order, config.pivot_year).is_err()
            {
                out.header_skipped = true;
                continue;
            }
        }
        match build_record(&fields, config, out.records.len() + 1) {
            Ok(record) => out.records.push(record),
            Err(reason) => out.rejects.push(Reject {
                line: line_no,
                reason,
            }),
        }
    }
    out
}

fn split_fields(line: &str, config: &FormatConfig) -> Result<Vec<String>, RejectReason> {
    if !config.quoted {
        return Ok(line
            .splitn(3, config.delimiter)
            .map(str::to_string)
            .collect());
    }
    let delimiter = u8::try_from(config.delimiter).map_err(|_| RejectReason::BadQuoting {
        message: "quoted mode needs an ASCII delimiter".into(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(line.as_bytes());
    let mut record = csv::StringRecord::new();
    match reader.read_record(&mut record) {
        Ok(true) => {}
        Ok(false) => return Ok(Vec::new()),
        Err(e) => {
            return Err(RejectReason::BadQuoting {
                message: e.to_string(),
            })
        }
    }
    // A second record means an unbalanced quote swallowed a line break.
    let mut extra = csv::StringRecord::new();
    if let Ok(true) = reader.read_record(&mut extra) {
        return Err(RejectReason::BadQuoting {
            message: "quoted field spans lines".into(),
        });
    }
    Ok(record.iter().map(str::to_string).collect())
}

fn build_record(
    fields: &[String],
    config: &FormatConfig,
    ordinal: usize,
) -> Result<DiaryRecord, RejectReason> {
    if fields.len() != 3 {
        return Err(RejectReason::ColumnCount {
            found: fields.len(),
        });
    }
    let date_text = fields[0].trim();
    let date = parse_date(date_text, config.date_order, config.pivot_year).map_err(|_| {
        RejectReason::UnparseableDate {
            text: date_text.to_string(),
        }
    })?;
    if date < config.earliest || date > config.latest {
        return Err(RejectReason::DateOutOfWindow { date });
    }
    let place = fields[1].trim();
    let description = fields[2].trim();
    if place.is_empty() {
        return Err(RejectReason::EmptyPlace);
    }
    if description.is_empty() {
        return Err(RejectReason::EmptyDescription);
    }
    // XML 1.0 cannot carry these, and descriptions are re-exported as KML.
    if [place, description]
        .iter()
        .any(|s| s.chars().any(|c| c.is_control() && c != '\t'))
    {
        return Err(RejectReason::ControlCharacter);
    }
    Ok(DiaryRecord {
        record_id: ordinal.to_string(),
        date,
        place: place.to_string(),
        description: description.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn pipe() -> FormatConfig {
        FormatConfig {
            delimiter: '|',
            ..FormatConfig::default()
        }
    }

    #[test]
    fn sample_row_one() {
        let row = "5/30/06 | Palazzo del Quirinale | On. Sen. Franco MARINI, Presidente del Senato della Repubblica, e On. Fausto BERTINOTTI, Presidente della Camera dei Deputati";
        let out = parse_records(row, &pipe());
        assert!(out.rejects.is_empty());
        assert_eq!(
            out.records,
            vec![DiaryRecord {
                record_id: "1".into(),
                date: ymd(2006, 5, 30),
                place: "Palazzo del Quirinale".into(),
                description: "On. Sen. Franco MARINI, Presidente del Senato della Repubblica, e On. Fausto BERTINOTTI, Presidente della Camera dei Deputati".into(),
            }]
        );
    }

    #[test]
    fn empty_input() {
        let out = parse_records("", &FormatConfig::default());
        assert!(out.records.is_empty() && out.rejects.is_empty());
    }

    #[test]
    fn impossible_date_is_rejected_with_line() {
        let out = parse_records("\n13/45/06\tRoma\tqualcosa\n", &FormatConfig::default());
        assert!(out.records.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].line, 2);
        assert!(matches!(
            out.rejects[0].reason,
            RejectReason::UnparseableDate { .. }
        ));
    }

    #[test]
    fn parse_date_cases() {
        assert_eq!(parse_date("5/30/06", DateOrder::MonthFirst, 1970), Ok(ymd(2006, 5, 30)));
        assert_eq!(parse_date("6/7/06", DateOrder::MonthFirst, 1970), Ok(ymd(2006, 6, 7)));
        assert!(parse_date("2/29/07", DateOrder::MonthFirst, 1970).is_err());
        assert_eq!(parse_date("2/29/08", DateOrder::MonthFirst, 1970), Ok(ymd(2008, 2, 29)));
        assert_eq!(parse_date("7/6/06", DateOrder::DayFirst, 1970), Ok(ymd(2006, 6, 7)));
        assert_eq!(parse_date("1/1/99", DateOrder::MonthFirst, 1970), Ok(ymd(1999, 1, 1)));
        assert_eq!(parse_date("1/1/70", DateOrder::MonthFirst, 1970), Ok(ymd(1970, 1, 1)));
        assert_eq!(parse_date("6/7/2006", DateOrder::MonthFirst, 1970), Ok(ymd(2006, 6, 7)));
        assert_eq!(parse_date("2006-06-07", DateOrder::DayFirst, 1970), Ok(ymd(2006, 6, 7)));
        assert!(parse_date("Date", DateOrder::MonthFirst, 1970).is_err());
        assert!(parse_date("6/7", DateOrder::MonthFirst, 1970).is_err());
        assert!(parse_date("6/7/206", DateOrder::MonthFirst, 1970).is_err());
    }

    #[test]
    fn header_comments_and_blanks() {
        let input = "Date\tPlace\tDescription\n# note\n\n6/7/06\tPalazzo del Quirinale\tOn. Silvio BERLUSCONI, Presidente di Forza Italia\r\n";
        let out = parse_records(input, &FormatConfig::default());
        assert!(out.header_skipped);
        assert_eq!(out.comments, 1);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].record_id, "1");
        assert!(!out.records[0].description.ends_with('\r'));
    }

    #[test]
    fn internal_whitespace_is_preserved() {
        let out = parse_records("6/7/06\tRoma\t  a  b\tc  ", &FormatConfig::default());
        assert_eq!(out.records[0].description, "a  b\tc");
    }

    #[test]
    fn column_count_and_window() {
        let out = parse_records("6/7/06\tRoma\n6/7/1850\tRoma\tx\n", &FormatConfig::default());
        assert_eq!(out.rejects.len(), 2);
        assert_eq!(out.rejects[0].reason, RejectReason::ColumnCount { found: 2 });
        assert!(matches!(out.rejects[1].reason, RejectReason::DateOutOfWindow { .. }));
    }

    #[test]
    fn quoted_mode() {
        let cfg = FormatConfig {
            delimiter: ',',
            quoted: true,
            ..FormatConfig::default()
        };
        let out = parse_records(
            "6/7/06,\"Palazzo, Roma\",\"On. Silvio BERLUSCONI, Presidente di \"\"Forza Italia\"\"\"\n6/7/06,\"Roma,x\n",
            &cfg,
        );
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].place, "Palazzo, Roma");
        assert_eq!(
            out.records[0].description,
            "On. Silvio BERLUSCONI, Presidente di \"Forza Italia\""
        );
        assert_eq!(out.rejects.len(), 1);
    }

    #[test]
    fn undecodable_bytes_are_fatal() {
        assert!(parse_records_bytes(b"6/7/06\tRoma\t\xff\xfe", &FormatConfig::default()).is_err());
    }

    fn row_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("5/30/06\tPalazzo del Quirinale\tOn. Silvio BERLUSCONI".to_string()),
            Just("13/45/06\tRoma\tx".to_string()),
            Just("# comment".to_string()),
            Just("".to_string()),
            Just("   ".to_string()),
            Just("Date\tPlace\tDescription".to_string()),
            "[0-9/]{0,10}\t[a-zA-Z ]{0,8}\t[a-zA-Z ,]{0,12}",
            "[ -~\t]{0,30}",
        ]
    }

    proptest! {
        #[test]
        fn rows_are_conserved(rows in proptest::collection::vec(row_strategy(), 0..40)) {
            let input = rows.join("\n");
            let out = parse_records(&input, &FormatConfig::default());
            let nonblank = input.split('\n').filter(|l| !l.trim().is_empty()).count();
            prop_assert_eq!(out.rows_seen(), nonblank);
            prop_assert_eq!(parse_records(&input, &FormatConfig::default()), out);
        }
    }
}
