use std::io::{self, BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::Deserialize;

use super::{IngestError, IngestWarning, L2Record, Side, TimestampNs};
use crate::decimal::Decimal;

pub const L2CSV_HEADER: &str = "timestamp_ns,symbol,side,level,price,size";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Format {
    L2Csv,
    L2Jsonl,
}

impl FromStr for L2Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l2csv" | "csv" => Ok(L2Format::L2Csv),
            "l2jsonl" | "jsonl" => Ok(L2Format::L2Jsonl),
            other => Err(format!("unknown format `{other}` (expected l2csv or l2jsonl)")),
        }
    }
}

/// Everything `parse_l2` learned about an input.
#[derive(Debug, Default)]
pub struct ParseReport {
    pub records: Vec<L2Record>,
    pub errors: Vec<IngestError>,
    pub warnings: Vec<IngestWarning>,
}

/// Parses a whole input. Malformed lines are collected, not fatal.
pub fn parse_l2<R: Read>(input: R, format: L2Format) -> ParseReport {
    let mut reader = L2Reader::new(input, format);
    let mut report = ParseReport::default();
    for item in reader.by_ref() {
        match item {
            Ok(rec) => report.records.push(rec),
            Err(e) => report.errors.push(e),
        }
    }
    report.warnings = reader.take_warnings();
    report
}

pub fn write_l2csv<'a, W, I>(mut out: W, records: I, header: bool) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a L2Record>,
{
    if header {
        writeln!(out, "{L2CSV_HEADER}")?;
    }
    for r in records {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}

enum Inner<R: Read> {
    Csv(csv::Reader<R>, csv::StringRecord),
    Jsonl(BufReader<R>, String, u64),
}

/// Streaming, single-pass record reader.
pub struct L2Reader<R: Read> {
    inner: Inner<R>,
    first: bool,
    last_ts: Option<TimestampNs>,
    warnings: Vec<IngestWarning>,
}

impl<R: Read> L2Reader<R> {
    pub fn new(input: R, format: L2Format) -> Self {
        let inner = match format {
            L2Format::L2Csv => Inner::Csv(
                csv::ReaderBuilder::new()
                    .has_headers(false)
                    .flexible(true)
                    .trim(csv::Trim::All)
                    .from_reader(input),
                csv::StringRecord::new(),
            ),
            L2Format::L2Jsonl => Inner::Jsonl(BufReader::new(input), String::new(), 0),
        };
        L2Reader {
            inner,
            first: true,
            last_ts: None,
            warnings: Vec::new(),
        }
    }

    pub fn warnings(&self) -> &[IngestWarning] {
        &self.warnings
    }

    pub fn take_warnings(&mut self) -> Vec<IngestWarning> {
        std::mem::take(&mut self.warnings)
    }

    fn check_order(&mut self, line: u64, ts: TimestampNs) {
        if let Some(prev) = self.last_ts {
            if ts < prev {
                self.warnings.push(IngestWarning::NonMonotoneTimestamp {
                    line,
                    previous: prev,
                    timestamp: ts,
                });
            }
        }
        self.last_ts = Some(ts);
    }
}

fn malformed(line: u64, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn build_record(
    line: u64,
    timestamp: &str,
    symbol: &str,
    side: &str,
    level: &str,
    price: &str,
    size: &str,
) -> Result<L2Record, IngestError> {
    let timestamp: i64 = timestamp
        .parse()
        .map_err(|_| malformed(line, format!("bad timestamp `{timestamp}`")))?;
    if symbol.is_empty() {
        return Err(malformed(line, "empty symbol"));
    }
    let side = side.parse::<Side>().map_err(|side| IngestError::UnknownSide { line, side })?;
    let level: u32 = level
        .parse()
        .map_err(|_| malformed(line, format!("bad level `{level}`")))?;
    let price: Decimal = price
        .parse()
        .map_err(|e| malformed(line, format!("price: {e}")))?;
    let size: Decimal = size.parse().map_err(|e| malformed(line, format!("size: {e}")))?;
    if !price.is_positive() {
        return Err(malformed(line, "price must be > 0"));
    }
    if size.is_negative() {
        return Err(malformed(line, "size must be >= 0"));
    }
    Ok(L2Record {
        timestamp,
        symbol: symbol.to_string(),
        side,
        level,
        price,
        size,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Str(String),
    Num(serde_json::Number),
}

impl NumOrStr {
    fn text(&self) -> String {
        match self {
            NumOrStr::Str(s) => s.clone(),
            NumOrStr::Num(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    timestamp_ns: i64,
    symbol: String,
    side: String,
    level: u32,
    price: NumOrStr,
    size: NumOrStr,
}

impl<R: Read> Iterator for L2Reader<R> {
    type Item = Result<L2Record, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (line, result) = match &mut self.inner {
                Inner::Csv(reader, rec) => {
                    match reader.read_record(rec) {
                        Ok(false) => return None,
                        Err(e) => {
                            let line = e.position().map(|p| p.line()).unwrap_or(0);
                            return Some(Err(malformed(line, e.to_string())));
                        }
                        Ok(true) => {}
                    }
                    let line = rec.position().map(|p| p.line()).unwrap_or(0);
                    if std::mem::take(&mut self.first) && rec.get(0) == Some("timestamp_ns") {
                        continue;
                    }
                    if rec.len() == 1 && rec.get(0) == Some("") {
                        continue;
                    }
                    if rec.len() != 6 {
                        let reason = format!("expected 6 fields, found {}", rec.len());
                        return Some(Err(malformed(line, reason)));
                    }
                    let r = build_record(
                        line, &rec[0], &rec[1], &rec[2], &rec[3], &rec[4], &rec[5],
                    );
                    (line, r)
                }
                Inner::Jsonl(reader, buf, line_no) => {
                    buf.clear();
                    match reader.read_line(buf) {
                        Ok(0) => return None,
                        Ok(_) => {}
                        Err(e) => return Some(Err(e.into())),
                    }
                    *line_no += 1;
                    let line = *line_no;
                    let text = buf.trim();
                    if text.is_empty() {
                        continue;
                    }
                    let r = match serde_json::from_str::<JsonRecord>(text) {
                        Ok(j) => build_record(
                            line,
                            &j.timestamp_ns.to_string(),
                            &j.symbol,
                            &j.side,
                            &j.level.to_string(),
                            &j.price.text(),
                            &j.size.text(),
                        ),
                        Err(e) => Err(malformed(line, e.to_string())),
                    };
                    (line, r)
                }
            };
            if let Ok(rec) = &result {
                self.check_order(line, rec.timestamp);
            }
            return Some(result);
        }
    }
}
