//! Level II record parsing, snapshot assembly and trading-session filtering.

mod assemble;
mod parse;
mod session;
pub mod snapshot_file;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;

pub use assemble::{assemble_snapshots, Assembly, AssemblyStats, SnapshotAssembler};
pub use parse::{parse_l2, write_l2csv, L2Format, L2Reader, ParseReport, L2CSV_HEADER};
pub use session::{filter_session, SessionFilter};

/// Nanoseconds since the Unix epoch, UTC.
pub type TimestampNs = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "BID",
            Side::Ask => "ASK",
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BID" => Ok(Side::Bid),
            "ASK" => Ok(Side::Ask),
            other => Err(other.to_string()),
        }
    }
}

/// One visible depth level as it appears in an input file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct L2Record {
    pub timestamp: TimestampNs,
    pub symbol: String,
    pub side: Side,
    /// 0 is the best level.
    pub level: u32,
    pub price: Decimal,
    pub size: Decimal,
}

impl L2Record {
    /// Canonical L2CSV line without the trailing newline.
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.timestamp, self.symbol, self.side, self.level, self.price, self.size
        )
    }
}

/// Price level: (price, size).
pub type Level = (Decimal, Decimal);

/// Full visible book at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookSnapshot {
    #[serde(rename = "t")]
    pub timestamp: TimestampNs,
    pub symbol: String,
    /// Sorted by price, descending.
    pub bids: Vec<Level>,
    /// Sorted by price, ascending.
    pub asks: Vec<Level>,
}

impl BookSnapshot {
    pub fn best_bid(&self) -> Option<Decimal> {
        self.bids.first().map(|l| l.0)
    }

    pub fn best_ask(&self) -> Option<Decimal> {
        self.asks.first().map(|l| l.0)
    }

    /// Usable: both sides present and the book is not crossed or locked.
    pub fn is_usable(&self) -> bool {
        matches!((self.best_bid(), self.best_ask()), (Some(b), Some(a)) if b < a)
    }

    /// Flattens back into records, levels numbered from the best price.
    pub fn to_records(&self) -> Vec<L2Record> {
        let side_records = |side: Side, levels: &[Level]| {
            levels
                .iter()
                .enumerate()
                .map(|(i, &(price, size))| L2Record {
                    timestamp: self.timestamp,
                    symbol: self.symbol.clone(),
                    side,
                    level: i as u32,
                    price,
                    size,
                })
                .collect::<Vec<_>>()
        };
        let mut out = side_records(Side::Bid, &self.bids);
        out.extend(side_records(Side::Ask, &self.asks));
        out
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: u64, reason: String },
    #[error("line {line}: unknown side `{side}`")]
    UnknownSide { line: u64, side: String },
    #[error("invalid time zone `{0}`")]
    InvalidTimezone(String),
    #[error("invalid session: {0}")]
    InvalidSession(String),
    #[error("snapshot file: {0}")]
    SnapshotFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::MalformedLine { line, .. } | IngestError::UnknownSide { line, .. } => {
                Some(*line)
            }
            _ => None,
        }
    }
}

/// Non-fatal conditions noticed while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    NonMonotoneTimestamp {
        line: u64,
        previous: TimestampNs,
        timestamp: TimestampNs,
    },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::NonMonotoneTimestamp {
                line,
                previous,
                timestamp,
            } => write!(
                f,
                "line {line}: timestamp {timestamp} precedes previous {previous}"
            ),
        }
    }
}
