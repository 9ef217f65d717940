//! Versioned JSONL container for assembled snapshots.
//!
//! Line 1 is a [`SnapshotHeader`]; every following line is one
//! [`BookSnapshot`] with prices and sizes as canonical decimal strings.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BookSnapshot, IngestError, SessionFilter};

pub const SNAPSHOT_FORMAT: &str = "shearbook-snapshots";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub symbol: Option<String>,
    pub session: Option<SessionFilter>,
    pub count: u64,
}

impl SnapshotHeader {
    pub fn new(symbol: Option<String>, session: Option<SessionFilter>, count: u64) -> Self {
        SnapshotHeader {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            symbol,
            session,
            count,
        }
    }
}

pub fn write_snapshots<W: Write>(
    mut out: W,
    header: &SnapshotHeader,
    snapshots: &[BookSnapshot],
) -> Result<(), IngestError> {
    let to_io = |e: serde_json::Error| IngestError::Io(e.into());
    serde_json::to_writer(&mut out, header).map_err(to_io)?;
    out.write_all(b"\n")?;
    for s in snapshots {
        serde_json::to_writer(&mut out, s).map_err(to_io)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_snapshots<R: BufRead>(input: R) -> Result<(SnapshotHeader, Vec<BookSnapshot>), IngestError> {
    let bad = |m: String| IngestError::SnapshotFile(m);
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| bad("missing header line".into()))??;
    let header: SnapshotHeader =
        serde_json::from_str(&first).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(bad(format!("unexpected format `{}`", header.format)));
    }
    if header.version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported version {}", header.version)));
    }
    let mut snapshots = Vec::with_capacity(header.count as usize);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: BookSnapshot =
            serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        snapshots.push(s);
    }
    if snapshots.len() as u64 != header.count {
        return Err(bad(format!(
            "header announces {} snapshots, found {}",
            header.count,
            snapshots.len()
        )));
    }
    Ok((header, snapshots))
}
