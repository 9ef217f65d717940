use super::{BookSnapshot, L2Record, Side, TimestampNs};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub snapshots: u64,
    pub crossed: u64,
    pub one_sided: u64,
    pub duplicate_levels: u64,
}

impl AssemblyStats {
    pub fn dropped(&self) -> u64 {
        self.crossed + self.one_sided + self.duplicate_levels
    }
}

#[derive(Debug, Clone, Default)]
pub struct Assembly {
    pub snapshots: Vec<BookSnapshot>,
    pub stats: AssemblyStats,
}

struct Pending {
    timestamp: TimestampNs,
    symbol: String,
    bids: Vec<(u32, L2Record)>,
    asks: Vec<(u32, L2Record)>,
}

/// Incremental snapshot builder. Consecutive records with the same
/// (timestamp, symbol) form one snapshot.
#[derive(Default)]
pub struct SnapshotAssembler {
    pending: Option<Pending>,
    stats: AssemblyStats,
}

impl SnapshotAssembler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> AssemblyStats {
        self.stats
    }

    /// Feeds one record; returns a finished snapshot when a group closes.
    pub fn push(&mut self, rec: L2Record) -> Option<BookSnapshot> {
        let same_group = self
            .pending
            .as_ref()
            .is_some_and(|p| p.timestamp == rec.timestamp && p.symbol == rec.symbol);
        let finished = if same_group {
            None
        } else {
            let done = self.pending.take().and_then(|p| self.close(p));
            self.pending = Some(Pending {
                timestamp: rec.timestamp,
                symbol: rec.symbol.clone(),
                bids: Vec::new(),
                asks: Vec::new(),
            });
            done
        };
        let p = self.pending.as_mut().expect("pending group");
        match rec.side {
            Side::Bid => p.bids.push((rec.level, rec)),
            Side::Ask => p.asks.push((rec.level, rec)),
        }
        finished
    }

    pub fn finish(&mut self) -> Option<BookSnapshot> {
        self.pending.take().and_then(|p| self.close(p))
    }

    fn close(&mut self, p: Pending) -> Option<BookSnapshot> {
        let side_levels = |mut recs: Vec<(u32, L2Record)>, descending: bool| {
            recs.sort_by_key(|(lvl, _)| *lvl);
            let dup = recs.windows(2).any(|w| w[0].0 == w[1].0);
            let mut levels: Vec<_> = recs.into_iter().map(|(_, r)| (r.price, r.size)).collect();
            if descending {
                levels.sort_by(|a, b| b.0.cmp(&a.0));
            } else {
                levels.sort_by(|a, b| a.0.cmp(&b.0));
            }
            (levels, dup)
        };
        let (bids, dup_b) = side_levels(p.bids, true);
        let (asks, dup_a) = side_levels(p.asks, false);
        if dup_b || dup_a {
            self.stats.duplicate_levels += 1;
            return None;
        }
        let snap = BookSnapshot {
            timestamp: p.timestamp,
            symbol: p.symbol,
            bids,
            asks,
        };
        if snap.bids.is_empty() || snap.asks.is_empty() {
            self.stats.one_sided += 1;
            return None;
        }
        if !snap.is_usable() {
            self.stats.crossed += 1;
            return None;
        }
        self.stats.snapshots += 1;
        Some(snap)
    }
}

/// Groups timestamp-sorted records into snapshots, dropping crossed,
/// locked, one-sided and duplicate-level books.
pub fn assemble_snapshots<I: IntoIterator<Item = L2Record>>(records: I) -> Assembly {
    let mut asm = SnapshotAssembler::new();
    let mut snapshots = Vec::new();
    for rec in records {
        if let Some(s) = asm.push(rec) {
            snapshots.push(s);
        }
    }
    snapshots.extend(asm.finish());
    Assembly {
        snapshots,
        stats: asm.stats(),
    }
}
