//! Inputs shared by the benchmarks.

use shearbook_core::ingest::write_l2csv;
use shearbook_core::synth::{generate, Generator, SynthSpec};

/// Noisy gamma book as L2CSV bytes with at least `rows` data rows.
pub fn l2csv_rows(rows: usize) -> Vec<u8> {
    let mut spec = SynthSpec::new(Generator::GammaBook, vec![100.0, 1.5, 0.1]);
    spec.noise_rel = 0.05;
    spec.n_windows = 1;
    let per_window: usize = generate(&spec).expect("valid spec").iter().map(|s| s.bids.len() + s.asks.len()).sum();
    spec.n_windows = rows.div_ceil(per_window);
    let records: Vec<_> = generate(&spec).expect("valid spec").iter().flat_map(|s| s.to_records()).collect();
    let mut out = Vec::new();
    write_l2csv(&mut out, &records, true).expect("in-memory write");
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn row_count_is_at_least_requested() {
        let csv = super::l2csv_rows(5_000);
        assert!(csv.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count() > 5_000);
    }
}
