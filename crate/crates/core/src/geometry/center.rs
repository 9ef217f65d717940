use crate::decimal::Decimal;
use crate::ingest::BookSnapshot;
use crate::substrate::AtomicMeasure;

use super::GeometryError;

/// Measure recentered at its mass-weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDensity {
    pub center: f64,
    pub atoms: AtomicMeasure,
}

impl CenteredDensity {
    /// Shifts back to the original coordinates.
    pub fn restore(&self) -> AtomicMeasure {
        self.atoms.translate(self.center)
    }

    /// `Σ x m / (Σ m · span)`, the recentered first moment in units of the
    /// coordinate span. Zero span gives zero.
    pub fn normalized_first_moment(&self) -> f64 {
        let atoms = self.atoms.atoms();
        let mass = self.atoms.total_mass();
        let span = match (atoms.first(), atoms.last()) {
            (Some(a), Some(b)) if b.0 > a.0 => b.0 - a.0,
            _ => return 0.0,
        };
        atoms.iter().map(|&(x, m)| x * m).sum::<f64>() / (mass * span)
    }
}

fn weighted_mean(atoms: &[(f64, f64)], mass: f64) -> f64 {
    atoms.iter().map(|&(x, m)| x * m).sum::<f64>() / mass
}

/// Subtracts the mass-weighted mean coordinate.
///
/// The mean is refined with a second pass over the residuals, which removes
/// most of the cancellation error of the first sum.
pub fn center_decomposition(measure: &AtomicMeasure) -> Result<CenteredDensity, GeometryError> {
    let mass = measure.total_mass();
    if measure.is_empty() || !(mass > 0.0) {
        return Err(GeometryError::EmptyMeasure);
    }
    let atoms = measure.atoms();
    let first = weighted_mean(atoms, mass);
    let residual: Vec<(f64, f64)> = atoms.iter().map(|&(x, m)| (x - first, m)).collect();
    let center = first + weighted_mean(&residual, mass);
    Ok(CenteredDensity { center, atoms: measure.translate(-center) })
}

/// Visible depth of snapshots as a measure over price in tick units, bids
/// and asks together.
pub fn window_measure(snapshots: &[BookSnapshot], tick: Decimal) -> AtomicMeasure {
    let atoms = snapshots
        .iter()
        .flat_map(|s| s.bids.iter().chain(&s.asks))
        .map(|&(p, size)| (p.raw() as f64 / tick.raw() as f64, size.to_f64()))
        .collect();
    AtomicMeasure::from_atoms(atoms).expect("decimal prices and sizes are finite")
}
