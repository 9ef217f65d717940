//! Weighted relational graph, its projection onto a price-like axis, and the
//! bid/ask restriction of the resulting atomic measure.
//!
//! Coordinates are inputs. Nothing here embeds a graph; the projection is
//! whatever the caller (the price axis, or a synthetic generator) supplies.
//! The geometry module realizes the same pipeline on real books, and the
//! tests cross-check the two.

mod random;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use random::{random_graph, Distribution, GraphSpec, WeightSource};

#[derive(Debug, Error, PartialEq)]
pub enum SubstrateError {
    #[error("edge {0} has no activity value")]
    MissingEdgeActivity(usize),
    #[error("edge {edge} references vertex {vertex}, graph has {n} vertices")]
    DanglingEdge { edge: usize, vertex: usize, n: usize },
    #[error("vertex {0} has an invalid weight")]
    InvalidWeight(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    InvalidCoordinate(usize),
    #[error("weights and coordinates must cover all {0} vertices")]
    LengthMismatch(usize),
    #[error("measure has no mass")]
    EmptyMeasure,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// Vertices are `0..n`; `weights[i]` and `coords[i]` belong to vertex `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateGraph {
    weights: Vec<f64>,
    coords: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl SubstrateGraph {
    pub fn new(
        weights: Vec<f64>,
        coords: Vec<f64>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, SubstrateError> {
        let n = weights.len();
        if coords.len() != n {
            return Err(SubstrateError::LengthMismatch(n));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(SubstrateError::InvalidWeight(i));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(SubstrateError::InvalidCoordinate(i));
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if v >= n {
                    return Err(SubstrateError::DanglingEdge { edge: e, vertex: v, n });
                }
            }
        }
        Ok(SubstrateGraph { weights, coords, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Incidence variant used by [`reduce_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// +1 at the first vertex of the pair, -1 at the second.
    Oriented,
    /// +1 at both endpoints.
    Absolute,
}

/// Vertex signal `x = B u` for edge activity `u` (one value per edge).
pub fn reduce_edges(
    graph: &SubstrateGraph,
    activity: &[f64],
    orientation: Orientation,
) -> Result<Vec<f64>, SubstrateError> {
    if activity.len() < graph.edges.len() {
        return Err(SubstrateError::MissingEdgeActivity(activity.len()));
    }
    let mut x = vec![0.0; graph.n_vertices()];
    for (&(head, tail), &u) in graph.edges.iter().zip(activity) {
        x[head] += u;
        match orientation {
            Orientation::Oriented => x[tail] -= u,
            Orientation::Absolute => x[tail] += u,
        }
    }
    Ok(x)
}

/// Finite atomic measure on the real line, sorted with unique coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Sorts, merges equal coordinates and validates masses.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self, SubstrateError> {
        for (i, &(x, m)) in atoms.iter().enumerate() {
            if !x.is_finite() {
                return Err(SubstrateError::InvalidCoordinate(i));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(SubstrateError::InvalidWeight(i));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => merged.push((if x == 0.0 { 0.0 } else { x }, m)),
            }
        }
        Ok(AtomicMeasure { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn translate(&self, c: f64) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self.atoms.iter().map(|&(x, m)| (x + c, m)).collect(),
        }
    }
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.atoms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let atoms = Vec::<(f64, f64)>::deserialize(d)?;
        AtomicMeasure::from_atoms(atoms).map_err(serde::de::Error::custom)
    }
}

/// Image of the vertex weights under the coordinate map.
pub fn pushforward(graph: &SubstrateGraph) -> AtomicMeasure {
    let atoms = graph
        .coords
        .iter()
        .copied()
        .zip(graph.weights.iter().copied())
        .collect();
    AtomicMeasure::from_atoms(atoms).expect("graph invariants guarantee valid atoms")
}

/// Cut point minimizing `|mass below - mass above|`.
///
/// Candidates are the atom coordinates and the midpoints between adjacent
/// atoms; mass exactly at the cut is on neither side. Ties go to the
/// smallest candidate.
pub fn balance_cut(measure: &AtomicMeasure) -> Result<f64, SubstrateError> {
    let atoms = measure.atoms();
    if atoms.is_empty() || measure.total_mass() <= 0.0 {
        return Err(SubstrateError::EmptyMeasure);
    }
    let n = atoms.len();
    // below[i] = mass of atoms[..i], above[i] = mass of atoms[i..].
    let mut below = vec![0.0; n + 1];
    for i in 0..n {
        below[i + 1] = below[i] + atoms[i].1;
    }
    let mut above = vec![0.0; n + 1];
    for i in (0..n).rev() {
        above[i] = above[i + 1] + atoms[i].1;
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..n {
        // cut at atom i
        let at = (below[i] - above[i + 1]).abs();
        if at < best.0 {
            best = (at, atoms[i].0);
        }
        if i + 1 < n {
            let mid = 0.5 * (atoms[i].0 + atoms[i + 1].0);
            let between = (below[i + 1] - above[i + 1]).abs();
            if between < best.0 {
                best = (between, mid);
            }
        }
    }
    Ok(best.1)
}

/// Cumulative one-sided masses around `mid`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSided {
    /// `bid[x-1]`: mass within `x` bins below the mid.
    pub bid: Vec<f64>,
    /// `ask[x-1]`: mass within `x` bins above the mid.
    pub ask: Vec<f64>,
    /// Mass at the mid or beyond `k` bins.
    pub discarded: f64,
}

/// Bins mass at signed distance `d = x - mid` into offset
/// `ceil(|d| / bin_width)`, keeps offsets `1..=k`, and accumulates.
pub fn restrict_two_sided(measure: &AtomicMeasure, mid: f64, k: usize, bin_width: f64) -> TwoSided {
    assert!(k >= 1 && bin_width > 0.0, "k >= 1 and bin_width > 0 required");
    let mut bid = vec![0.0; k];
    let mut ask = vec![0.0; k];
    let mut discarded = 0.0;
    for &(x, m) in measure.atoms() {
        let d = x - mid;
        let offset = (d.abs() / bin_width).ceil();
        if d == 0.0 || offset > k as f64 {
            discarded += m;
            continue;
        }
        let slot = offset as usize - 1;
        if d > 0.0 {
            ask[slot] += m;
        } else {
            bid[slot] += m;
        }
    }
    for side in [&mut bid, &mut ask] {
        for i in 1..k {
            side[i] += side[i - 1];
        }
    }
    TwoSided { bid, ask, discarded }
}
