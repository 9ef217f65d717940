//! Order-book liquidity geometry toolkit.
//!
//! The pipeline reads Level II depth, assembles full-book snapshots, builds
//! per-window cumulative bid/ask profiles around the window-averaged quote
//! mid, and derives the shear field `Σ(x) = Q_ask(x) - Q_bid(x)` together
//! with its median amplitude and the mid drift. Cumulative profiles are
//! fitted with an integrated-gamma model and three alternatives and
//! compared by AIC; shear/drift association is tested with Spearman
//! correlations, bootstrap intervals, permutation p-values and
//! multiple-testing corrections.
//!
//! [`substrate`] is an executable version of the graph-to-measure
//! construction that the price axis realizes, and [`synth`] generates
//! books with known ground truth for every stage.

pub mod decimal;
pub mod geometry;
pub mod ingest;
pub mod models;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod substrate;
pub mod synth;

pub use decimal::{Decimal, ExactPrice};
pub use geometry::{ShearRecord, WindowProfile, WindowSpec};
pub use ingest::{BookSnapshot, L2Record, SessionFilter, Side};
pub use models::{FitResult, ModelId};
pub use stats::CorrelationReport;
pub use substrate::{AtomicMeasure, SubstrateGraph};
