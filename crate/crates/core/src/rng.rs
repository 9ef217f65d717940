//! Deterministic random substreams.
//!
//! Every randomized task draws from a ChaCha stream selected by
//! `(seed, unit, kind, block)`, so results never depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a substream is used for; part of the stream selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum TaskKind {
    Bootstrap = 1,
    Permutation = 2,
    Synth = 3,
    FitStart = 4,
    Substrate = 5,
    Test = 255,
}

/// Rng for `(seed, unit, kind, block)`. `unit` is e.g. an asset or window
/// index, `block` a chunk index inside that task.
pub fn substream(seed: u64, unit: u32, kind: TaskKind, block: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let stream = ((unit as u64) << 32) | ((kind as u64) << 24) | (block as u64 & 0x00ff_ffff);
    rng.set_stream(stream);
    rng
}
