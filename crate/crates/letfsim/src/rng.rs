//! Deterministic per-path random substreams.
//!
//! Every simulated path draws from a ChaCha12 stream keyed by the root seed
//! and selected by `(path index, channel)`. A path's output therefore
//! depends only on `(seed, path index)`, never on execution order or thread
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Independent logical channels within one path's substream space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Primary draws: return innovations or Brownian increments.
    Main = 0,
    /// Tracking-error noise.
    Tracking = 1,
    /// Markov-chain holding times and jump targets.
    Regime = 2,
    /// Diffusion draws paired with a regime path.
    Diffusion = 3,
}

const CHANNELS: u64 = 4;

/// RNG for one `(path, channel)` substream under a root seed.
pub fn path_rng(seed: u64, path: u64, channel: Channel) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path.wrapping_mul(CHANNELS).wrapping_add(channel as u64));
    rng
}
