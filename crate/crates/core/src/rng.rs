//! Counter-addressed random streams.
//!
//! Every draw is fixed by `(seed, stream, event)`, so particle updates can run
//! in any order or on any number of threads and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per event. A Gaussian draw almost always uses one or two.
const WORDS_PER_EVENT: u128 = 64;

/// Stream tags keep jump, placement and absorption draws disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Jump = 0,
    Placement = 1,
    Absorption = 2,
    Clock = 3,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamKey {
    key: [u8; 32],
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self {
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    /// Generator positioned at `event` of the stream for `(purpose, id)`.
    pub fn rng(&self, purpose: Purpose, id: u64, event: u64) -> ChaCha8Rng {
        debug_assert!(id < 1 << 56);
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((purpose as u64) << 56) | id);
        rng.set_word_pos(event as u128 * WORDS_PER_EVENT);
        rng
    }
}
