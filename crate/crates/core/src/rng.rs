//! Seeded random streams.
//!
//! Every random draw comes from `ChaCha8Rng::seed_from_u64(seed)` with a fixed
//! stream id, so each consumer of a trial seed gets an independent,
//! reproducible sequence regardless of execution order:
//!
//! | stream | consumer                      |
//! |--------|-------------------------------|
//! | 0      | haplotype `h`                 |
//! | 1      | read signs `c`                |
//! | 2      | observation mask `Ω`          |
//! | 3      | flipped entries `Ω_E`         |
//! | 4      | trust-region initial points   |
//! | 5      | alternating-minimization init |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Haplotype = 0,
    ReadSigns = 1,
    Mask = 2,
    Flips = 3,
    RtrInit = 4,
    AltMinInit = 5,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
