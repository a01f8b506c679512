//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha8 generator seeded with
//! the run seed. Independent consumers take distinct stream ids, so the same seed
//! always reproduces the same numbers and streams never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used by the library; callers may use any other ids freely.
pub mod streams {
    pub const PROBLEM_DATA: u64 = 1;
    pub const HESSIAN_SAMPLING: u64 = 2;
    pub const GRADIENT_SAMPLING: u64 = 3;
    pub const DATASET: u64 = 4;
}

pub fn stream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
