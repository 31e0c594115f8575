//! Deterministic random streams.
//!
//! Every consumer derives its own ChaCha8 stream from the run seed and a
//! stream id, so results do not depend on thread count or scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Vec3;

/// Stream ids used by the library.
pub mod streams {
    pub const SIDE_REFERENCES: u64 = 1;
    pub const VOLUME_SAMPLES: u64 = 2;
    pub const COMPLEMENT_SAMPLES: u64 = 3;
    pub const PERTURBATION: u64 = 4;
}

/// Independent generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform point in the closed unit ball, by rejection from the cube.
pub fn in_ball<R: RngCore>(rng: &mut R) -> Vec3 {
    loop {
        let p = Vec3::new(
            2.0 * uniform(rng) - 1.0,
            2.0 * uniform(rng) - 1.0,
            2.0 * uniform(rng) - 1.0,
        );
        if p.norm_sq() <= 1.0 {
            return p;
        }
    }
}
