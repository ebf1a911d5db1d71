//! Host time and randomness sources for id generation.

use ngf_core::{IdGenerator, NanoClock};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Nanoseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemNanoClock;

impl NanoClock for SystemNanoClock {
    fn now_ns(&mut self) -> u64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    }
}

/// System clock plus a ChaCha stream, OS-seeded unless a seed is given.
pub fn system_id_generator(seed: Option<u64>) -> IdGenerator {
    let rng = match seed {
        Some(seed) => ChaCha12Rng::seed_from_u64(seed),
        None => ChaCha12Rng::seed_from_u64(rand::rng().next_u64()),
    };
    IdGenerator::new(SystemNanoClock, rng)
}
