//! Named random sub-streams derived from one run seed.
//!
//! Each consumer asks for its own stream by name, so adding a new consumer
//! never shifts the draws seen by an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn substream(seed: u64, name: &str) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}

/// Child stream keyed by a counter, e.g. one per restart or per instance.
pub fn substream_indexed(seed: u64, name: &str, i: u64) -> StreamRng {
    substream(seed, &format!("{name}#{i}"))
}
