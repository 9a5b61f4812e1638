//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream whose key is derived from
//! `(master seed, domain)` and whose stream id is derived from an index or a
//! site. Streams are therefore addressable in any order and from any worker
//! without shared state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags separating independent uses of one master seed.
pub mod domain {
    pub const SITE: u64 = 0x5349_5445;
    pub const BOUNDARY: u64 = 0x424e_4459;
    pub const WALK: u64 = 0x5741_4c4b;
    pub const ENVIRONMENT: u64 = 0x454e_5649;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(master: u64, domain: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    let mut state = mix64(master) ^ mix64(domain.rotate_left(17));
    for chunk in out.chunks_exact_mut(8) {
        state = mix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    out
}

/// Independent stream number `index` of `(master, domain)`.
pub fn stream(master: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::from_seed(key(master, domain));
    rng.set_stream(index);
    rng
}

/// Hash of a site used as stream id.
pub fn site_id(site: &[i64]) -> u64 {
    let mut h = mix64(site.len() as u64);
    for &c in site {
        h = mix64(h ^ (c as u64));
    }
    h
}

/// Stream attached to a site, independent of query order.
pub fn site_stream(master: u64, domain: u64, site: &[i64]) -> StreamRng {
    stream(master, domain, site_id(site))
}

/// Derives a child seed, e.g. one environment seed per Monte Carlo sample.
pub fn child_seed(master: u64, domain: u64, index: u64) -> u64 {
    mix64(mix64(master ^ domain.rotate_left(29)) ^ mix64(index))
}
