//! Deterministic stream derivation.
//!
//! Every random quantity in a simulation is drawn from a ChaCha stream
//! seeded by hashing the master seed together with the integer identity of
//! the thing being drawn (replicate, helper, link, window, ...). Two
//! consequences matter:
//!
//! * results are a pure function of the master seed and the scenario, no
//!   matter how work is split across threads, and
//! * lazily evaluated quantities (per-segment fading, say) come out the
//!   same whether or not neighbouring quantities were ever evaluated.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream ids for the independent random components of a run.
pub const HELPER_STREAM: u64 = 1;
pub const MOBILITY_STREAM: u64 = 2;
pub const CONNECTION_STREAM: u64 = 3;
pub const CHANNEL_STREAM: u64 = 4;
/// Top-level replicate id for one event-driven run.
pub const EVENT_STREAM: u64 = 5;
/// Top-level id for one sampled-schedule cycle.
pub const SAMPLED_STREAM: u64 = 6;

/// Identity used where a link endpoint is the vehicle of interest rather
/// than a helper or a roadside station.
pub const VOI_ID: u64 = u64::MAX;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer: a cheap bijective mixer with full avalanche.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapse a master seed and a path of integer ids into one 64-bit seed.
/// Order-sensitive: `[a, b]` and `[b, a]` land in unrelated streams.
pub fn derive(master: u64, parts: &[u64]) -> u64 {
    let mut acc = mix64(master.wrapping_add(GOLDEN));
    for &p in parts {
        acc = mix64(acc.wrapping_add(GOLDEN).wrapping_add(p));
    }
    acc
}

/// A ChaCha stream for the identified component.
pub fn stream(master: u64, parts: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive(master, parts))
}

/// Poisson process positions on `[0, span)` with the given intensity, via
/// the exponential-gap walk. Zero density gives no points.
pub fn poisson_positions(rho: f64, span: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    use rand::Rng;
    let mut out = Vec::new();
    if rho <= 0.0 || span <= 0.0 {
        return out;
    }
    let mut x = 0.0f64;
    loop {
        let u: f64 = rng.random();
        x -= (1.0 - u).ln() / rho;
        if x >= span {
            return out;
        }
        out.push(x);
    }
}
