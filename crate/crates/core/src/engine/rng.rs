//! Counter-based randomness.
//!
//! Every random draw in the engine comes from a stream keyed by
//! (seed, path_index, stream_id). Streams are mutually independent ChaCha12
//! generators whose keys are derived by splitmix64 mixing, so adding a new
//! stream id never perturbs draws on existing streams, and any path can be
//! regenerated in isolation — the basis of the thread-count-invariance
//! guarantee.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Stream ids used by the engine. Grouping them here keeps collisions
/// impossible by construction.
pub mod stream {
    /// Uniform deciding the closing time.
    pub const CLOSING: u64 = 0;
    /// Per-step Poisson arrival-count uniforms (always `T` draws).
    pub const COUNTS: u64 = 1;
    /// Efficient-price standard normal.
    pub const EFFICIENT: u64 = 2;
    /// Strategic trader's price standard normal.
    pub const TRADER: u64 = 3;
    /// Market-maker price normals for arrivals in step `t` live on
    /// `PRICES_BASE + t`; the resting order at time 0 uses `PRICES_BASE`.
    pub const PRICES_BASE: u64 = 10;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent generator for one (seed, path, stream) triple.
pub fn stream_rng(seed: u64, path_index: u64, stream_id: u64) -> ChaCha12Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ path_index.wrapping_mul(0xD1B54A32D192ED03);
    let b = splitmix64(&mut state);
    let mut state = b ^ stream_id.wrapping_mul(0x8CB92BA72F3D8DD7);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// One uniform in [0, 1).
pub fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    rng.random::<f64>()
}

/// One standard normal.
pub fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Poisson draw by inverse-CDF from a single uniform. Monotone in both `u`
/// and `mean`, which couples counts across fee candidates sharing the
/// uniform.
pub fn poisson_from_uniform(u: f64, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let cap = (mean + 20.0 * mean.sqrt() + 50.0).ceil() as u32;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    let mut k = 0u32;
    while u >= cdf && k < cap {
        k += 1;
        pmf *= mean / k as f64;
        cdf += pmf;
    }
    k
}
