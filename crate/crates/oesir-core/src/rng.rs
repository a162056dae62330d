//! Seed derivation and small sampling helpers.
//!
//! Every stochastic component takes an explicit `u64` seed. Sub-seeds are
//! derived with a SplitMix64 mix so independent streams never alias even when
//! callers use small consecutive master seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed from a master seed, a stream tag, and an index.
pub fn derive_seed(master: u64, tag: &str, idx: u64) -> u64 {
    let mut acc = mix(master);
    for b in tag.as_bytes() {
        acc = mix(acc ^ u64::from(*b));
    }
    mix(acc ^ idx)
}

/// The deterministic RNG used throughout the crate.
pub type Rng = ChaCha12Rng;

/// RNG seeded for a (master, tag, idx) stream.
pub fn stream(master: u64, tag: &str, idx: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, tag, idx))
}

/// Standard normal sample via Box-Muller; two uniforms per call.
pub fn next_gaussian(rng: &mut Rng) -> f64 {
    use num_traits::Float;
    use rand::Rng as _;
    // Uniforms in (0, 1]: avoid ln(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}
