//! Random ²⁹Si placement with a counter-based generator.
//!
//! Each site draws one 64-bit word from ChaCha8 keyed by the run seed, on a
//! stream selected by the site's coordinates. The outcome for a site is
//! therefore independent of iteration order, thread count and cube size:
//! a larger cube contains the smaller one's configuration unchanged.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lattice::Site;
use crate::error::{invalid, Result};

/// Natural abundance of ²⁹Si.
pub const SI29_ABUNDANCE: f64 = 0.0467;

const KEY_OFFSET: i64 = 1 << 20;

/// Injective stream id for coordinates within ±2²⁰.
fn site_key(u: Site) -> u64 {
    let f = |c: i32| ((c as i64 + KEY_OFFSET) as u64) & ((1 << 21) - 1);
    (f(u[0]) << 42) | (f(u[1]) << 21) | f(u[2])
}

fn draw(base: &ChaCha8Rng, u: Site) -> f64 {
    let mut rng = base.clone();
    rng.set_stream(site_key(u));
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [0, 1) for one site.
pub fn site_uniform(seed: u64, u: Site) -> f64 {
    draw(&ChaCha8Rng::seed_from_u64(seed), u)
}

/// Sites (donor excluded) that hold a ²⁹Si nucleus, in input order.
pub fn occupy(sites: &[Site], abundance: f64, seed: u64) -> Result<Vec<Site>> {
    if !(0.0..=1.0).contains(&abundance) {
        return invalid(format!("abundance must lie in [0, 1], got {abundance}"));
    }
    if sites.iter().any(|u| u.iter().any(|c| (*c as i64).abs() >= KEY_OFFSET)) {
        return invalid("lattice coordinates exceed the generator key range");
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok(sites
        .par_iter()
        .filter(|&&u| u != [0, 0, 0] && draw(&base, u) < abundance)
        .copied()
        .collect())
}
