#![allow(dead_code)]

use elastic_core::model::{Configuration, SystemParams};
use elastic_core::rational::{int, ratio};
use elastic_core::Rational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonnegative rational with denominator at most 3.
pub fn rate<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.random_range(0..=6), rng.random_range(1..=3))
}

pub fn mass<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.random_range(1..=4), rng.random_range(1..=2))
}

pub fn params<R: Rng>(rng: &mut R, n: usize, equal_masses: bool) -> SystemParams {
    let masses = if equal_masses { vec![int(1); n] } else { (0..n).map(|_| mass(rng)).collect() };
    let a = (0..n).map(|_| rate(rng)).collect();
    let b = (0..n).map(|_| rate(rng)).collect();
    SystemParams::new(masses, a, b).unwrap()
}

/// Ordered configuration with frequent stacks.
pub fn configuration<R: Rng>(rng: &mut R, n: usize) -> Configuration {
    let mut x = Vec::with_capacity(n);
    let mut at = rng.random_range(-5i64..=5);
    for _ in 0..n {
        if rng.random_bool(0.45) {
            at += rng.random_range(1..=3);
        }
        x.push(at);
    }
    Configuration::new(x).unwrap()
}

/// Weights constant on each stack of `x`; nonnegative when `nonneg`.
pub fn admissible_weights<R: Rng>(rng: &mut R, x: &Configuration, nonneg: bool) -> Vec<Rational> {
    let mut y = Vec::with_capacity(x.len());
    for (lo, hi) in x.stacks() {
        let lower = if nonneg { 0 } else { -4 };
        let v = ratio(rng.random_range(lower..=4), rng.random_range(1..=3));
        y.extend(std::iter::repeat_n(v, hi - lo + 1));
    }
    y
}

/// Every `V ⊆ {0..N}` containing `0` and `N` that satisfies the two boundary
/// conditions, found by exhaustive search.
pub fn brute_force_boundaries(m: &[Rational], u: &[Rational]) -> Vec<Vec<usize>> {
    let n = m.len() - 1;
    let mut found = Vec::new();
    for mask in 0u32..(1 << n.saturating_sub(1)) {
        let mut v = vec![0];
        v.extend((1..n).filter(|k| mask & (1 << (k - 1)) != 0));
        v.push(n);
        let slope = |i: usize, j: usize| (&u[j] - &u[i]) / (&m[j] - &m[i]);
        let faces_ordered = v.windows(3).all(|w| slope(w[0], w[1]) >= slope(w[1], w[2]));
        let strictly_below = v
            .windows(2)
            .all(|w| (w[0] + 1..w[1]).all(|k| slope(w[0], k) < slope(w[0], w[1])));
        if faces_ordered && strictly_below {
            found.push(v);
        }
    }
    found
}
