use rand::Rng;

use super::rng::SimRng;

/// `n + 1` values of a simple symmetric random walk reflected at zero
/// (`X_{k+1} = |X_k ± 1|`), started at zero.
pub fn reflected_simple_walk(steps: usize, rng: &mut SimRng) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut x: i64 = 0;
    out.push(0.0);
    let mut bits = 0u64;
    let mut left = 0;
    for _ in 0..steps {
        if left == 0 {
            bits = rng.random();
            left = 64;
        }
        let up = bits & 1 == 1;
        bits >>= 1;
        left -= 1;
        x = if up { x + 1 } else { (x - 1).abs() };
        out.push(x as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::replica_rng;

    #[test]
    fn walk_is_nonnegative_with_unit_steps() {
        let w = reflected_simple_walk(10_000, &mut replica_rng(1, 0));
        assert_eq!(w.len(), 10_001);
        assert!(w.iter().all(|&v| v >= 0.0));
        assert!(w.windows(2).all(|p| (p[1] - p[0]).abs() == 1.0));
    }
}
