//! Exact one-step expectations over the jump chain.
//!
//! Every function here enumerates all transitions out of `x` and weights them
//! by `rate / R_x`; nothing is sampled.

use num_traits::Zero;

use super::{jump_rates, Club, Configuration, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::rational::{self, Rational};

/// `E_x[f(X(τ)) - f(x)]` where `τ` is the first jump time of the elastic
/// dynamics.
pub fn expected_change<F>(params: &SystemParams, x: &Configuration, f: F) -> Result<Rational>
where
    F: Fn(&Configuration) -> Rational,
{
    let rates = jump_rates(params, x)?;
    if rates.is_frozen() {
        return Err(Error::Frozen);
    }
    let here = f(x);
    let mut acc = rational::zero();
    for jump in rates.jumps() {
        let next = x
            .moved(jump.label, jump.step)
            .expect("rate law only produces ordered configurations");
        acc += &jump.rate * (f(&next) - &here);
    }
    Ok(acc / rates.total)
}

fn check_weights(params: &SystemParams, y: &[Rational]) -> Result<()> {
    if y.len() != params.n() {
        return Err(invalid(format!("{} weights for {} particles", y.len(), params.n())));
    }
    Ok(())
}

/// `Σ_{i in club} m_i y_i x_i`.
fn weighted_sum(params: &SystemParams, y: &[Rational], x: &Configuration, club: Club) -> Rational {
    (club.first..=club.last)
        .map(|l| &params.masses()[l - 1] * &y[l - 1] * rational::int(x.at(l)))
        .sum()
}

/// `E_x ⟨y, e⟩_N = E_x Σ_i m_i y_i (X_i(τ) - x_i)`.
pub fn expected_increment(params: &SystemParams, x: &Configuration, y: &[Rational]) -> Result<Rational> {
    expected_partial_increment(params, x, y, Club::new(1, params.n())?)
}

/// `E_x ⟨y, e⟩` restricted to the labels in `club`.
pub fn expected_partial_increment(
    params: &SystemParams,
    x: &Configuration,
    y: &[Rational],
    club: Club,
) -> Result<Rational> {
    check_weights(params, y)?;
    club.check(params.n())?;
    expected_change(params, x, |z| weighted_sum(params, y, z, club))
}

/// `⟨y, u⟩` over `club`, i.e. `Σ m_i y_i u_i`.
pub fn velocity_pairing(params: &SystemParams, y: &[Rational], club: Club) -> Result<Rational> {
    check_weights(params, y)?;
    club.check(params.n())?;
    let u = params.velocities();
    Ok((club.first..=club.last)
        .map(|l| &params.masses()[l - 1] * &y[l - 1] * &u[l - 1])
        .sum())
}

/// `Ψ(x)^2` for the block of labels `lo+1..=hi` (boundary-index convention,
/// `0 <= lo < hi <= N`): the total mass times the mass-weighted variance of
/// the block's positions.
pub fn lyapunov_psi_squared(params: &SystemParams, x: &Configuration, lo: usize, hi: usize) -> Result<Rational> {
    if x.len() != params.n() {
        return Err(invalid("configuration and parameters disagree on N"));
    }
    if lo >= hi || hi > params.n() {
        return Err(invalid(format!("bad block boundaries ({lo}, {hi})")));
    }
    let m = &params.masses()[lo..hi];
    let xs = &x.positions()[lo..hi];
    let mass: Rational = m.iter().sum();
    let centre: Rational = m.iter().zip(xs).map(|(mi, xi)| mi * rational::int(*xi)).sum::<Rational>() / &mass;
    let mut acc = rational::zero();
    for (mi, xi) in m.iter().zip(xs) {
        let d = rational::int(*xi) - &centre;
        acc += mi * &d * &d;
    }
    debug_assert!(!acc.is_zero() || xs.windows(2).all(|w| w[0] == w[1]));
    Ok(acc)
}

pub fn lyapunov_psi(params: &SystemParams, x: &Configuration, lo: usize, hi: usize) -> Result<f64> {
    Ok(rational::to_f64(&lyapunov_psi_squared(params, x, lo, hi)?).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::potential_path;
    use crate::rational::{int, ratio};

    fn ones(n: usize) -> Vec<Rational> {
        vec![int(1); n]
    }

    #[test]
    fn all_ones_weights_give_global_drift() {
        let p = SystemParams::new(
            vec![int(1), int(2), ratio(1, 2)],
            vec![int(1), ratio(1, 3), int(2)],
            vec![int(3), int(0), ratio(5, 4)],
        )
        .unwrap();
        let path = potential_path(&p);
        for pos in [vec![0, 0, 0], vec![0, 1, 1], vec![-2, 5, 9], vec![3, 3, 4]] {
            let x = Configuration::new(pos).unwrap();
            let r = jump_rates(&p, &x).unwrap().total;
            assert_eq!(expected_increment(&p, &x, &ones(3)).unwrap(), -&path.u_points[3] / r);
        }
    }

    #[test]
    fn symmetric_pair_has_zero_drift() {
        let p = SystemParams::unit_masses(vec![int(1), int(0)], vec![int(0), int(1)]).unwrap();
        let x = Configuration::stacked(2, 0);
        assert_eq!(expected_increment(&p, &x, &ones(2)).unwrap(), int(0));
    }

    #[test]
    fn zero_weights_give_zero() {
        let p = SystemParams::unit_masses(vec![int(2), int(1)], vec![int(0), int(3)]).unwrap();
        let x = Configuration::new(vec![0, 4]).unwrap();
        assert_eq!(expected_increment(&p, &x, &[int(0), int(0)]).unwrap(), int(0));
    }

    #[test]
    fn frozen_state_is_an_error() {
        let p = SystemParams::unit_masses(vec![int(0); 2], vec![int(0); 2]).unwrap();
        let x = Configuration::new(vec![0, 1]).unwrap();
        assert_eq!(expected_increment(&p, &x, &ones(2)), Err(Error::Frozen));
    }

    #[test]
    fn weight_length_is_checked() {
        let p = SystemParams::unit_masses(vec![int(1); 2], vec![int(1); 2]).unwrap();
        let x = Configuration::new(vec![0, 1]).unwrap();
        assert!(expected_increment(&p, &x, &ones(3)).is_err());
    }

    #[test]
    fn psi_examples() {
        let p = SystemParams::unit_masses(vec![int(1); 2], vec![int(1); 2]).unwrap();
        let x = Configuration::new(vec![0, 2]).unwrap();
        assert_eq!(lyapunov_psi_squared(&p, &x, 0, 2).unwrap(), int(2));
        assert!((lyapunov_psi(&p, &x, 0, 2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let stacked = Configuration::new(vec![5, 5]).unwrap();
        assert_eq!(lyapunov_psi(&p, &stacked, 0, 2).unwrap(), 0.0);
        assert!(lyapunov_psi(&p, &x, 1, 1).is_err());
        assert!(lyapunov_psi(&p, &x, 0, 3).is_err());
    }
}
