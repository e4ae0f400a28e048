use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Configuration, SystemParams};
use crate::error::{invalid, Result};
use crate::rational::{self, Rational};

/// Collision rule applied when particles share a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    /// The bottom (top) particle of a stack carries the whole stack's
    /// left (right) momentum.
    Elastic,
    /// Only the bottom (top) particle may move, at its own intrinsic rate.
    Exclusion,
}

/// Left rates `A_i(x)`, right rates `B_i(x)` and their total `R_x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateVector {
    pub left: Vec<Rational>,
    pub right: Vec<Rational>,
    pub total: Rational,
}

/// One possible transition out of a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jump {
    /// 1-based particle label.
    pub label: usize,
    /// `-1` or `+1`.
    pub step: i64,
    pub rate: Rational,
}

impl RateVector {
    fn from_parts(left: Vec<Rational>, right: Vec<Rational>) -> Self {
        let total = left.iter().chain(&right).sum();
        Self { left, right, total }
    }

    pub fn is_frozen(&self) -> bool {
        self.total.is_zero()
    }

    /// Transitions with a nonzero rate, left jump before right jump for each
    /// label, labels in increasing order.
    pub fn jumps(&self) -> impl Iterator<Item = Jump> + '_ {
        self.left
            .iter()
            .zip(&self.right)
            .enumerate()
            .flat_map(|(i, (a, b))| {
                [(-1, a), (1, b)]
                    .into_iter()
                    .filter(|(_, r)| !r.is_zero())
                    .map(move |(step, r)| Jump {
                        label: i + 1,
                        step,
                        rate: r.clone(),
                    })
            })
    }
}

fn check_dims(params: &SystemParams, x: &Configuration) -> Result<()> {
    if params.n() != x.len() {
        return Err(invalid(format!(
            "configuration has {} particles but parameters describe {}",
            x.len(),
            params.n()
        )));
    }
    Ok(())
}

/// Elastic jump rates: the bottom particle of a stack jumps left at rate
/// `Σ_j m_j a_j / m_bottom` summed over the stack, the top particle jumps right
/// at `Σ_j m_j b_j / m_top`; all other particles of the stack are blocked.
pub fn jump_rates(params: &SystemParams, x: &Configuration) -> Result<RateVector> {
    check_dims(params, x)?;
    let n = params.n();
    let (m, a, b) = (params.masses(), params.left_rates(), params.right_rates());
    let mut left = vec![rational::zero(); n];
    let mut right = vec![rational::zero(); n];
    for (lo, hi) in x.stacks() {
        let push_left: Rational = (lo..=hi).map(|j| &m[j] * &a[j]).sum();
        let push_right: Rational = (lo..=hi).map(|j| &m[j] * &b[j]).sum();
        left[lo] = push_left / &m[lo];
        right[hi] = push_right / &m[hi];
    }
    Ok(RateVector::from_parts(left, right))
}

/// Exclusion rates `A_i = 1{x_{i-1} < x_i} a_i`, `B_i = 1{x_{i+1} > x_i} b_i`.
pub fn exclusion_rates(params: &SystemParams, x: &Configuration) -> Result<RateVector> {
    check_dims(params, x)?;
    let n = params.n();
    let mut left = vec![rational::zero(); n];
    let mut right = vec![rational::zero(); n];
    for (lo, hi) in x.stacks() {
        left[lo] = params.left_rates()[lo].clone();
        right[hi] = params.right_rates()[hi].clone();
    }
    Ok(RateVector::from_parts(left, right))
}

pub fn rates_for(params: &SystemParams, x: &Configuration, interaction: Interaction) -> Result<RateVector> {
    match interaction {
        Interaction::Elastic => jump_rates(params, x),
        Interaction::Exclusion => exclusion_rates(params, x),
    }
}
