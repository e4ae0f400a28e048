use serde::{Deserialize, Serialize};

use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::{self, Rational};

/// Masses `m_i` and intrinsic left/right jump rates `a_i`, `b_i` for `n`
/// labelled particles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SystemParams {
    masses: Vec<Rational>,
    left_rates: Vec<Rational>,
    right_rates: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(with = "rational::vec")]
    masses: Vec<Rational>,
    #[serde(with = "rational::vec")]
    left_rates: Vec<Rational>,
    #[serde(with = "rational::vec")]
    right_rates: Vec<Rational>,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SystemParams::new(raw.masses, raw.left_rates, raw.right_rates)
    }
}

impl From<SystemParams> for RawParams {
    fn from(p: SystemParams) -> Self {
        RawParams {
            masses: p.masses,
            left_rates: p.left_rates,
            right_rates: p.right_rates,
        }
    }
}

impl SystemParams {
    pub fn new(masses: Vec<Rational>, left_rates: Vec<Rational>, right_rates: Vec<Rational>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(invalid("a system needs at least one particle"));
        }
        if left_rates.len() != n || right_rates.len() != n {
            return Err(invalid(format!(
                "length mismatch: {} masses, {} left rates, {} right rates",
                n,
                left_rates.len(),
                right_rates.len()
            )));
        }
        if let Some(i) = masses.iter().position(|m| !m.is_positive()) {
            return Err(invalid(format!("mass of particle {} must be positive", i + 1)));
        }
        for (name, rates) in [("left", &left_rates), ("right", &right_rates)] {
            if let Some(i) = rates.iter().position(|r| r.is_negative()) {
                return Err(invalid(format!("{name} rate of particle {} is negative", i + 1)));
            }
        }
        Ok(Self {
            masses,
            left_rates,
            right_rates,
        })
    }

    /// Unit masses with the given rates.
    pub fn unit_masses(left_rates: Vec<Rational>, right_rates: Vec<Rational>) -> Result<Self> {
        let masses = vec![rational::one(); left_rates.len()];
        Self::new(masses, left_rates, right_rates)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn left_rates(&self) -> &[Rational] {
        &self.left_rates
    }

    pub fn right_rates(&self) -> &[Rational] {
        &self.right_rates
    }

    /// Intrinsic velocities `u_i = b_i - a_i`.
    pub fn velocities(&self) -> Vec<Rational> {
        self.right_rates
            .iter()
            .zip(&self.left_rates)
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn total_mass(&self) -> Rational {
        self.masses.iter().sum()
    }

    pub fn has_equal_masses(&self) -> bool {
        self.masses.windows(2).all(|w| w[0] == w[1])
    }

    /// `Σ (a_i + b_i)` over all particles.
    pub fn intrinsic_activity(&self) -> Rational {
        self.left_rates.iter().chain(&self.right_rates).sum()
    }

    /// `Σ (a_i + b_i)` over labels `first..=last` (1-based).
    pub fn club_activity(&self, first: usize, last: usize) -> Rational {
        (first - 1..last)
            .map(|i| &self.left_rates[i] + &self.right_rates[i])
            .sum()
    }

    pub fn is_inert(&self) -> bool {
        self.intrinsic_activity().is_zero()
    }

    /// Same system with every mass multiplied by `factor`.
    pub fn scale_masses(&self, factor: &Rational) -> Result<Self> {
        Self::new(
            self.masses.iter().map(|m| m * factor).collect(),
            self.left_rates.clone(),
            self.right_rates.clone(),
        )
    }

    /// Same system with every rate multiplied by `factor`.
    pub fn scale_rates(&self, factor: &Rational) -> Result<Self> {
        Self::new(
            self.masses.clone(),
            self.left_rates.iter().map(|a| a * factor).collect(),
            self.right_rates.iter().map(|b| b * factor).collect(),
        )
    }

    /// Same system with `shift` added to every left rate.
    pub fn shift_left_rates(&self, shift: &Rational) -> Result<Self> {
        Self::new(
            self.masses.clone(),
            self.left_rates.iter().map(|a| a + shift).collect(),
            self.right_rates.clone(),
        )
    }
}
