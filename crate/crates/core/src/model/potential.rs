use serde::{Deserialize, Serialize};

use super::{Club, Configuration, SystemParams};
use crate::error::{invalid, Result};
use crate::rational::{self, Rational};

/// Points `(M_k, U_k)`, `k = 0..=N`: cumulative mass and negated cumulative
/// momentum `U_k = -Σ_{i<=k} m_i u_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialPath {
    #[serde(with = "rational::vec")]
    pub m_points: Vec<Rational>,
    #[serde(with = "rational::vec")]
    pub u_points: Vec<Rational>,
}

impl PotentialPath {
    /// Number of particles `N` (one less than the number of points).
    pub fn n(&self) -> usize {
        self.m_points.len() - 1
    }

    /// `U_{l,k} = U_k - U_l`.
    pub fn u_diff(&self, l: usize, k: usize) -> Rational {
        &self.u_points[k] - &self.u_points[l]
    }

    /// `M_{l,k} = M_k - M_l`.
    pub fn m_diff(&self, l: usize, k: usize) -> Rational {
        &self.m_points[k] - &self.m_points[l]
    }

    /// `U_{l,k} / M_{l,k}` for `l < k`.
    pub fn slope(&self, l: usize, k: usize) -> Rational {
        debug_assert!(l < k);
        self.u_diff(l, k) / self.m_diff(l, k)
    }

    /// Builds a path from explicit points, checking `M_0 = U_0 = 0` and that
    /// `M` is strictly increasing.
    pub fn from_points(m_points: Vec<Rational>, u_points: Vec<Rational>) -> Result<Self> {
        if m_points.len() < 2 || m_points.len() != u_points.len() {
            return Err(invalid("a potential path needs matching M and U lists with at least two points"));
        }
        if m_points[0] != rational::zero() || u_points[0] != rational::zero() {
            return Err(invalid("a potential path starts at the origin"));
        }
        if m_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("cumulative masses must be strictly increasing"));
        }
        Ok(Self { m_points, u_points })
    }
}

pub fn potential_path(params: &SystemParams) -> PotentialPath {
    let n = params.n();
    let mut m_points = Vec::with_capacity(n + 1);
    let mut u_points = Vec::with_capacity(n + 1);
    let (mut m_acc, mut u_acc) = (rational::zero(), rational::zero());
    m_points.push(m_acc.clone());
    u_points.push(u_acc.clone());
    for (m, u) in params.masses().iter().zip(params.velocities()) {
        m_acc += m;
        u_acc -= m * u;
        m_points.push(m_acc.clone());
        u_points.push(u_acc.clone());
    }
    PotentialPath { m_points, u_points }
}

/// Mass-weighted mean position `Σ m_i x_i / M_N`.
pub fn centre_of_mass(params: &SystemParams, x: &Configuration) -> Result<Rational> {
    club_centre_of_mass(params, x, Club::new(1, params.n())?)
}

/// Mass-weighted mean position of the particles in `club`.
pub fn club_centre_of_mass(params: &SystemParams, x: &Configuration, club: Club) -> Result<Rational> {
    if params.n() != x.len() {
        return Err(invalid("configuration and parameters disagree on N"));
    }
    club.check(x.len())?;
    let m = params.masses();
    let mut weighted = rational::zero();
    let mut mass = rational::zero();
    for label in club.first..=club.last {
        weighted += &m[label - 1] * rational::int(x.at(label));
        mass += &m[label - 1];
    }
    Ok(weighted / mass)
}
