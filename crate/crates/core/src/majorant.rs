//! Least concave majorant of the potential path and the cloud decomposition
//! it induces.
//!
//! Boundary indices are the `k` where `(M_k, U_k)` lies *on* the majorant,
//! which includes points in the interior of a face. The hull scan therefore
//! only pops strictly-below points and keeps collinear ones.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::rng::replica_rng;
use crate::error::{invalid, Result};
use crate::model::{potential_path, Club, PotentialPath, SystemParams};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloudDecomposition {
    /// `0 = k_0 < k_1 < ... < k_ν = N`.
    pub boundary: Vec<usize>,
    /// `[k_{j-1}+1 ..= k_j]` for each `j`.
    pub clouds: Vec<Club>,
    /// `v_j = U_{k_{j-1},k_j} / M_{k_{j-1},k_j}`, weakly decreasing.
    pub slopes: Vec<Rational>,
    /// Asymptotic cloud speeds `-v_j`.
    pub speeds: Vec<Rational>,
    /// Whether each cloud has some intrinsic activity; only known when the
    /// decomposition was built from [`SystemParams`].
    pub non_degenerate: Option<Vec<bool>>,
}

/// JSON form of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub boundary: Vec<usize>,
    pub clouds: Vec<[usize; 2]>,
    #[serde(with = "rational::vec")]
    pub speeds: Vec<Rational>,
    pub stable: bool,
    pub non_degenerate: Vec<bool>,
}

impl CloudDecomposition {
    /// Number of clouds `ν`.
    pub fn cloud_count(&self) -> usize {
        self.clouds.len()
    }

    pub fn is_single_cloud(&self) -> bool {
        self.clouds.len() == 1
    }

    /// Index (0-based) of the cloud containing particle `label`.
    pub fn cloud_of(&self, label: usize) -> Option<usize> {
        self.clouds.iter().position(|c| c.contains(label))
    }

    /// Predicted asymptotic speed of particle `label`.
    pub fn particle_speed(&self, label: usize) -> Option<&Rational> {
        self.cloud_of(label).map(|j| &self.speeds[j])
    }

    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            boundary: self.boundary.clone(),
            clouds: self.clouds.iter().map(|c| [c.first, c.last]).collect(),
            speeds: self.speeds.clone(),
            stable: self.is_single_cloud(),
            non_degenerate: self.non_degenerate.clone().unwrap_or_default(),
        }
    }
}

/// `(a - o) × (b - o)`; positive means `a` lies strictly below the chord `o → b`.
fn turn(path: &PotentialPath, o: usize, a: usize, b: usize) -> Rational {
    let (m, u) = (&path.m_points, &path.u_points);
    (&m[a] - &m[o]) * (&u[b] - &u[o]) - (&u[a] - &u[o]) * (&m[b] - &m[o])
}

pub fn least_concave_majorant(path: &PotentialPath) -> CloudDecomposition {
    let mut hull: Vec<usize> = Vec::with_capacity(path.m_points.len());
    for k in 0..path.m_points.len() {
        while hull.len() >= 2 && turn(path, hull[hull.len() - 2], hull[hull.len() - 1], k).is_positive() {
            hull.pop();
        }
        hull.push(k);
    }
    let clouds = hull
        .windows(2)
        .map(|w| Club {
            first: w[0] + 1,
            last: w[1],
        })
        .collect();
    let slopes: Vec<Rational> = hull.windows(2).map(|w| path.slope(w[0], w[1])).collect();
    let speeds = slopes.iter().map(|v| -v).collect();
    CloudDecomposition {
        boundary: hull,
        clouds,
        slopes,
        speeds,
        non_degenerate: None,
    }
}

/// Decomposition of a concrete system, including non-degeneracy flags.
pub fn decompose(params: &SystemParams) -> CloudDecomposition {
    let mut d = least_concave_majorant(&potential_path(params));
    d.non_degenerate = Some(
        d.clouds
            .iter()
            .map(|c| params.club_activity(c.first, c.last).is_positive())
            .collect(),
    );
    d
}

/// `U_k / M_k < U_N / M_N` for every `k` in `1..N`.
pub fn is_stable(path: &PotentialPath) -> bool {
    let n = path.n();
    let global = path.slope(0, n);
    (1..n).all(|k| path.slope(0, k) < global)
}

/// `U_{l,k} / M_{l,k} < U_{l,r} / M_{l,r}` for every `k` strictly between
/// `l` and `r`.
pub fn is_locally_stable(path: &PotentialPath, l: usize, r: usize) -> Result<bool> {
    if l >= r || r > path.n() {
        return Err(invalid(format!("need 0 <= l < r <= N, got l={l}, r={r}")));
    }
    let whole = path.slope(l, r);
    Ok((l + 1..r).all(|k| path.slope(l, k) < whole))
}

/// Law of an i.i.d. random environment for the rates `(a_i, b_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentLaw {
    /// `a_i` and `b_i` independent, uniform on `[low, high)`, drawn on a grid
    /// of `2^32` points so the rates stay exact rationals.
    Uniform {
        #[serde(with = "rational::single")]
        low: Rational,
        #[serde(with = "rational::single")]
        high: Rational,
    },
}

impl Default for EnvironmentLaw {
    fn default() -> Self {
        EnvironmentLaw::Uniform {
            low: rational::zero(),
            high: rational::one(),
        }
    }
}

const GRID_BITS: u32 = 32;

impl EnvironmentLaw {
    fn validate(&self) -> Result<()> {
        match self {
            EnvironmentLaw::Uniform { low, high } => {
                if low.is_negative() || low >= high {
                    return Err(invalid("uniform environment needs 0 <= low < high"));
                }
                Ok(())
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Rational {
        match self {
            EnvironmentLaw::Uniform { low, high } => {
                let k: u32 = rng.random();
                let frac = Rational::new(BigInt::from(k), BigInt::from(1u64 << GRID_BITS));
                low + (high - low) * frac
            }
        }
    }

    /// Unit-mass system of size `n` with rates drawn from this law.
    pub fn sample_system<R: Rng>(&self, n: usize, rng: &mut R) -> Result<SystemParams> {
        self.validate()?;
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for _ in 0..n {
            left.push(self.draw(rng));
            right.push(self.draw(rng));
        }
        SystemParams::unit_masses(left, right)
    }
}

/// Monte Carlo summary of the cloud count over random environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSummary {
    pub n: usize,
    pub replicas: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Normal-approximation 95% interval for the mean.
    pub ci95: [f64; 2],
    /// `Σ_{k=1}^n 1/k`, the expected face count for exchangeable increments.
    pub harmonic_reference: f64,
    pub counts: Vec<usize>,
}

/// Mean number of clouds over `replicas` environments of size `n`.
/// Environment `r` is drawn from stream `r` of `seed`.
pub fn random_environment_cloud_count(
    n: usize,
    law: &EnvironmentLaw,
    replicas: u64,
    seed: u64,
) -> Result<EnvironmentSummary> {
    if n == 0 || replicas == 0 {
        return Err(invalid("need n >= 1 and at least one replica"));
    }
    law.validate()?;
    let counts: Vec<usize> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let params = law.sample_system(n, &mut rng)?;
            Ok(least_concave_majorant(&potential_path(&params)).cloud_count())
        })
        .collect::<Result<_>>()?;
    let len = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / len;
    let var = if counts.len() > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (len - 1.0)
    } else {
        0.0
    };
    let std_error = (var / len).sqrt();
    Ok(EnvironmentSummary {
        n,
        replicas,
        seed,
        mean,
        std_error,
        ci95: [mean - 1.96 * std_error, mean + 1.96 * std_error],
        harmonic_reference: (1..=n).map(|k| 1.0 / k as f64).sum(),
        counts,
    })
}
