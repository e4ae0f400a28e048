use num_traits::Zero;
use rand::Rng;
use rand_distr::Exp1;

use super::rng::SimRng;
use super::Mode;
use crate::error::{Error, Result};
use crate::model::{rates_for, Configuration, Interaction, SystemParams};
use crate::rational;

/// Float copy of the parameters plus scratch rate buffers.
pub(super) struct Kernel {
    interaction: Interaction,
    jump_chain: bool,
    mass: Vec<f64>,
    /// `m_i a_i` (elastic) or `a_i` (exclusion).
    push_left: Vec<f64>,
    push_right: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

pub(super) enum KernelStep {
    Frozen,
    /// `index` is 0-based into the ordered configuration.
    Jump { index: usize, step: i64, holding: f64 },
}

impl Kernel {
    pub(super) fn new(params: &SystemParams, mode: Mode) -> Self {
        let interaction = match mode {
            Mode::Exclusion => Interaction::Exclusion,
            _ => Interaction::Elastic,
        };
        let f = |v: &[crate::Rational]| v.iter().map(rational::to_f64).collect::<Vec<_>>();
        let mass = f(params.masses());
        let (a, b) = (f(params.left_rates()), f(params.right_rates()));
        let (push_left, push_right) = match interaction {
            Interaction::Elastic => (
                mass.iter().zip(&a).map(|(m, a)| m * a).collect(),
                mass.iter().zip(&b).map(|(m, b)| m * b).collect(),
            ),
            Interaction::Exclusion => (a, b),
        };
        let n = params.n();
        Self {
            interaction,
            jump_chain: mode == Mode::JumpChain,
            mass,
            push_left,
            push_right,
            left: vec![0.0; n],
            right: vec![0.0; n],
        }
    }

    fn fill(&mut self, x: &[i64]) -> f64 {
        self.left.iter_mut().for_each(|v| *v = 0.0);
        self.right.iter_mut().for_each(|v| *v = 0.0);
        let n = x.len();
        let mut total = 0.0;
        let mut lo = 0;
        while lo < n {
            let mut hi = lo;
            while hi + 1 < n && x[hi + 1] == x[lo] {
                hi += 1;
            }
            let (l, r) = match self.interaction {
                Interaction::Elastic => {
                    let sl: f64 = self.push_left[lo..=hi].iter().sum();
                    let sr: f64 = self.push_right[lo..=hi].iter().sum();
                    (sl / self.mass[lo], sr / self.mass[hi])
                }
                Interaction::Exclusion => (self.push_left[lo], self.push_right[hi]),
            };
            self.left[lo] = l;
            self.right[hi] = r;
            total += l + r;
            lo = hi + 1;
        }
        total
    }

    pub(super) fn step(&mut self, params: &SystemParams, x: &[i64], rng: &mut SimRng) -> Result<KernelStep> {
        let total = self.fill(x);
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            let exact = rates_for(params, &Configuration::from_sorted_unchecked(x.to_vec()), self.interaction)?;
            if exact.total.is_zero() {
                return Ok(KernelStep::Frozen);
            }
            return Err(Error::Precision(format!(
                "total rate {} is positive but evaluates to {total} in double precision",
                rational::format(&exact.total)
            )));
        }
        // The holding-time draw is consumed in every mode so that jump-chain
        // and continuous-time runs with one seed visit the same states.
        let e: f64 = rng.sample(Exp1);
        let holding = if self.jump_chain { 1.0 } else { e / total };
        let mut u = rng.random::<f64>() * total;
        let mut fallback = None;
        for i in 0..x.len() {
            for (rate, step) in [(self.left[i], -1), (self.right[i], 1)] {
                if rate > 0.0 {
                    if u < rate {
                        return Ok(KernelStep::Jump { index: i, step, holding });
                    }
                    u -= rate;
                    fallback = Some((i, step));
                }
            }
        }
        // Rounding left `u` just past the last bucket.
        let (index, step) = fallback.expect("positive total has a positive rate");
        Ok(KernelStep::Jump { index, step, holding })
    }
}

/// Sorts labels by `(position, label)`: `order[k]` is the label of rank `k`.
pub(super) fn rank_order(labelled: &[i64], order: &mut [usize]) {
    order.sort_unstable_by_key(|&l| (labelled[l], l));
}

/// Outcome of a single [`step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Jumped { next: Configuration, holding_time: f64 },
    Frozen,
}

/// One transition of the chosen dynamics from `x`. In jump-chain mode the
/// holding time is one event. Rank mode acts on the ordered projection, so it
/// coincides with elastic mode here.
pub fn step(params: &SystemParams, x: &Configuration, mode: Mode, rng: &mut SimRng) -> Result<Step> {
    if x.len() != params.n() {
        return Err(Error::InvalidInput("configuration and parameters disagree on N".into()));
    }
    let mut kernel = Kernel::new(params, mode);
    match kernel.step(params, x.positions(), rng)? {
        KernelStep::Frozen => Ok(Step::Frozen),
        KernelStep::Jump { index, step, holding } => {
            let next = x
                .moved(index + 1, step)
                .expect("rate law only produces ordered configurations");
            Ok(Step::Jumped {
                next,
                holding_time: holding,
            })
        }
    }
}
