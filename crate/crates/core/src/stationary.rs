//! Exact stationary quantities of the gap chain: the two-particle closed form
//! and the Kolmogorov cycle test on a truncated state box.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{rates_for, Configuration, GapVector, Interaction, SystemParams};
use crate::rational::{self, Rational};

/// Clock of the gap chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScale {
    /// Transition rates.
    #[default]
    Continuous,
    /// Jump probabilities, rates divided by the total rate.
    JumpChain,
}

/// Outgoing transitions of the gap chain from `gap`, merged by target.
pub fn gap_transitions(
    params: &SystemParams,
    interaction: Interaction,
    time: TimeScale,
    gap: &GapVector,
) -> Result<BTreeMap<Vec<i64>, Rational>> {
    if gap.len() + 1 != params.n() {
        return Err(invalid(format!("gap vector has {} entries, N = {}", gap.len(), params.n())));
    }
    let x = Configuration::from_gaps(0, gap);
    let rates = rates_for(params, &x, interaction)?;
    let mut out = BTreeMap::new();
    for jump in rates.jumps() {
        let next = x.moved(jump.label, jump.step).expect("legal jump");
        *out.entry(next.gaps().values().to_vec()).or_insert_with(Rational::zero) += &jump.rate;
    }
    if time == TimeScale::JumpChain && !rates.total.is_zero() {
        for v in out.values_mut() {
            *v /= &rates.total;
        }
    }
    Ok(out)
}

fn transition(
    params: &SystemParams,
    interaction: Interaction,
    time: TimeScale,
    from: &[i64],
    to: &[i64],
) -> Result<Rational> {
    let g = GapVector::new(from.to_vec())?;
    Ok(gap_transitions(params, interaction, time, &g)?
        .remove(to)
        .unwrap_or_else(Rational::zero))
}

/// `π_0` at zero and `π_k = c ρ^{k-1}` for `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroModifiedGeometric {
    #[serde(with = "rational::single")]
    pub pi0: Rational,
    #[serde(with = "rational::single")]
    pub jump_mass: Rational,
    #[serde(with = "rational::single")]
    pub ratio: Rational,
}

impl ZeroModifiedGeometric {
    pub fn mass(&self, k: u64) -> Rational {
        if k == 0 {
            return self.pi0.clone();
        }
        let exp = usize::try_from(k - 1).expect("exponent fits usize");
        &self.jump_mass * num_traits::pow(self.ratio.clone(), exp)
    }

    /// `Σ_{j ≥ k} π_j` in closed form.
    pub fn tail(&self, k: u64) -> Rational {
        if k == 0 {
            return rational::one();
        }
        self.mass(k) / (rational::one() - &self.ratio)
    }

    pub fn total(&self) -> Rational {
        &self.pi0 + self.tail(1)
    }

    /// States `0, 1, ...` while their mass is at least `cutoff`.
    pub fn truncated_support(&self, cutoff: f64) -> Vec<(Vec<i64>, f64)> {
        let mut out = Vec::new();
        let rho = rational::to_f64(&self.ratio);
        let mut p = rational::to_f64(&self.pi0);
        if p >= cutoff {
            out.push((vec![0], p));
        }
        p = rational::to_f64(&self.jump_mass);
        let mut k = 1;
        while p >= cutoff && p > 0.0 {
            out.push((vec![k], p));
            p *= rho;
            k += 1;
        }
        out
    }
}

/// Stationary law of the gap of a two-particle system.
pub fn n2_stationary(params: &SystemParams) -> Result<ZeroModifiedGeometric> {
    if params.n() != 2 {
        return Err(invalid(format!("closed form needs N = 2, got {}", params.n())));
    }
    let rate = |from: i64, to: i64| transition(params, Interaction::Elastic, TimeScale::Continuous, &[from], &[to]);
    let up0 = rate(0, 1)?;
    let up = rate(1, 2)?;
    let down = rate(1, 0)?;
    if down <= up {
        return Err(Error::NoStationaryLaw(format!(
            "gap chain is not positive recurrent: up rate {} >= down rate {}",
            rational::format(&up),
            rational::format(&down)
        )));
    }
    let ratio = &up / &down;
    let pi0 = rational::one() / (rational::one() + &up0 / (&down - &up));
    let jump_mass = &pi0 * &up0 / &down;
    Ok(ZeroModifiedGeometric { pi0, jump_mass, ratio })
}

/// Rate products around a closed cycle of gap states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle: Vec<Vec<i64>>,
    #[serde(with = "rational::single")]
    pub forward_product: Rational,
    #[serde(with = "rational::single")]
    pub backward_product: Rational,
    pub reversible_on_cycle: bool,
    /// Steps `i` (from `cycle[i]` to the next state) with a zero rate in either direction.
    pub illegal_steps: Vec<usize>,
}

/// `cycle` lists each state once; a repeated start at the end is accepted and dropped.
pub fn cycle_products(
    params: &SystemParams,
    cycle: &[Vec<i64>],
    interaction: Interaction,
    time: TimeScale,
) -> Result<CycleReport> {
    let mut states = cycle.to_vec();
    if states.len() >= 2 && states.first() == states.last() {
        states.pop();
    }
    if states.len() < 2 {
        return Err(invalid("a cycle needs at least two states"));
    }
    let mut forward = rational::one();
    let mut backward = rational::one();
    let mut illegal_steps = Vec::new();
    for i in 0..states.len() {
        let (a, b) = (&states[i], &states[(i + 1) % states.len()]);
        let f = transition(params, interaction, time, a, b)?;
        let r = transition(params, interaction, time, b, a)?;
        if f.is_zero() || r.is_zero() {
            illegal_steps.push(i);
        }
        forward *= f;
        backward *= r;
    }
    Ok(CycleReport {
        cycle: states,
        reversible_on_cycle: forward == backward,
        forward_product: forward,
        backward_product: backward,
        illegal_steps,
    })
}

/// Default cap on cycle length for [`reversibility_scan`].
pub const DEFAULT_MAX_CYCLE: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ScanOutcome {
    Violation(CycleReport),
    /// Every elementary cycle inside `[0, truncation]^{N-1}` up to the length cap balances.
    Certified {
        truncation: i64,
        max_cycle_length: usize,
        states: usize,
        cycles_checked: usize,
    },
}

impl ScanOutcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, ScanOutcome::Violation(_))
    }
}

fn box_states(dim: usize, k: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=k).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Searches elementary cycles of the gap chain inside the box `[0, K]^{N-1}`.
///
/// Starts are taken in lexicographic order and each cycle is visited from its
/// smallest state, so the first violation reported is deterministic.
pub fn reversibility_scan(
    params: &SystemParams,
    interaction: Interaction,
    time: TimeScale,
    truncation: i64,
    max_cycle_length: usize,
) -> Result<ScanOutcome> {
    if params.n() < 2 {
        return Err(invalid("reversibility scan needs N >= 2"));
    }
    if truncation < 1 {
        return Err(invalid("truncation level must be at least 1"));
    }
    if max_cycle_length < 2 {
        return Err(invalid("cycle length cap must be at least 2"));
    }
    let states = box_states(params.n() - 1, truncation);
    let index: HashMap<&[i64], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut rates: Vec<HashMap<usize, Rational>> = Vec::with_capacity(states.len());
    for s in &states {
        let out = gap_transitions(params, interaction, time, &GapVector::new(s.clone())?)?;
        rates.push(
            out.into_iter()
                .filter_map(|(t, r)| index.get(t.as_slice()).map(|&j| (j, r)))
                .collect(),
        );
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (i, out) in rates.iter().enumerate() {
        for &j in out.keys() {
            if j != i {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let rate = |i: usize, j: usize| rates[i].get(&j).cloned().unwrap_or_else(Rational::zero);

    let mut checked = 0usize;
    let mut path = Vec::with_capacity(max_cycle_length);
    let mut on_path = vec![false; states.len()];
    for start in 0..states.len() {
        path.clear();
        path.push(start);
        on_path[start] = true;
        // Each frame holds the position into the adjacency list of path[depth].
        let mut cursor = vec![0usize];
        while let Some(pos) = cursor.last_mut() {
            let node = *path.last().unwrap();
            let Some(&next) = adj[node].get(*pos) else {
                on_path[node] = false;
                path.pop();
                cursor.pop();
                continue;
            };
            *pos += 1;
            if next == start && path.len() >= 2 && (path.len() == 2 || path[1] < *path.last().unwrap()) {
                checked += 1;
                let (mut f, mut b) = (rational::one(), rational::one());
                for w in 0..path.len() {
                    let (i, j) = (path[w], path[(w + 1) % path.len()]);
                    f *= rate(i, j);
                    b *= rate(j, i);
                }
                if f != b {
                    let cycle: Vec<Vec<i64>> = path.iter().map(|&i| states[i].clone()).collect();
                    return cycle_products(params, &cycle, interaction, time).map(ScanOutcome::Violation);
                }
            } else if next > start && !on_path[next] && path.len() < max_cycle_length {
                path.push(next);
                on_path[next] = true;
                cursor.push(0);
            }
        }
    }
    Ok(ScanOutcome::Certified {
        truncation,
        max_cycle_length,
        states: states.len(),
        cycles_checked: checked,
    })
}

/// Exact `(πQ)_k` for `k = 0..=K` on the two-particle gap chain; all zero iff `π` balances there.
pub fn n2_balance_residuals(params: &SystemParams, law: &ZeroModifiedGeometric, truncation: u64) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for k in 0..=truncation {
        let g = GapVector::new(vec![k as i64])?;
        let outflow: Rational = gap_transitions(params, Interaction::Elastic, TimeScale::Continuous, &g)?
            .values()
            .sum();
        let mut r = -(law.mass(k) * outflow);
        for nb in [k.checked_sub(1), Some(k + 1)].into_iter().flatten() {
            let into = transition(params, Interaction::Elastic, TimeScale::Continuous, &[nb as i64], &[k as i64])?;
            r += law.mass(nb) * into;
        }
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rational::{int, ratio};

    fn three_particle_params() -> SystemParams {
        SystemParams::unit_masses(vec![int(1), int(1), int(2)], vec![int(2), int(1), int(1)]).unwrap()
    }

    fn triangle_cycle() -> Vec<Vec<i64>> {
        vec![vec![1, 1], vec![0, 2], vec![0, 1]]
    }

    fn pair(a: [Rational; 2], b: [Rational; 2]) -> SystemParams {
        SystemParams::unit_masses(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn cycle_products_elastic_and_exclusion() {
        let p = three_particle_params();
        let e = cycle_products(&p, &triangle_cycle(), Interaction::Elastic, TimeScale::Continuous).unwrap();
        assert_eq!((e.forward_product.clone(), e.backward_product.clone()), (int(4), int(6)));
        assert!(!e.reversible_on_cycle && e.illegal_steps.is_empty());
        let x = cycle_products(&p, &triangle_cycle(), Interaction::Exclusion, TimeScale::Continuous).unwrap();
        assert_eq!((x.forward_product, x.backward_product), (int(2), int(2)));
        assert!(x.reversible_on_cycle);
    }

    #[test]
    fn closing_state_is_optional() {
        let mut closed = triangle_cycle();
        closed.push(vec![1, 1]);
        let a = cycle_products(&three_particle_params(), &closed, Interaction::Elastic, TimeScale::Continuous).unwrap();
        let b = cycle_products(&three_particle_params(), &triangle_cycle(), Interaction::Elastic, TimeScale::Continuous).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reversed_cycle_swaps_products() {
        let mut rev = triangle_cycle();
        rev.reverse();
        let f = cycle_products(&three_particle_params(), &triangle_cycle(), Interaction::Elastic, TimeScale::Continuous).unwrap();
        let r = cycle_products(&three_particle_params(), &rev, Interaction::Elastic, TimeScale::Continuous).unwrap();
        assert_eq!(f.forward_product, r.backward_product);
        assert_eq!(f.backward_product, r.forward_product);
    }

    #[test]
    fn illegal_steps_are_flagged() {
        let c = vec![vec![0, 0], vec![2, 2]];
        let r = cycle_products(&three_particle_params(), &c, Interaction::Elastic, TimeScale::Continuous).unwrap();
        assert_eq!(r.illegal_steps, vec![0, 1]);
        assert!(r.forward_product.is_zero() && r.backward_product.is_zero());
        assert!(cycle_products(&three_particle_params(), &[vec![0, 0]], Interaction::Elastic, TimeScale::Continuous).is_err());
        assert!(cycle_products(&three_particle_params(), &[vec![0], vec![1]], Interaction::Elastic, TimeScale::Continuous).is_err());
    }

    #[test]
    fn two_step_cycles_balance() {
        let p = three_particle_params();
        for (a, b) in [(vec![1, 1], vec![0, 2]), (vec![0, 0], vec![1, 0]), (vec![2, 1], vec![2, 2])] {
            let r = cycle_products(&p, &[a, b], Interaction::Elastic, TimeScale::Continuous).unwrap();
            assert!(r.illegal_steps.is_empty());
            assert!(r.reversible_on_cycle);
        }
    }

    #[test]
    fn merged_transitions_for_a_pair() {
        // From gap 0, both the left move of particle 1 and the right move of particle 2 open the gap.
        let p = pair([int(1), int(2)], [int(2), int(1)]);
        let t = gap_transitions(&p, Interaction::Elastic, TimeScale::Continuous, &GapVector::new(vec![0]).unwrap()).unwrap();
        assert_eq!(t.into_iter().collect::<Vec<_>>(), vec![(vec![1], int(6))]);
        let t = gap_transitions(&p, Interaction::Elastic, TimeScale::JumpChain, &GapVector::new(vec![3]).unwrap()).unwrap();
        assert_eq!(t[&vec![2]], ratio(4, 6));
        assert_eq!(t[&vec![4]], ratio(2, 6));
    }

    #[test]
    fn pair_law_examples() {
        let law = n2_stationary(&pair([int(0), int(1)], [int(1), int(0)])).unwrap();
        assert_eq!(law.pi0, ratio(1, 2));
        assert_eq!(law.mass(1), ratio(1, 2));
        assert!(law.mass(2).is_zero());

        let law = n2_stationary(&pair([int(1), int(2)], [int(2), int(1)])).unwrap();
        assert_eq!(law.pi0, ratio(1, 4));
        for k in 1..10u64 {
            assert_eq!(law.mass(k), ratio(3, 8) * num_traits::pow(ratio(1, 2), (k - 1) as usize));
        }
        assert_eq!(law.total(), int(1));
        let support = law.truncated_support(1e-9);
        assert_eq!(support[0], (vec![0], 0.25));
        assert!(support.last().unwrap().1 >= 1e-9);
        assert!(support.len() > 25);
    }

    #[test]
    fn pair_law_matches_equal_mass_formula() {
        // π_0 = (u1-u2)/(2(b1+a2)), π_k = (u1-u2)(a1+a2+b1+b2)(a1+b2)^{k-1}/(2(b1+a2)^{k+1})
        let (a1, a2, b1, b2) = (ratio(1, 3), int(2), int(3), ratio(1, 2));
        let p = pair([a1.clone(), a2.clone()], [b1.clone(), b2.clone()]);
        let law = n2_stationary(&p).unwrap();
        let du = (&b1 - &a1) - (&b2 - &a2);
        let down = &b1 + &a2;
        assert_eq!(law.pi0, &du / (int(2) * &down));
        for k in 1..6usize {
            let expect = &du * (&a1 + &a2 + &b1 + &b2) * num_traits::pow(&a1 + &b2, k - 1)
                / (int(2) * num_traits::pow(down.clone(), k + 1));
            assert_eq!(law.mass(k as u64), expect);
        }
    }

    #[test]
    fn pair_law_rejects_unstable_or_wrong_size() {
        assert!(matches!(
            n2_stationary(&pair([int(1), int(1)], [int(1), int(1)])),
            Err(Error::NoStationaryLaw(_))
        ));
        assert!(matches!(
            n2_stationary(&pair([int(2), int(0)], [int(0), int(2)])),
            Err(Error::NoStationaryLaw(_))
        ));
        assert!(n2_stationary(&three_particle_params()).is_err());
    }

    #[test]
    fn pair_law_with_unequal_masses_balances() {
        let p = SystemParams::new(vec![int(1), int(3)], vec![int(1), int(2)], vec![int(2), int(1)]).unwrap();
        let law = n2_stationary(&p).unwrap();
        assert_eq!(law.total(), int(1));
        assert!(n2_balance_residuals(&p, &law, 12).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn scan_finds_three_particle_violation() {
        let out = reversibility_scan(&three_particle_params(), Interaction::Elastic, TimeScale::Continuous, 2, 4).unwrap();
        match out {
            ScanOutcome::Violation(r) => {
                assert!(!r.reversible_on_cycle);
                assert!(r.cycle.len() <= 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pair_chains_are_certified() {
        for p in [pair([int(1), int(2)], [int(2), int(1)]), pair([int(0), int(3)], [int(5), ratio(1, 7)])] {
            for k in [1, 4, 9] {
                let out = reversibility_scan(&p, Interaction::Elastic, TimeScale::Continuous, k, 6).unwrap();
                assert!(!out.is_violation(), "{out:?}");
            }
        }
    }

    #[test]
    fn exclusion_reversibility_needs_balanced_rate_products() {
        // Balanced: a1 a2 a3 = b1 b2 b3.
        let balanced =
            SystemParams::unit_masses(vec![int(2), int(3), ratio(1, 2)], vec![int(1), ratio(3, 2), int(2)]).unwrap();
        let out = reversibility_scan(&balanced, Interaction::Exclusion, TimeScale::Continuous, 3, 6).unwrap();
        assert!(matches!(out, ScanOutcome::Certified { cycles_checked, .. } if cycles_checked > 0), "{out:?}");
        let skewed = SystemParams::unit_masses(vec![int(2), int(3), int(1)], vec![int(1), int(1), int(2)]).unwrap();
        let out = reversibility_scan(&skewed, Interaction::Exclusion, TimeScale::Continuous, 3, 6).unwrap();
        assert!(out.is_violation());
    }

    #[test]
    fn scan_rejects_bad_input() {
        let p = three_particle_params();
        assert!(reversibility_scan(&p, Interaction::Elastic, TimeScale::Continuous, 0, 6).is_err());
        assert!(reversibility_scan(&p, Interaction::Elastic, TimeScale::Continuous, 2, 1).is_err());
        let one = SystemParams::unit_masses(vec![int(1)], vec![int(1)]).unwrap();
        assert!(reversibility_scan(&one, Interaction::Elastic, TimeScale::Continuous, 2, 6).is_err());
    }

    fn rate_strategy() -> impl Strategy<Value = Rational> {
        (0i64..6, 1i64..4).prop_map(|(p, q)| ratio(p, q))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn equal_mass_time_scales_agree(
            a in proptest::collection::vec(rate_strategy(), 3),
            b in proptest::collection::vec(rate_strategy(), 3),
        ) {
            let p = SystemParams::unit_masses(a, b).unwrap();
            prop_assume!(!p.is_inert());
            let c = reversibility_scan(&p, Interaction::Elastic, TimeScale::Continuous, 2, 4).unwrap();
            let j = reversibility_scan(&p, Interaction::Elastic, TimeScale::JumpChain, 2, 4).unwrap();
            prop_assert_eq!(c.is_violation(), j.is_violation());
            let fc = cycle_products(&p, &triangle_cycle(), Interaction::Elastic, TimeScale::Continuous).unwrap();
            let fj = cycle_products(&p, &triangle_cycle(), Interaction::Elastic, TimeScale::JumpChain).unwrap();
            prop_assert_eq!(fc.reversible_on_cycle, fj.reversible_on_cycle);
        }

        #[test]
        fn pair_law_balances_exactly(
            a in proptest::collection::vec(rate_strategy(), 2),
            b in proptest::collection::vec(rate_strategy(), 2),
        ) {
            let p = SystemParams::unit_masses(a, b).unwrap();
            if let Ok(law) = n2_stationary(&p) {
                prop_assert_eq!(law.total(), int(1));
                prop_assert!(n2_balance_residuals(&p, &law, 8).unwrap().iter().all(Zero::is_zero));
                prop_assert!(law.ratio < int(1));
            }
        }
    }
}
