//! Event-driven simulation of the particle dynamics.
//!
//! Each step draws an exponential holding time with parameter `R_x` and then
//! picks one transition with probability proportional to its rate (direct
//! Gillespie stepping). Rates are evaluated in `f64` from parameters that are
//! converted once; when the float total vanishes the exact rational rates are
//! consulted so that rounding can never masquerade as a frozen state.

mod kernel;
mod observables;
pub mod rng;
mod walk;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, SystemParams};

pub use kernel::{step, Step};
pub use observables::{observables, write_observables_csv, write_trajectory_csv, CloudObservables};
pub use walk::reflected_simple_walk;

use kernel::{Kernel, KernelStep};
use rng::replica_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Continuous-time elastic dynamics.
    Elastic,
    /// Continuous-time exclusion dynamics with the same intrinsic rates.
    Exclusion,
    /// Labelled particles with rank-indexed rates (equal masses only); the
    /// ordered projection follows the elastic law.
    Rank,
    /// Discrete-time jump chain of the elastic dynamics; the clock counts
    /// events.
    JumpChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Stop at this physical time.
    Time(f64),
    /// Stop after this many jumps.
    Events(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stride {
    /// Record after every k-th jump (and the final state).
    Events(u64),
    /// Record the state at clock times `Δt, 2Δt, ...`.
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Positions,
    Gaps,
    Spans,
    Com,
    CloudGaps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub initial: Configuration,
    /// Rank mode only: starting positions by label, in any order. Defaults to
    /// `initial`.
    pub labelled_initial: Option<Vec<i64>>,
    pub mode: Mode,
    pub horizon: Horizon,
    pub stride: Stride,
    pub seed: u64,
    /// Stream id under `seed`; see [`rng`].
    pub replica: u64,
    pub observables: Vec<Observable>,
}

impl SimConfig {
    pub fn new(params: SystemParams, initial: Configuration, mode: Mode, horizon: Horizon, seed: u64) -> Self {
        Self {
            params,
            initial,
            labelled_initial: None,
            mode,
            horizon,
            stride: Stride::Events(1),
            seed,
            replica: 0,
            observables: vec![Observable::Positions],
        }
    }

    pub fn with_stride(mut self, stride: Stride) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_replica(mut self, replica: u64) -> Self {
        self.replica = replica;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.initial.len() != self.params.n() {
            return bad(format!(
                "initial configuration has {} particles, parameters have {}",
                self.initial.len(),
                self.params.n()
            ));
        }
        match self.horizon {
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => return bad(format!("time horizon must be positive, got {t}")),
            Horizon::Events(0) => return bad("event horizon must be positive".into()),
            _ => {}
        }
        match self.stride {
            Stride::Time(dt) if !(dt.is_finite() && dt > 0.0) => return bad(format!("time stride must be positive, got {dt}")),
            Stride::Events(0) => return bad("event stride must be positive".into()),
            _ => {}
        }
        if self.mode == Mode::Rank && !self.params.has_equal_masses() {
            return Err(Error::UnsupportedMode(
                "rank-labelled construction requires equal masses".into(),
            ));
        }
        if let Some(y) = &self.labelled_initial {
            if self.mode != Mode::Rank {
                return bad("labelled initial positions are only used in rank mode".into());
            }
            if y.len() != self.params.n() {
                return bad("labelled initial positions have the wrong length".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    /// The total jump rate hit zero; the final configuration is absorbing.
    Frozen,
}

/// Output of one seeded run. Samples are stored column-wise; positions are a
/// flat row-major `samples × N` array.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    n: usize,
    events: Vec<u64>,
    clocks: Vec<f64>,
    positions: Vec<i64>,
    labelled: Vec<i64>,
    pub status: RunStatus,
    pub final_clock: f64,
    pub event_count: u64,
    pub seed: u64,
    pub replica: u64,
    pub mode: Mode,
}

impl RunRecord {
    fn new(n: usize, cfg: &SimConfig) -> Self {
        Self {
            n,
            events: Vec::new(),
            clocks: Vec::new(),
            positions: Vec::new(),
            labelled: Vec::new(),
            status: RunStatus::Completed,
            final_clock: 0.0,
            event_count: 0,
            seed: cfg.seed,
            replica: cfg.replica,
            mode: cfg.mode,
        }
    }

    fn push(&mut self, event: u64, clock: f64, x: &[i64], labelled: Option<&[i64]>) {
        self.events.push(event);
        self.clocks.push(clock);
        self.positions.extend_from_slice(x);
        if let Some(y) = labelled {
            self.labelled.extend_from_slice(y);
        }
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[u64] {
        &self.events
    }

    pub fn clocks(&self) -> &[f64] {
        &self.clocks
    }

    pub fn positions(&self, sample: usize) -> &[i64] {
        &self.positions[sample * self.n..(sample + 1) * self.n]
    }

    pub fn configuration(&self, sample: usize) -> Configuration {
        Configuration::from_sorted_unchecked(self.positions(sample).to_vec())
    }

    /// Labelled positions `Y` (rank mode only).
    pub fn labelled(&self, sample: usize) -> Option<&[i64]> {
        if self.labelled.is_empty() {
            None
        } else {
            Some(&self.labelled[sample * self.n..(sample + 1) * self.n])
        }
    }

    /// Time series of particle `label` (1-based).
    pub fn particle_series(&self, label: usize) -> Vec<i64> {
        (0..self.len()).map(|s| self.positions(s)[label - 1]).collect()
    }

    pub fn final_configuration(&self) -> Configuration {
        self.configuration(self.len() - 1)
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let mut kernel = Kernel::new(&cfg.params, cfg.mode);
    let mut rng = replica_rng(cfg.seed, cfg.replica);
    let n = cfg.params.n();
    let mut rec = RunRecord::new(n, cfg);

    let rank = cfg.mode == Mode::Rank;
    let mut labelled: Vec<i64> = match &cfg.labelled_initial {
        Some(y) => y.clone(),
        None => cfg.initial.positions().to_vec(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut x: Vec<i64> = if rank {
        kernel::rank_order(&labelled, &mut order);
        order.iter().map(|&l| labelled[l]).collect()
    } else {
        cfg.initial.positions().to_vec()
    };

    rec.push(0, 0.0, &x, rank.then_some(&labelled[..]));
    let mut clock = 0.0f64;
    let mut events = 0u64;
    let mut next_grid = match cfg.stride {
        Stride::Time(dt) => dt,
        Stride::Events(_) => f64::INFINITY,
    };

    loop {
        if let Horizon::Events(max) = cfg.horizon {
            if events >= max {
                break;
            }
        }
        let (label, step, holding) = match kernel.step(&cfg.params, &x, &mut rng)? {
            KernelStep::Frozen => {
                rec.status = RunStatus::Frozen;
                break;
            }
            KernelStep::Jump { index, step, holding } => (index, step, holding),
        };
        let next_clock = clock + holding;
        let stop_at = match cfg.horizon {
            Horizon::Time(t) if next_clock > t => Some(t),
            _ => None,
        };
        if let Stride::Time(dt) = cfg.stride {
            let limit = stop_at.unwrap_or(next_clock);
            while next_grid < limit || (stop_at.is_some() && next_grid <= limit) {
                rec.push(events, next_grid, &x, rank.then_some(&labelled[..]));
                next_grid += dt;
            }
        }
        if let Some(t) = stop_at {
            clock = t;
            break;
        }
        if rank {
            labelled[order[label]] += step;
            kernel::rank_order(&labelled, &mut order);
            for (k, &l) in order.iter().enumerate() {
                x[k] = labelled[l];
            }
        } else {
            x[label] += step;
        }
        clock = next_clock;
        events += 1;
        if let Stride::Events(k) = cfg.stride {
            if events.is_multiple_of(k) {
                rec.push(events, clock, &x, rank.then_some(&labelled[..]));
            }
        }
    }

    if matches!(cfg.stride, Stride::Events(_)) && rec.events.last() != Some(&events) {
        rec.push(events, clock, &x, rank.then_some(&labelled[..]));
    }
    rec.final_clock = clock;
    rec.event_count = events;
    Ok(rec)
}

/// Runs replicas `0..replicas` of `cfg` (overriding `cfg.replica`) in
/// parallel; the result is ordered by replica id.
pub fn simulate_replicas(cfg: &SimConfig, replicas: u64) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    (0..replicas)
        .into_par_iter()
        .map(|r| simulate(&cfg.clone().with_replica(r)))
        .collect()
}
