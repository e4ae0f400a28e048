use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use elastic_core::analysis::{
    empirical_stationary, fit_speed, pool, span_tail, write_histogram_csv, GapHistogram,
    PooledEstimate, SpeedEstimate,
};
use elastic_core::engine::{
    observables, simulate as run_simulation, simulate_replicas, write_observables_csv, write_trajectory_csv, Horizon, Mode, RunRecord,
    RunStatus, SimConfig, Stride,
};
use elastic_core::majorant::{decompose, random_environment_cloud_count, CloudDecomposition, DecompositionReport};
use elastic_core::model::{potential_path, Configuration, Interaction, PotentialPath, SystemParams};
use elastic_core::stationary::{cycle_products, n2_stationary, reversibility_scan, CycleReport, ScanOutcome, TimeScale, ZeroModifiedGeometric};
use elastic_core::rational;
use serde::Serialize;

use crate::config::{ExperimentConfig, SimBlock};
use crate::{CliError, Common};

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, name: &str) -> Result<(), CliError> {
    let text = to_json(value);
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn create(path: PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))
}

fn require_seed(c: &Common) -> Result<u64, CliError> {
    c.seed
        .ok_or_else(|| CliError::config("this command samples randomness and needs --seed"))
}

fn require_out(c: &Common) -> Result<&Path, CliError> {
    c.out.as_deref().ok_or_else(|| CliError::config("this command writes files and needs --out <dir>"))
}

/// Simulation settings from the `sim` block with flag overrides; `None` when no horizon is set.
fn sim_settings(cfg: &ExperimentConfig, c: &Common) -> Result<Option<(SimConfig, u64)>, CliError> {
    let block = cfg.sim.clone().unwrap_or_default();
    let horizon = match (c.events, c.time) {
        (Some(e), _) => Horizon::Events(e),
        (None, Some(t)) => Horizon::Time(t),
        (None, None) => match (block.events, block.time) {
            (Some(_), Some(_)) => return Err(CliError::config("sim block sets both \"events\" and \"time\"")),
            (Some(e), None) => Horizon::Events(e),
            (None, Some(t)) => Horizon::Time(t),
            (None, None) => return Ok(None),
        },
    };
    let seed = require_seed(c)?;
    let params = cfg.params()?.clone();
    let stride = stride(&block, c)?;
    let initial = match &block.initial {
        Some(x) => Configuration::new(x.clone()).map_err(|e| CliError::config(format!("sim.initial: {e}")))?,
        None => Configuration::stacked(params.n(), 0),
    };
    let mode = c.mode.map(Mode::from).unwrap_or(block.mode);
    let mut sim = SimConfig::new(params, initial, mode, horizon, seed).with_stride(stride);
    sim.labelled_initial = block.labelled_initial.clone();
    sim.observables = block.observables.clone();
    sim.validate()?;
    let replicas = c.replicas.or(block.replicas).unwrap_or(1);
    if replicas == 0 {
        return Err(CliError::config("replicas must be at least 1"));
    }
    Ok(Some((sim, replicas)))
}

fn stride(block: &SimBlock, c: &Common) -> Result<Stride, CliError> {
    Ok(match (c.stride, c.stride_time) {
        (Some(k), _) => Stride::Events(k),
        (None, Some(dt)) => Stride::Time(dt),
        (None, None) => match (block.stride_events, block.stride_time) {
            (Some(_), Some(_)) => return Err(CliError::config("sim block sets both stride_events and stride_time")),
            (Some(k), None) => Stride::Events(k),
            (None, Some(dt)) => Stride::Time(dt),
            (None, None) => Stride::Events(1),
        },
    })
}

fn require_sim(cfg: &ExperimentConfig, c: &Common) -> Result<(SimConfig, u64), CliError> {
    sim_settings(cfg, c)?.ok_or_else(|| CliError::config("no horizon: set sim.events or sim.time, or pass --events/--time"))
}

pub fn analyze(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let report = decompose(cfg.params()?).report();
    emit(&report, c.out.as_deref(), "analyze.json")
}

#[derive(Serialize)]
struct RunSummary {
    status: RunStatus,
    mode: Mode,
    seed: u64,
    replica: u64,
    event_count: u64,
    final_clock: f64,
    samples: usize,
    final_positions: Vec<i64>,
    decomposition: DecompositionReport,
    /// Per particle; null when the run has too few samples for a fit.
    speeds: Vec<Option<SpeedEstimate>>,
}

fn summarize(record: &RunRecord, d: &CloudDecomposition) -> RunSummary {
    RunSummary {
        status: record.status,
        mode: record.mode,
        seed: record.seed,
        replica: record.replica,
        event_count: record.event_count,
        final_clock: record.final_clock,
        samples: record.len(),
        final_positions: record.final_configuration().positions().to_vec(),
        decomposition: d.report(),
        speeds: (1..=record.n()).map(|l| fit_speed(record, l).ok()).collect(),
    }
}

fn write_run(dir: &Path, record: &RunRecord, sim: &SimConfig, d: &CloudDecomposition) -> Result<RunSummary, CliError> {
    fs::create_dir_all(dir)?;
    let mut w = create(dir.join("trajectory.csv"))?;
    write_trajectory_csv(record, &mut w)?;
    w.flush()?;
    let obs = observables(record, &sim.params, d)?;
    let mut w = create(dir.join("observables.csv"))?;
    write_observables_csv(record, &obs, &sim.observables, &mut w)?;
    w.flush()?;
    let summary = summarize(record, d);
    fs::write(dir.join("summary.json"), to_json(&summary))?;
    Ok(summary)
}

#[derive(Serialize)]
struct ParticleAggregate {
    label: usize,
    #[serde(with = "rational::single")]
    predicted_speed: elastic_core::Rational,
    pooled: Option<PooledEstimate>,
}

#[derive(Serialize)]
struct Aggregate {
    replicas: u64,
    seed: u64,
    frozen_replicas: usize,
    particles: Vec<ParticleAggregate>,
}

pub fn simulate(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let (sim, replicas) = require_sim(&cfg, c)?;
    let out = require_out(c)?;
    let d = decompose(&sim.params);
    if replicas == 1 {
        let record = run_simulation(&sim)?;
        let summary = write_run(out, &record, &sim, &d)?;
        print!("{}", to_json(&summary));
        return Ok(());
    }
    let records = simulate_replicas(&sim, replicas)?;
    let mut summaries = Vec::with_capacity(records.len());
    for r in &records {
        summaries.push(write_run(&out.join(format!("replica_{:03}", r.replica)), r, &sim, &d)?);
    }
    let particles = (1..=sim.params.n())
        .map(|label| {
            let est: Vec<SpeedEstimate> = summaries.iter().filter_map(|s| s.speeds[label - 1]).collect();
            ParticleAggregate {
                label,
                predicted_speed: d.particle_speed(label).expect("label in range").clone(),
                pooled: pool(&est).ok(),
            }
        })
        .collect();
    let aggregate = Aggregate {
        replicas,
        seed: sim.seed,
        frozen_replicas: records.iter().filter(|r| r.status == RunStatus::Frozen).count(),
        particles,
    };
    fs::write(out.join("aggregate.json"), to_json(&aggregate))?;
    print!("{}", to_json(&aggregate));
    Ok(())
}

#[derive(Serialize)]
struct EmpiricalComparison {
    event_count: u64,
    final_clock: f64,
    tv_distance: f64,
    histogram: GapHistogram,
}

#[derive(Serialize)]
struct StationaryReport {
    law: ZeroModifiedGeometric,
    empirical: Option<EmpiricalComparison>,
}

pub fn stationary(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let block = cfg.stationary.clone().unwrap_or_default();
    let law = n2_stationary(cfg.params()?)?;
    let empirical = match sim_settings(&cfg, c)? {
        None => None,
        Some((sim, _)) => {
            let record = run_simulation(&sim)?;
            let histogram = empirical_stationary(&record, block.weighting)?;
            Some(EmpiricalComparison {
                event_count: record.event_count,
                final_clock: record.final_clock,
                tv_distance: histogram.tv_distance(&law.truncated_support(block.cutoff)),
                histogram,
            })
        }
    };
    if let (Some(dir), Some(e)) = (c.out.as_deref(), &empirical) {
        fs::create_dir_all(dir)?;
        let mut w = create(dir.join("histogram.csv"))?;
        write_histogram_csv(&e.histogram, &mut w)?;
        w.flush()?;
    }
    emit(&StationaryReport { law, empirical }, c.out.as_deref(), "stationary.json")
}

#[derive(Serialize)]
struct ReversibilityReport {
    interaction: Interaction,
    time: TimeScale,
    cycle: Option<CycleReport>,
    scan: ScanOutcome,
}

pub fn reversibility(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let params: &SystemParams = cfg.params()?;
    let block = cfg.reversibility.clone().unwrap_or_default();
    let (interaction, time) = match c.mode {
        None => (block.interaction, block.time),
        Some(m) => match Mode::from(m) {
            Mode::Elastic => (Interaction::Elastic, TimeScale::Continuous),
            Mode::Exclusion => (Interaction::Exclusion, TimeScale::Continuous),
            Mode::JumpChain => (Interaction::Elastic, TimeScale::JumpChain),
            Mode::Rank => return Err(CliError::config("reversibility is defined on the gap chain; rank mode does not apply")),
        },
    };
    let cycle = match &block.cycle {
        Some(states) => Some(cycle_products(params, states, interaction, time)?),
        None => None,
    };
    let scan = reversibility_scan(params, interaction, time, block.truncation, block.max_cycle_length)?;
    emit(
        &ReversibilityReport {
            interaction,
            time,
            cycle,
            scan,
        },
        c.out.as_deref(),
        "reversibility.json",
    )
}

pub fn random_env(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let block = cfg
        .random_env
        .clone()
        .ok_or_else(|| CliError::config("config has no \"random_env\" block"))?;
    let seed = require_seed(c)?;
    let replicas = c.replicas.unwrap_or(block.replicas);
    let summary = random_environment_cloud_count(block.n, &block.law, replicas, seed)?;
    emit(&summary, c.out.as_deref(), "random_env.json")
}

#[derive(Serialize)]
struct MajorantData {
    #[serde(flatten)]
    path: PotentialPath,
    #[serde(flatten)]
    report: DecompositionReport,
}

pub fn plot_data(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&c.config)?;
    let params = cfg.params()?;
    let out = require_out(c)?;
    fs::create_dir_all(out)?;
    let d = decompose(params);
    let majorant = MajorantData {
        path: potential_path(params),
        report: d.report(),
    };
    fs::write(out.join("majorant.json"), to_json(&majorant))?;
    let mut written = vec!["majorant.json"];
    if let Some((sim, _)) = sim_settings(&cfg, c)? {
        let record = run_simulation(&sim)?;
        write_run(out, &record, &sim, &d)?;
        write_span_tails(&out.join("span_tail.csv"), &record, &d)?;
        write_occupation(&out.join("occupation.csv"), &record, &d, &sim.params)?;
        written.extend(["trajectory.csv", "observables.csv", "summary.json", "span_tail.csv", "occupation.csv"]);
    }
    println!("{}", serde_json::json!({ "out": out, "files": written }));
    Ok(())
}

/// `s,cloud_1,...` with the empirical tail of each cloud's span over the second half.
fn write_span_tails(path: &Path, record: &RunRecord, d: &CloudDecomposition) -> Result<(), CliError> {
    let tails = d
        .clouds
        .iter()
        .map(|c| span_tail(record, *c))
        .collect::<Result<Vec<_>, _>>()?;
    let max = tails.iter().map(|t| t.tail.len()).max().unwrap_or(0);
    let mut w = create(path.to_path_buf())?;
    let header: Vec<String> = (1..=tails.len()).map(|j| format!("cloud_{j}")).collect();
    writeln!(w, "s,{}", header.join(","))?;
    for s in 0..=max {
        let row: Vec<String> = tails.iter().map(|t| t.at(s).to_string()).collect();
        writeln!(w, "{s},{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `x,L_1,...` with the occupation count of `[0, x]` by each cloud gap over the whole run.
fn write_occupation(path: &Path, record: &RunRecord, d: &CloudDecomposition, params: &SystemParams) -> Result<(), CliError> {
    let obs = observables(record, params, d)?;
    let max = obs.cloud_gaps.iter().flatten().copied().max().unwrap_or(0) as usize;
    let cumulative: Vec<Vec<usize>> = obs
        .cloud_gaps
        .iter()
        .map(|g| {
            let mut counts = vec![0usize; max + 1];
            for &v in g {
                counts[v as usize] += 1;
            }
            counts
                .iter()
                .scan(0, |acc, c| {
                    *acc += c;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut w = create(path.to_path_buf())?;
    let header: Vec<String> = (1..=cumulative.len()).map(|j| format!("L_{j}")).collect();
    writeln!(w, "x,{}", header.join(","))?;
    for x in 0..=max {
        let row: Vec<String> = cumulative.iter().map(|c| c[x].to_string()).collect();
        writeln!(w, "{x},{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}
