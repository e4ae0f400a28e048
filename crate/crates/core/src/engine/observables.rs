//! Per-sample cloud observables and CSV export.

use std::io::{self, Write};

use super::{Observable, RunRecord};
use crate::error::{invalid, Result};
use crate::majorant::CloudDecomposition;
use crate::model::{Club, SystemParams};
use crate::rational;

/// Series derived from a run and a cloud decomposition, one entry per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudObservables {
    /// `Δ_{c_j}` for each cloud `j`.
    pub spans: Vec<Vec<i64>>,
    /// `L_j`, distance from the top of cloud `j` to the bottom of cloud `j+1`.
    pub cloud_gaps: Vec<Vec<i64>>,
    /// `L`, distance between the extreme clouds; empty for a single cloud.
    pub extreme_gap: Vec<i64>,
    /// Global centre of mass `G`.
    pub com: Vec<f64>,
    /// `Γ = G_ν - G_1`; empty for a single cloud.
    pub gamma: Vec<f64>,
    /// `Γ_j = G_{j+1} - G_j`.
    pub gamma_j: Vec<Vec<f64>>,
}

fn club_com(masses: &[f64], x: &[i64], club: Club) -> f64 {
    let (mut w, mut m) = (0.0, 0.0);
    for i in club.first - 1..club.last {
        w += masses[i] * x[i] as f64;
        m += masses[i];
    }
    w / m
}

pub fn observables(
    record: &RunRecord,
    params: &SystemParams,
    decomposition: &CloudDecomposition,
) -> Result<CloudObservables> {
    let n = params.n();
    if record.n() != n || decomposition.boundary.last() != Some(&n) {
        return Err(invalid("record, parameters and decomposition disagree on N"));
    }
    let masses: Vec<f64> = params.masses().iter().map(rational::to_f64).collect();
    let clouds = &decomposition.clouds;
    let nu = clouds.len();
    let len = record.len();
    let mut out = CloudObservables {
        spans: vec![Vec::with_capacity(len); nu],
        cloud_gaps: vec![Vec::with_capacity(len); nu - 1],
        extreme_gap: Vec::new(),
        com: Vec::with_capacity(len),
        gamma: Vec::new(),
        gamma_j: vec![Vec::with_capacity(len); nu - 1],
    };
    let whole = Club { first: 1, last: n };
    let mut cloud_coms = vec![0.0; nu];
    for s in 0..len {
        let x = record.positions(s);
        for (j, c) in clouds.iter().enumerate() {
            out.spans[j].push(x[c.last - 1] - x[c.first - 1]);
            cloud_coms[j] = club_com(&masses, x, *c);
        }
        for j in 0..nu - 1 {
            out.cloud_gaps[j].push(x[clouds[j + 1].first - 1] - x[clouds[j].last - 1]);
            out.gamma_j[j].push(cloud_coms[j + 1] - cloud_coms[j]);
        }
        out.com.push(club_com(&masses, x, whole));
        if nu >= 2 {
            out.extreme_gap.push(x[clouds[nu - 1].first - 1] - x[clouds[0].last - 1]);
            out.gamma.push(cloud_coms[nu - 1] - cloud_coms[0]);
        }
    }
    Ok(out)
}

/// `event,clock,x_1,...,x_N`
pub fn write_trajectory_csv<W: Write>(record: &RunRecord, mut w: W) -> io::Result<()> {
    write!(w, "event,clock")?;
    for i in 1..=record.n() {
        write!(w, ",x_{i}")?;
    }
    writeln!(w)?;
    for s in 0..record.len() {
        write!(w, "{},{}", record.events()[s], record.clocks()[s])?;
        for x in record.positions(s) {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

enum Column<'a> {
    Int(&'a [i64]),
    Float(&'a [f64]),
    Gap(usize),
    Position(usize),
}

/// `event,clock,<name>...` with the columns for each selected observable, in
/// the order given.
pub fn write_observables_csv<W: Write>(
    record: &RunRecord,
    obs: &CloudObservables,
    selection: &[Observable],
    mut w: W,
) -> io::Result<()> {
    let mut cols: Vec<(String, Column)> = Vec::new();
    for o in selection {
        match o {
            Observable::Positions => {
                cols.extend((1..=record.n()).map(|i| (format!("x_{i}"), Column::Position(i - 1))));
            }
            Observable::Gaps => {
                cols.extend((1..record.n()).map(|i| (format!("eta_{i}"), Column::Gap(i - 1))));
            }
            Observable::Spans => {
                cols.extend(obs.spans.iter().enumerate().map(|(j, s)| (format!("span_{}", j + 1), Column::Int(s))));
            }
            Observable::Com => {
                cols.push(("G".into(), Column::Float(&obs.com)));
                if !obs.gamma.is_empty() {
                    cols.push(("Gamma".into(), Column::Float(&obs.gamma)));
                }
                cols.extend(obs.gamma_j.iter().enumerate().map(|(j, s)| (format!("Gamma_{}", j + 1), Column::Float(s))));
            }
            Observable::CloudGaps => {
                cols.extend(obs.cloud_gaps.iter().enumerate().map(|(j, s)| (format!("L_{}", j + 1), Column::Int(s))));
                if !obs.extreme_gap.is_empty() {
                    cols.push(("L".into(), Column::Int(&obs.extreme_gap)));
                }
            }
        }
    }
    write!(w, "event,clock")?;
    for (name, _) in &cols {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for s in 0..record.len() {
        write!(w, "{},{}", record.events()[s], record.clocks()[s])?;
        let x = record.positions(s);
        for (_, c) in &cols {
            match c {
                Column::Int(v) => write!(w, ",{}", v[s])?,
                Column::Float(v) => write!(w, ",{}", v[s])?,
                Column::Gap(i) => write!(w, ",{}", x[i + 1] - x[*i])?,
                Column::Position(i) => write!(w, ",{}", x[*i])?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
