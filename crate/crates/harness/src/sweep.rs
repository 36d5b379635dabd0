//! Local decoherence sweeps over Fubini-Study random pure two-qubit states.

use nlact_core::channels::{local_decohere, DecoherenceKind};
use nlact_core::criteria::{classify, Classification};
use nlact_core::states::{random_pure_fs, RngSeed};
use rayon::prelude::*;

use crate::config::{with_threads, Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{Field, Report, Table};

/// `n` equally spaced points covering `[0, 1]`.
pub fn t_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "a t-grid needs at least two points");
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub state_index: u64,
    pub seed_used: RngSeed,
    /// Empty unless per-step recording was requested.
    pub per_step: Vec<(f64, Classification)>,
    /// Smallest and largest grid `t` flagged as a nonlocal resource.
    pub activation_interval: Option<(f64, f64)>,
    /// `(t_end - t_start) + dt`, counting closed grid cells.
    pub interval_width: Option<f64>,
    /// Flagged steps do not form one contiguous run.
    pub multi_interval: bool,
    /// Number of flagged steps times `dt`.
    pub active_measure: f64,
    pub active_steps: usize,
    pub violates_chsh_initially: bool,
    /// Largest grid `t` at which the state still violates CHSH.
    pub last_chsh_violation: Option<f64>,
}

impl ExperimentRecord {
    pub fn activated(&self) -> bool {
        self.activation_interval.is_some()
    }
}

/// Follows one pure state along the grid.
pub fn sweep_state(
    seed_used: RngSeed,
    state_index: u64,
    kind: DecoherenceKind,
    grid: &[f64],
    keep_steps: bool,
) -> Result<ExperimentRecord> {
    let psi = random_pure_fs(&[2, 2], seed_used)?;
    let dt = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let mut per_step = Vec::new();
    let (mut first, mut last, mut count) = (None, None, 0usize);
    let mut last_chsh = None;
    let mut initial = false;
    for (i, &t) in grid.iter().enumerate() {
        let c = classify(&local_decohere(&psi, kind, t)?)?;
        if i == 0 {
            initial = c.violates_chsh;
        }
        if c.violates_chsh {
            last_chsh = Some(t);
        }
        if c.nonlocal_resource {
            first.get_or_insert(i);
            last = Some(i);
            count += 1;
        }
        if keep_steps {
            per_step.push((t, c));
        }
    }
    let activation_interval = first.zip(last).map(|(a, b)| (grid[a], grid[b]));
    Ok(ExperimentRecord {
        state_index,
        seed_used,
        per_step,
        activation_interval,
        interval_width: activation_interval.map(|(a, b)| (b - a) + dt),
        multi_interval: first.zip(last).is_some_and(|(a, b)| b - a + 1 != count),
        active_measure: count as f64 * dt,
        active_steps: count,
        violates_chsh_initially: initial,
        last_chsh_violation: last_chsh,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSummary {
    pub channel: DecoherenceKind,
    pub n_states: u64,
    pub n_time_steps: usize,
    pub n_activated: u64,
    pub pct_nlr_states: f64,
    pub se_pct_nlr_states: f64,
    /// Mean and population std of the width over activated states.
    pub mean_interval_width: f64,
    pub std_interval_width: f64,
    /// Same with non-activated states contributing zero width.
    pub mean_width_all_states: f64,
    pub std_width_all_states: f64,
    pub mean_active_measure: f64,
    pub n_multi_interval: u64,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub summary: SweepSummary,
    pub records: Vec<ExperimentRecord>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn summarize_sweep(kind: DecoherenceKind, n_time_steps: usize, records: &[ExperimentRecord]) -> SweepSummary {
    let activated: Vec<f64> = records.iter().filter_map(|r| r.interval_width).collect();
    let all: Vec<f64> = records.iter().map(|r| r.interval_width.unwrap_or(0.0)).collect();
    let measures: Vec<f64> = records.iter().filter(|r| r.activated()).map(|r| r.active_measure).collect();
    let (frac, se) = crate::census::binomial(activated.len() as u64, records.len() as u64);
    let (mean_w, std_w) = mean_std(&activated);
    let (mean_all, std_all) = mean_std(&all);
    SweepSummary {
        channel: kind,
        n_states: records.len() as u64,
        n_time_steps,
        n_activated: activated.len() as u64,
        pct_nlr_states: 100.0 * frac,
        se_pct_nlr_states: 100.0 * se,
        mean_interval_width: mean_w,
        std_interval_width: std_w,
        mean_width_all_states: mean_all,
        std_width_all_states: std_all,
        mean_active_measure: mean_std(&measures).0,
        n_multi_interval: records.iter().filter(|r| r.multi_interval).count() as u64,
    }
}

pub fn run_decoherence_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.expect(Experiment::DecoherenceSweep)?;
    let grid = t_grid(cfg.n_time_steps);
    let records = with_threads(cfg.threads, || {
        (0..cfg.n_states as u64)
            .into_par_iter()
            .map(|i| sweep_state(RngSeed::new(cfg.seed, i), i, cfg.channel, &grid, cfg.record_steps))
            .collect::<Result<Vec<_>>>()
    })??;
    let out = SweepOutput {
        summary: summarize_sweep(cfg.channel, cfg.n_time_steps, &records),
        records,
    };
    if let Some(path) = &cfg.output_path {
        out.report().write(path, cfg.output_format)?;
    }
    Ok(out)
}

impl SweepOutput {
    pub fn report(&self) -> Report {
        let mut records = Table::new(vec![
            "state_index",
            "seed",
            "stream_index",
            "t_start",
            "t_end",
            "interval_width",
            "multi_interval",
            "active_steps",
            "active_measure",
            "violates_chsh_initially",
            "last_chsh_violation",
        ]);
        let mut steps = Table::new(vec![
            "state_index",
            "t",
            "m_value",
            "chsh_max",
            "hashing_margin",
            "violates_chsh",
            "hashing_distillable",
            "nonlocal_resource",
        ]);
        for r in &self.records {
            records.push(vec![
                Field::Int(r.state_index),
                Field::Int(r.seed_used.seed),
                Field::Int(r.seed_used.stream_index),
                Field::opt_float(r.activation_interval.map(|i| i.0)),
                Field::opt_float(r.activation_interval.map(|i| i.1)),
                Field::opt_float(r.interval_width),
                Field::Bool(r.multi_interval),
                Field::Int(r.active_steps as u64),
                Field::Float(r.active_measure),
                Field::Bool(r.violates_chsh_initially),
                Field::opt_float(r.last_chsh_violation),
            ]);
            for (t, c) in &r.per_step {
                steps.push(vec![
                    Field::Int(r.state_index),
                    Field::Float(*t),
                    Field::Float(c.m_value),
                    Field::Float(c.chsh_max),
                    Field::Float(c.hashing_margin()),
                    Field::Bool(c.violates_chsh),
                    Field::Bool(c.hashing_distillable),
                    Field::Bool(c.nonlocal_resource),
                ]);
            }
        }
        let s = &self.summary;
        Report {
            experiment: Experiment::DecoherenceSweep.name(),
            summary: vec![
                ("channel", Field::Text(s.channel.name().into())),
                ("n_states", Field::Int(s.n_states)),
                ("n_time_steps", Field::Int(s.n_time_steps as u64)),
                ("n_activated", Field::Int(s.n_activated)),
                ("pct_nlr_states", Field::Float(s.pct_nlr_states)),
                ("se_pct_nlr_states", Field::Float(s.se_pct_nlr_states)),
                ("mean_interval_width", Field::Float(s.mean_interval_width)),
                ("std_interval_width", Field::Float(s.std_interval_width)),
                ("mean_width_all_states", Field::Float(s.mean_width_all_states)),
                ("std_width_all_states", Field::Float(s.std_width_all_states)),
                ("mean_active_measure", Field::Float(s.mean_active_measure)),
                ("n_multi_interval", Field::Int(s.n_multi_interval)),
            ],
            records,
            extra: if steps.rows.is_empty() { vec![] } else { vec![("steps", steps)] },
        }
    }
}
