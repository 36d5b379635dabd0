//! Classification census of Hilbert-Schmidt random two-qubit states.

use nlact_core::criteria::{classify, Classification};
use nlact_core::states::{random_mixed_hs, RngSeed};
use rayon::prelude::*;

use crate::config::{with_threads, Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{Field, Report, Table};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CensusRecord {
    pub state_index: u64,
    pub seed_used: RngSeed,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CensusSummary {
    pub n_states: u64,
    pub n_no_chsh_violation: u64,
    pub n_distillable: u64,
    pub n_nlr: u64,
    pub frac_no_chsh_violation: f64,
    pub se_no_chsh_violation: f64,
    pub frac_nlr_of_all: f64,
    pub se_nlr_of_all: f64,
    pub frac_nlr_of_nonviolating: f64,
    pub se_nlr_of_nonviolating: f64,
}

#[derive(Clone, Debug)]
pub struct CensusOutput {
    pub summary: CensusSummary,
    pub records: Vec<CensusRecord>,
}

/// Binomial fraction and its standard error; `(NaN, NaN)` for an empty population.
pub fn binomial(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let f = hits as f64 / n as f64;
    (f, (f * (1.0 - f) / n as f64).sqrt())
}

pub fn census_record(seed: u64, state_index: u64) -> Result<CensusRecord> {
    let seed_used = RngSeed::new(seed, state_index);
    let rho = random_mixed_hs(&[2, 2], seed_used)?;
    Ok(CensusRecord {
        state_index,
        seed_used,
        classification: classify(&rho)?,
    })
}

pub fn summarize_census(records: &[CensusRecord]) -> CensusSummary {
    let n = records.len() as u64;
    let count = |f: fn(&Classification) -> bool| records.iter().filter(|r| f(&r.classification)).count() as u64;
    let n_no = count(|c| !c.violates_chsh);
    let n_nlr = count(|c| c.nonlocal_resource);
    let (frac_no, se_no) = binomial(n_no, n);
    let (frac_all, se_all) = binomial(n_nlr, n);
    let (frac_nv, se_nv) = binomial(n_nlr, n_no);
    CensusSummary {
        n_states: n,
        n_no_chsh_violation: n_no,
        n_distillable: count(|c| c.hashing_distillable),
        n_nlr,
        frac_no_chsh_violation: frac_no,
        se_no_chsh_violation: se_no,
        frac_nlr_of_all: frac_all,
        se_nlr_of_all: se_all,
        frac_nlr_of_nonviolating: frac_nv,
        se_nlr_of_nonviolating: se_nv,
    }
}

pub fn run_census(cfg: &ExperimentConfig) -> Result<CensusOutput> {
    cfg.expect(Experiment::Census)?;
    let records = with_threads(cfg.threads, || {
        (0..cfg.n_states as u64)
            .into_par_iter()
            .map(|i| census_record(cfg.seed, i))
            .collect::<Result<Vec<_>>>()
    })??;
    let out = CensusOutput {
        summary: summarize_census(&records),
        records,
    };
    if let Some(path) = &cfg.output_path {
        out.report().write(path, cfg.output_format)?;
    }
    Ok(out)
}

impl CensusOutput {
    pub fn report(&self) -> Report {
        let mut records = Table::new(vec![
            "state_index",
            "seed",
            "stream_index",
            "m_value",
            "chsh_max",
            "s_a",
            "s_b",
            "s_ab",
            "hashing_margin",
            "violates_chsh",
            "hashing_distillable",
            "nonlocal_resource",
        ]);
        for r in &self.records {
            let c = &r.classification;
            records.push(vec![
                Field::Int(r.state_index),
                Field::Int(r.seed_used.seed),
                Field::Int(r.seed_used.stream_index),
                Field::Float(c.m_value),
                Field::Float(c.chsh_max),
                Field::Float(c.s_a),
                Field::Float(c.s_b),
                Field::Float(c.s_ab),
                Field::Float(c.hashing_margin()),
                Field::Bool(c.violates_chsh),
                Field::Bool(c.hashing_distillable),
                Field::Bool(c.nonlocal_resource),
            ]);
        }
        let s = &self.summary;
        Report {
            experiment: Experiment::Census.name(),
            summary: vec![
                ("n_states", Field::Int(s.n_states)),
                ("n_no_chsh_violation", Field::Int(s.n_no_chsh_violation)),
                ("n_distillable", Field::Int(s.n_distillable)),
                ("n_nlr", Field::Int(s.n_nlr)),
                ("frac_no_chsh_violation", Field::Float(s.frac_no_chsh_violation)),
                ("se_no_chsh_violation", Field::Float(s.se_no_chsh_violation)),
                ("frac_nlr_of_all", Field::Float(s.frac_nlr_of_all)),
                ("se_nlr_of_all", Field::Float(s.se_nlr_of_all)),
                ("frac_nlr_of_nonviolating", Field::Float(s.frac_nlr_of_nonviolating)),
                ("se_nlr_of_nonviolating", Field::Float(s.se_nlr_of_nonviolating)),
            ],
            records,
            extra: vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Experiment::Census);
        c.n_states = n;
        c
    }

    #[test]
    fn single_state_is_deterministic() {
        let a = run_census(&cfg(1)).unwrap();
        let b = run_census(&cfg(1)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records[0].seed_used, RngSeed::new(1, 0));
    }

    #[test]
    fn bookkeeping_identity() {
        let out = run_census(&cfg(3000)).unwrap();
        let s = out.summary;
        assert!((s.frac_nlr_of_nonviolating * s.frac_no_chsh_violation - s.frac_nlr_of_all).abs() < 1e-12);
        assert!(out.records.iter().all(|r| r.classification.is_consistent()));
        assert!(s.n_nlr <= s.n_distillable && s.n_nlr <= s.n_no_chsh_violation);
    }

    #[test]
    fn independent_of_thread_count() {
        let mut one = cfg(200);
        one.threads = Some(1);
        let mut three = cfg(200);
        three.threads = Some(3);
        assert_eq!(run_census(&one).unwrap().records, run_census(&three).unwrap().records);
    }

    #[test]
    fn wrong_experiment_is_rejected() {
        let c = ExperimentConfig::new(Experiment::IsoCurve);
        assert!(run_census(&c).is_err());
    }
}
