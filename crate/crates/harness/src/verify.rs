//! Structural checks of the activation protocols, reported as residuals.

use nlact_core::criteria::horodecki_m;
use nlact_core::protocols::{
    bell_state, build_symmetric_extension, chsh_from_tables, double_teleport, erased_outcome_tree, erased_protocol,
    four_term_mixture, spin_measurement, teleport_distribution, teleport_network, BellIndex, Correction,
    TeleportDistribution, ALICE, CHARLIE,
};
use nlact_core::qcore::{fidelity_pure, partial_trace, ComplexMatrix};
use nlact_core::states::{erased, max_entangled, random_pure_fs, RngSeed};
use nlact_core::PureState;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{Field, Report, Table};

pub const STRUCTURAL_TOL: f64 = 1e-10;
pub const CHSH_TOL: f64 = 1e-9;
pub const EXTENSION_TOL: f64 = 1e-12;
pub const DEFAULT_ERASED_K: [f64; 4] = [1.0, 2.0, 5.0, 10.0];
/// Random `(Φ, p)` pairs per dimension.
pub const RANDOM_CASES: u64 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub experiment: Experiment,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn report(&self) -> Report {
        let mut records = Table::new(vec!["check", "residual", "tolerance", "passed"]);
        for c in &self.checks {
            records.push(vec![
                Field::Text(c.name.clone()),
                Field::Float(c.residual),
                Field::Float(c.tolerance),
                Field::Bool(c.passed),
            ]);
        }
        Report {
            experiment: self.experiment.name(),
            summary: vec![
                ("n_checks", Field::Int(self.checks.len() as u64)),
                ("n_failed", Field::Int(self.failures().count() as u64)),
                ("all_passed", Field::Bool(self.all_passed())),
            ],
            records,
            extra: vec![],
        }
    }
}

const PSI: (BellIndex, BellIndex) = (BellIndex::PSI_PLUS, BellIndex::PSI_PLUS);

/// Stratified weights in `(0, 1)`.
fn weight(i: u64) -> f64 {
    (i as f64 + 0.5) / RANDOM_CASES as f64
}

fn four_term_residual(phi: &PureState, p: f64, outcome: (BellIndex, BellIndex), correction: Correction) -> Result<f64> {
    let d = phi.dims()[0];
    let out = double_teleport(phi, p, d, outcome, correction)?;
    let want = four_term_mixture(phi, p)?;
    Ok(out.conditional_state.map_or(f64::INFINITY, |s| s.max_abs_diff(&want)))
}

fn teleport_checks(cfg: &ExperimentConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    for d in [2usize, 3] {
        let mut worst = 0.0f64;
        let mut corrected = 0.0f64;
        for i in 0..RANDOM_CASES {
            let phi = random_pure_fs(&[d, d], RngSeed::new(cfg.seed, i))?;
            worst = worst.max(four_term_residual(&phi, weight(i), PSI, Correction::PostSelect)?);
            let a = (i as usize) % d;
            let outcome = (BellIndex::new(a, (a + 1) % d), BellIndex::new((a + 1) % d, a));
            corrected = corrected.max(four_term_residual(&phi, weight(i), outcome, Correction::Apply)?);
        }
        checks.push(CheckResult::new(format!("four_term_identity_d{d}"), worst, STRUCTURAL_TOL));
        checks.push(CheckResult::new(format!("corrected_outcome_d{d}"), corrected, STRUCTURAL_TOL));
    }

    let phi = random_pure_fs(&[2, 2], RngSeed::new(cfg.seed, RANDOM_CASES))?;
    let p = 0.7;
    let mut acc = ComplexMatrix::zeros(4, 4);
    let mut total = 0.0;
    for o1 in BellIndex::all(2) {
        for o2 in BellIndex::all(2) {
            let out = double_teleport(&phi, p, 2, (o1, o2), Correction::PostSelect)?;
            total += out.success_probability;
            if let Some(s) = out.conditional_state {
                acc = &acc + &s.matrix().scale_real(out.success_probability);
            }
        }
    }
    let marginal = partial_trace(&teleport_network(&phi, p)?, &[ALICE, CHARLIE])?;
    checks.push(CheckResult::new("outcome_probabilities_sum", (total - 1.0).abs(), STRUCTURAL_TOL));
    checks.push(CheckResult::new(
        "outcome_average_marginal",
        acc.max_abs_diff(marginal.matrix()),
        STRUCTURAL_TOL,
    ));

    let d = cfg.d.unwrap_or(2);
    let p = cfg.p.unwrap_or(1.0);
    let phi = random_pure_fs(&[d, d], RngSeed::new(cfg.seed, RANDOM_CASES + 1))?;
    if p == 1.0 {
        let out = double_teleport(&phi, p, d, PSI, Correction::PostSelect)?;
        let fid = out.conditional_state.map_or(0.0, |s| fidelity_pure(&s, &phi).unwrap_or(0.0));
        checks.push(CheckResult::new(format!("teleport_fidelity_d{d}_p1"), (1.0 - fid).abs(), STRUCTURAL_TOL));
    } else {
        let r = four_term_residual(&phi, p, PSI, Correction::PostSelect)?;
        checks.push(CheckResult::new(format!("four_term_identity_d{d}_p{p}"), r, STRUCTURAL_TOL));
    }

    let bell = max_entangled(2)?;
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let p = i as f64 / 20.0;
        let out = double_teleport(&bell, p, 2, PSI, Correction::PostSelect)?;
        let m = out.conditional_state.map_or(Ok(0.0), |s| horodecki_m(&s))?;
        worst = worst.max((2.0 * m.max(0.0).sqrt() - 2.0 * 2f64.sqrt() * p * p).abs());
    }
    checks.push(CheckResult::new("activated_chsh_quadratic", worst, CHSH_TOL));
    Ok(())
}

fn distribution_checks(cfg: &ExperimentConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
    let b = [[h, 0.0, h], [-h, 0.0, h]];
    let mut residual = 0.0f64;
    let mut linearity = 0.0f64;
    for i in 0..5 {
        let phi = random_pure_fs(&[2, 2], RngSeed::new(cfg.seed, 100 + i))?;
        let p = weight(4 * i);
        let mut dists = Vec::with_capacity(4);
        for (x, z) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            dists.push(teleport_distribution(&phi, p, 2, &spin_measurement(a[x]), &spin_measurement(b[z]))?);
        }
        residual = dists.iter().fold(residual, |r, t| r.max(t.residual));
        let chsh = |f: fn(&TeleportDistribution) -> &Vec<Vec<f64>>| {
            chsh_from_tables([f(&dists[0]), f(&dists[1]), f(&dists[2]), f(&dists[3])])
        };
        let split = p * p * chsh(|t| &t.p_phi) + (1.0 - p * p) * chsh(|t| &t.p_loc);
        linearity = linearity.max((chsh(|t| &t.joint) - split).abs());
    }
    checks.push(CheckResult::new("distribution_decomposition", residual, STRUCTURAL_TOL));
    checks.push(CheckResult::new("distribution_chsh_linearity", linearity, CHSH_TOL));
    Ok(())
}

fn erased_checks(cfg: &ExperimentConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let ks: Vec<f64> = cfg.k.map_or_else(|| DEFAULT_ERASED_K.to_vec(), |k| vec![k]);
    for k in ks {
        let mut prob = 0.0f64;
        let mut fid = 0.0f64;
        let mut chsh = 0.0f64;
        for i in 0..4 {
            let idx = BellIndex::from_qubit_index(i)?;
            let out = erased_protocol(k, idx)?;
            prob = prob
                .max((out.stage_probabilities[0] - 1.0 / (k * k)).abs())
                .max((out.stage_probabilities[1] - 0.25).abs());
            match out.conditional_state {
                Some(s) => {
                    fid = fid.max((1.0 - fidelity_pure(&s, &bell_state(2, idx)?)?).abs());
                    chsh = chsh.max((2.0 * horodecki_m(&s)?.max(0.0).sqrt() - 2.0 * 2f64.sqrt()).abs());
                }
                None => {
                    fid = f64::INFINITY;
                    chsh = f64::INFINITY;
                }
            }
        }
        let tree: f64 = erased_outcome_tree(k)?.iter().map(|o| o.success_probability).sum();
        checks.push(CheckResult::new(format!("erased_probabilities_k{k}"), prob, 1e-12));
        checks.push(CheckResult::new(format!("erased_bell_fidelity_k{k}"), fid, STRUCTURAL_TOL));
        checks.push(CheckResult::new(format!("erased_chsh_k{k}"), chsh, CHSH_TOL));
        checks.push(CheckResult::new(format!("erased_outcome_tree_k{k}"), (tree - 1.0).abs(), STRUCTURAL_TOL));
    }
    Ok(())
}

/// Largest entry deviation of each `(A, B_i)` marginal from `erased(k)`.
pub fn extension_residuals(k: usize) -> Result<Vec<f64>> {
    let ext = build_symmetric_extension(k)?;
    let want = erased(k as f64)?;
    (1..=k)
        .map(|i| Ok(partial_trace(&ext, &[0, i])?.max_abs_diff(&want)))
        .collect()
}

fn extension_checks(ks: &[usize], checks: &mut Vec<CheckResult>) -> Result<()> {
    for &k in ks {
        for (i, r) in extension_residuals(k)?.into_iter().enumerate() {
            checks.push(CheckResult::new(format!("extension_marginal_k{k}_b{}", i + 1), r, EXTENSION_TOL));
        }
    }
    Ok(())
}

fn extension_ks(cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    match cfg.k {
        None => Ok(vec![2, 3, 4]),
        Some(k) if k.fract() == 0.0 => Ok(vec![k as usize]),
        Some(k) => Err(crate::error::HarnessError::Config(format!(
            "extension needs an integer k, got {k}"
        ))),
    }
}

/// Every protocol-level check. Failing residuals are reported, not raised.
pub fn run_protocol_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.expect(Experiment::ProtocolVerify)?;
    let mut checks = Vec::new();
    teleport_checks(cfg, &mut checks)?;
    distribution_checks(cfg, &mut checks)?;
    erased_checks(cfg, &mut checks)?;
    let ks = match cfg.k {
        Some(k) if k.fract() == 0.0 && (2.0..=4.0).contains(&k) => vec![k as usize],
        _ => vec![2, 3, 4],
    };
    extension_checks(&ks, &mut checks)?;
    let report = VerifyReport {
        experiment: Experiment::ProtocolVerify,
        checks,
    };
    if let Some(path) = &cfg.output_path {
        report.report().write(path, cfg.output_format)?;
    }
    Ok(report)
}

/// Marginal identity of the symmetric extension for `cfg.k` (default 2, 3, 4).
pub fn run_extension_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.expect(Experiment::ExtensionVerify)?;
    let mut checks = Vec::new();
    extension_checks(&extension_ks(cfg)?, &mut checks)?;
    let report = VerifyReport {
        experiment: Experiment::ExtensionVerify,
        checks,
    };
    if let Some(path) = &cfg.output_path {
        report.report().write(path, cfg.output_format)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_verify_passes() {
        let report = run_protocol_verify(&ExperimentConfig::new(Experiment::ProtocolVerify)).unwrap();
        let failed: Vec<_> = report.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(report.checks.iter().any(|c| c.name == "teleport_fidelity_d2_p1"));
    }

    #[test]
    fn extension_single_k() {
        let mut cfg = ExperimentConfig::new(Experiment::ExtensionVerify);
        cfg.k = Some(3.0);
        let report = run_extension_verify(&cfg).unwrap();
        assert_eq!(report.checks.len(), 3);
        assert!(report.all_passed());
        cfg.k = Some(5.0);
        assert!(run_extension_verify(&cfg).is_err());
        cfg.k = Some(2.5);
        assert!(run_extension_verify(&cfg).is_err());
    }

    #[test]
    fn failing_residual_is_reported() {
        let c = CheckResult::new("x", 1e-3, 1e-10);
        assert!(!c.passed);
        let r = VerifyReport {
            experiment: Experiment::ProtocolVerify,
            checks: vec![c],
        };
        assert!(!r.all_passed());
        assert_eq!(r.report().summary_value("n_failed"), Some(&Field::Int(1)));
    }
}
