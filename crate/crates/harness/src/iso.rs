//! Nonlocality curves of the two-qubit isotropic state.

use nlact_core::criteria::{classify, horodecki_m, TIE_TOLERANCE};
use nlact_core::protocols::{double_teleport, BellIndex, Correction};
use nlact_core::states::{isotropic, max_entangled};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::output::{Field, Report, Table};

pub const ISO_GRID_POINTS: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoRow {
    pub p: f64,
    pub m_value: f64,
    pub chsh_max: f64,
    pub hashing_margin: f64,
    pub violates_chsh: bool,
    pub hashing_distillable: bool,
    pub nonlocal_resource: bool,
    /// Horodecki value of the Alice-Charlie state after double teleportation of `Ψ+`.
    pub activated_m: f64,
    pub activated_chsh: f64,
}

#[derive(Clone, Debug)]
pub struct IsoCurve {
    pub rows: Vec<IsoRow>,
    /// First grid `p` whose activated state violates CHSH.
    pub activation_crossing: Option<f64>,
    /// First grid `p` at which the state itself violates CHSH.
    pub chsh_crossing: Option<f64>,
    /// First grid `p` at which the hashing criterion holds.
    pub hashing_crossing: Option<f64>,
}

pub fn iso_row(p: f64) -> Result<IsoRow> {
    let c = classify(&isotropic(p, 2)?)?;
    let out = double_teleport(&max_entangled(2)?, p, 2, (BellIndex::PSI_PLUS, BellIndex::PSI_PLUS), Correction::PostSelect)?;
    let activated_m = match out.conditional_state {
        Some(s) => horodecki_m(&s)?,
        None => 0.0,
    };
    Ok(IsoRow {
        p,
        m_value: c.m_value,
        chsh_max: c.chsh_max,
        hashing_margin: c.hashing_margin(),
        violates_chsh: c.violates_chsh,
        hashing_distillable: c.hashing_distillable,
        nonlocal_resource: c.nonlocal_resource,
        activated_m,
        activated_chsh: 2.0 * activated_m.max(0.0).sqrt(),
    })
}

pub fn run_iso_curve(cfg: &ExperimentConfig) -> Result<IsoCurve> {
    cfg.expect(Experiment::IsoCurve)?;
    if let Some(d) = cfg.d.filter(|&d| d != 2) {
        return Err(HarnessError::Config(format!(
            "the isotropic curve is computed for d = 2 only, got d = {d}"
        )));
    }
    let rows = (0..ISO_GRID_POINTS)
        .map(|i| iso_row(i as f64 / (ISO_GRID_POINTS - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let first = |f: fn(&IsoRow) -> bool| rows.iter().find(|r| f(r)).map(|r| r.p);
    let curve = IsoCurve {
        activation_crossing: first(|r| r.activated_m > 1.0 + TIE_TOLERANCE),
        chsh_crossing: first(|r| r.violates_chsh),
        hashing_crossing: first(|r| r.hashing_distillable),
        rows,
    };
    if let Some(path) = &cfg.output_path {
        curve.report().write(path, cfg.output_format)?;
    }
    Ok(curve)
}

impl IsoCurve {
    pub fn report(&self) -> Report {
        let mut records = Table::new(vec![
            "p",
            "m_value",
            "chsh_max",
            "hashing_margin",
            "violates_chsh",
            "hashing_distillable",
            "nonlocal_resource",
            "activated_m",
            "activated_chsh",
        ]);
        for r in &self.rows {
            records.push(vec![
                Field::Float(r.p),
                Field::Float(r.m_value),
                Field::Float(r.chsh_max),
                Field::Float(r.hashing_margin),
                Field::Bool(r.violates_chsh),
                Field::Bool(r.hashing_distillable),
                Field::Bool(r.nonlocal_resource),
                Field::Float(r.activated_m),
                Field::Float(r.activated_chsh),
            ]);
        }
        Report {
            experiment: Experiment::IsoCurve.name(),
            summary: vec![
                ("n_points", Field::Int(self.rows.len() as u64)),
                ("chsh_crossing", Field::opt_float(self.chsh_crossing)),
                ("hashing_crossing", Field::opt_float(self.hashing_crossing)),
                ("activation_crossing", Field::opt_float(self.activation_crossing)),
            ],
            records,
            extra: vec![],
        }
    }
}
