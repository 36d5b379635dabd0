//! Kraus channels and their action on chosen subsystems.
//!
//! The qubit decoherence families take a strength `t ∈ [0, 1]`: `t = 0` is
//! the identity and `t = 1` full decoherence. Phase damping defaults to
//! `ρ -> (1 - t/2) ρ + (t/2) σ3 ρ σ3`; [`PhaseDampingForm::Verbatim`] keeps the
//! alternative operators `√t 1`, `√(1-t) σ3`, which are the identity at
//! `t = 1` and a σ3 flip at `t = 0`.

use std::fmt;
use std::str::FromStr;


use crate::qcore::subsystems::sandwich;
use crate::qcore::{pauli, weyl, ComplexMatrix, DensityMatrix, PureState};
use crate::{Error, Result};

/// Tolerance on `‖Σ E_i† E_i - 1‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelLabel {
    AmplitudeDamping,
    PhaseDamping,
    Depolarization,
    /// `σ -> p σ + (1 - p) 1/d`
    Depolarizing { d: usize },
    Erasure,
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhaseDampingForm {
    #[default]
    Standard,
    Verbatim,
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    label: ChannelLabel,
    strength: Option<f64>,
}

fn check_strength(name: &str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Argument(format!("{name} strength {t} outside [0, 1]")));
    }
    Ok(())
}

impl KrausChannel {
    fn build(ops: Vec<ComplexMatrix>, label: ChannelLabel, strength: Option<f64>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Argument("a channel needs at least one Kraus operator".into()))?;
        let shape = (first.rows(), first.cols());
        if ops.iter().any(|e| (e.rows(), e.cols()) != shape) {
            return Err(Error::Argument("Kraus operators have different shapes".into()));
        }
        let ch = Self { ops, label, strength };
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::Validation(format!(
                "Kraus operators violate completeness by {err:.3e}"
            )));
        }
        Ok(ch)
    }

    /// Arbitrary channel from Kraus operators of equal shape `d_out x d_in`.
    pub fn custom(ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::build(ops, ChannelLabel::Custom, None)
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn strength(&self) -> Option<f64> {
        self.strength
    }

    pub fn input_dim(&self) -> usize {
        self.ops[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.ops[0].rows()
    }

    /// `‖Σ E_i† E_i - 1‖_max`
    pub fn completeness_error(&self) -> f64 {
        let d = self.input_dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &self.ops {
            sum = &sum + &e.adjoint().matmul(e);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// `Σ E_i m E_i†` on a matrix of the channel's own input dimension.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.output_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for e in &self.ops {
            out = &out + &e.matmul(m).matmul(&e.adjoint());
        }
        out
    }
}

/// `E0 = |0><0| + √(1-t)|1><1|`, `E1 = √t |0><1|`.
pub fn make_ad(t: f64) -> Result<KrausChannel> {
    check_strength("amplitude damping", t)?;
    let e0 = ComplexMatrix::from_diagonal(&[1.0, (1.0 - t).sqrt()]);
    let e1 = ComplexMatrix::unit(2, 2, 0, 1).scale_real(t.sqrt());
    KrausChannel::build(vec![e0, e1], ChannelLabel::AmplitudeDamping, Some(t))
}

pub fn make_pd(t: f64, form: PhaseDampingForm) -> Result<KrausChannel> {
    check_strength("phase damping", t)?;
    let [_, _, z] = pauli();
    let (w_id, w_z) = match form {
        PhaseDampingForm::Standard => (1.0 - 0.5 * t, 0.5 * t),
        PhaseDampingForm::Verbatim => (t, 1.0 - t),
    };
    let ops = vec![
        ComplexMatrix::identity(2).scale_real(w_id.sqrt()),
        z.scale_real(w_z.sqrt()),
    ];
    KrausChannel::build(ops, ChannelLabel::PhaseDamping, Some(t))
}

/// `E0 = √(1 - 3t/4) 1`, `E_i = √(t/4) σ_i`; equals `(1 - t) ρ + t 1/2`.
pub fn make_d(t: f64) -> Result<KrausChannel> {
    check_strength("depolarization", t)?;
    let mut ops = vec![ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * t).sqrt())];
    ops.extend(pauli().iter().map(|s| s.scale_real((0.25 * t).sqrt())));
    KrausChannel::build(ops, ChannelLabel::Depolarization, Some(t))
}

/// `σ -> p σ + (1 - p) 1/d` through the Weyl twirl
/// `(1/d²) Σ_ab W_ab σ W_ab† = Tr(σ) 1/d`.
pub fn make_depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    check_strength("depolarizing", p)?;
    if d < 2 {
        return Err(Error::Argument(format!("dimension must be at least 2, got {d}")));
    }
    let noise = (1.0 - p) / (d * d) as f64;
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { p + noise } else { noise };
            ops.push(weyl(d, a, b).scale_real(w.sqrt()));
        }
    }
    KrausChannel::build(ops, ChannelLabel::Depolarizing { d }, Some(p))
}

/// Qubit -> qutrit erasure: the input survives with probability `1/k`,
/// otherwise it is replaced by the flag `|2>`. Its Choi state is the erased state.
pub fn make_erasure(k: f64) -> Result<KrausChannel> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::Argument(format!("erasure parameter k = {k} must be a finite value >= 1")));
    }
    let keep = (1.0 / k).sqrt();
    let lost = (1.0 - 1.0 / k).sqrt();
    let embed = ComplexMatrix::from_real_rows(&[&[keep, 0.0], &[0.0, keep], &[0.0, 0.0]])?;
    let flag0 = ComplexMatrix::unit(3, 2, 2, 0).scale_real(lost);
    let flag1 = ComplexMatrix::unit(3, 2, 2, 1).scale_real(lost);
    let strength = 1.0 - 1.0 / k;
    KrausChannel::build(vec![embed, flag0, flag1], ChannelLabel::Erasure, Some(strength))
}

/// Applies `ch` to one subsystem of `rho`. A channel with different input
/// and output dimensions changes that subsystem's dimension.
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix, subsystem: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if subsystem >= dims.len() {
        return Err(Error::Argument(format!(
            "subsystem {subsystem} out of range for {} subsystems",
            dims.len()
        )));
    }
    if dims[subsystem] != ch.input_dim() {
        return Err(Error::Argument(format!(
            "channel input dimension {} does not match subsystem dimension {}",
            ch.input_dim(),
            dims[subsystem]
        )));
    }
    let mut out: Option<(ComplexMatrix, Vec<usize>)> = None;
    for e in ch.ops() {
        let (term, out_dims) = sandwich(e, rho.matrix(), dims, &[subsystem])?;
        out = Some(match out {
            None => (term, out_dims),
            Some((acc, d)) => (&acc + &term, d),
        });
    }
    let (m, out_dims) = out.expect("channels have at least one Kraus operator");
    DensityMatrix::sanitized(out_dims, m)
}

/// The qubit decoherence processes of the sweep experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoherenceKind {
    AmplitudeDamping,
    PhaseDamping,
    PhaseDampingVerbatim,
    Depolarization,
}

impl DecoherenceKind {
    pub const ALL: [DecoherenceKind; 4] = [
        DecoherenceKind::AmplitudeDamping,
        DecoherenceKind::PhaseDamping,
        DecoherenceKind::PhaseDampingVerbatim,
        DecoherenceKind::Depolarization,
    ];

    pub fn channel(self, t: f64) -> Result<KrausChannel> {
        match self {
            Self::AmplitudeDamping => make_ad(t),
            Self::PhaseDamping => make_pd(t, PhaseDampingForm::Standard),
            Self::PhaseDampingVerbatim => make_pd(t, PhaseDampingForm::Verbatim),
            Self::Depolarization => make_d(t),
        }
    }

    /// Short name used on the command line and in output files.
    pub fn name(self) -> &'static str {
        match self {
            Self::AmplitudeDamping => "ad",
            Self::PhaseDamping => "pd",
            Self::PhaseDampingVerbatim => "pd-verbatim",
            Self::Depolarization => "d",
        }
    }
}

impl fmt::Display for DecoherenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoherenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" => Ok(Self::AmplitudeDamping),
            "pd" => Ok(Self::PhaseDamping),
            "pd-verbatim" | "pd_verbatim" => Ok(Self::PhaseDampingVerbatim),
            "d" => Ok(Self::Depolarization),
            other => Err(Error::Argument(format!(
                "unknown channel '{other}' (expected ad, pd, pd-verbatim or d)"
            ))),
        }
    }
}

/// Both qubits of a two-qubit pure state pass through the same process at strength `t`.
pub fn local_decohere(psi: &PureState, kind: DecoherenceKind, t: f64) -> Result<DensityMatrix> {
    if psi.dims() != [2, 2] {
        return Err(Error::Argument(format!(
            "expected a two-qubit pure state, got dims {:?}",
            psi.dims()
        )));
    }
    let ch = kind.channel(t)?;
    let rho = apply(&ch, &psi.to_density(), 0)?;
    apply(&ch, &rho, 1)
}
