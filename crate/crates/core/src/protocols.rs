//! Three-party activation protocols, computed by exact density-matrix algebra.
//!
//! Bob sits between Alice and Charlie and holds one half of each of two
//! copies of a bipartite state. Conditioning on one of Bob's outcomes leaves
//! Alice and Charlie with a bipartite state; if that state violates CHSH the
//! three-party state was nonlocal, since local models stay local under
//! conditioning.
//!
//! Double teleportation network layout (all subsystems of dimension `d`):
//!
//! ```text
//!   0: A   1: B1   2: Φ1   3: Φ2   4: B2   5: C
//!   ρ_iso(A,B1) ⊗ |Φ><Φ|(Φ1,Φ2) ⊗ ρ_iso(B2,C)
//! ```
//!
//! Bob Bell-measures the pairs `(Φ1, B1)` and `(Φ2, B2)`. Bell state
//! `(a, b)` is `(1 ⊗ X^a Z^b)|Ψ+^d>`; for outcome `(a, b)` on a pair, the
//! teleported subsystem arrives rotated by `conj(X^a Z^b)`.
//!
//! Erased network layout: `0: A (2)  1: B1 (3)  2: B2 (3)  3: C (2)`.

use num_complex::Complex64;

use crate::criteria::{horodecki_m, TIE_TOLERANCE};
use crate::qcore::subsystems::sandwich;
use crate::qcore::{
    check_projector, eigvalsh, partial_trace, project_and_condition, tensor, weyl, ComplexMatrix, DensityMatrix,
    PureState, STATE_TOL,
};
use crate::states::{erased, isotropic, max_entangled};
use crate::{Error, Result};

/// Largest local dimension accepted by [`double_teleport`] (network dimension `d⁶ = 729`).
pub const MAX_TELEPORT_DIM: usize = 3;
/// Largest `k` accepted by [`build_symmetric_extension`] (dimension `2·3^k = 162`).
pub const MAX_EXTENSION_K: usize = 4;

/// Subsystem indices of the double-teleport network.
pub const ALICE: usize = 0;
pub const CHARLIE: usize = 5;
pub const FIRST_BELL_PAIR: [usize; 2] = [2, 1];
pub const SECOND_BELL_PAIR: [usize; 2] = [3, 4];

/// Index `(a, b)` of the generalised Bell state `(1 ⊗ X^a Z^b)|Ψ+^d>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BellIndex {
    pub a: usize,
    pub b: usize,
}

impl BellIndex {
    pub const PSI_PLUS: BellIndex = BellIndex { a: 0, b: 0 };

    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Qubit Bell outcomes by flat index `2a + b`.
    pub fn from_qubit_index(i: usize) -> Result<Self> {
        if i >= 4 {
            return Err(Error::Argument(format!("qubit Bell outcome {i} outside 0..4")));
        }
        Ok(Self { a: i / 2, b: i % 2 })
    }

    pub fn all(d: usize) -> impl Iterator<Item = BellIndex> {
        (0..d).flat_map(move |a| (0..d).map(move |b| BellIndex { a, b }))
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.a >= d || self.b >= d {
            return Err(Error::Argument(format!("Bell index {self:?} invalid for d = {d}")));
        }
        Ok(())
    }
}

pub fn bell_state(d: usize, idx: BellIndex) -> Result<PureState> {
    idx.check(d)?;
    max_entangled(d)?.apply_local(&weyl(d, idx.a, idx.b), &[1])
}

pub fn bell_projector(d: usize, idx: BellIndex) -> Result<ComplexMatrix> {
    Ok(bell_state(d, idx)?.projector())
}

/// Unitary that undoes the rotation a teleported subsystem picks up for
/// outcome `idx`: `(conj(X^a Z^b))† = (X^a Z^b)ᵀ`.
pub fn teleport_correction(d: usize, idx: BellIndex) -> Result<ComplexMatrix> {
    idx.check(d)?;
    Ok(weyl(d, idx.a, idx.b).transpose())
}

/// What Bob does with a non-trivial Bell outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Correction {
    /// Keep the rotated state Alice and Charlie actually hold.
    #[default]
    PostSelect,
    /// Alice and Charlie undo the outcome-dependent rotation.
    Apply,
}

/// First-step outcome of the erased-state protocol on one of Bob's qutrits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterOutcome {
    /// `M0 = |0><0| + |1><1|`
    Qubit,
    /// `M1 = |2><2|`
    Erased,
}

impl FilterOutcome {
    pub fn projector(self) -> ComplexMatrix {
        match self {
            FilterOutcome::Qubit => ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0]),
            FilterOutcome::Erased => ComplexMatrix::from_diagonal(&[0.0, 0.0, 1.0]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeLabel {
    Bell(BellIndex),
    Filter(FilterOutcome),
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    /// Probability of the whole outcome sequence.
    pub success_probability: f64,
    /// Conditional probability of each measurement stage.
    pub stage_probabilities: Vec<f64>,
    /// Alice-Charlie state; `None` for outcomes of probability below 1e-12.
    pub conditional_state: Option<DensityMatrix>,
    pub outcome_labels: Vec<OutcomeLabel>,
}

fn check_teleport_args(phi: &PureState, p: f64, d: usize) -> Result<()> {
    if !(2..=MAX_TELEPORT_DIM).contains(&d) {
        return Err(Error::Size {
            requested: d.pow(6),
            limit: MAX_TELEPORT_DIM.pow(6),
        });
    }
    if phi.dims() != [d, d] {
        return Err(Error::Argument(format!(
            "Φ must have dims [{d}, {d}], got {:?}",
            phi.dims()
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("isotropic weight p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `ρ_iso(A,B1) ⊗ |Φ><Φ| ⊗ ρ_iso(B2,C)` in the module's layout.
pub fn teleport_network(phi: &PureState, p: f64) -> Result<DensityMatrix> {
    let d = phi.dims()[0];
    check_teleport_args(phi, p, d)?;
    let iso = isotropic(p, d)?;
    tensor(&tensor(&iso, &phi.to_density())?, &iso)
}

/// Projector for Bell outcomes `(first, second)` acting on subsystems
/// `[Φ1, B1, Φ2, B2]` of the network.
pub fn bell_pair_projector(d: usize, first: BellIndex, second: BellIndex) -> Result<(ComplexMatrix, [usize; 4])> {
    let proj = bell_projector(d, first)?.kron(&bell_projector(d, second)?);
    let [f0, f1] = FIRST_BELL_PAIR;
    let [s0, s1] = SECOND_BELL_PAIR;
    Ok((proj, [f0, f1, s0, s1]))
}

/// The state `(conj(W1) ⊗ conj(W2))|Φ>` delivered to Alice and Charlie
/// by noiseless teleportation with outcomes `(first, second)`.
pub fn teleported_target(phi: &PureState, outcome: (BellIndex, BellIndex)) -> Result<PureState> {
    let d = phi.dims()[0];
    let w1 = weyl(d, outcome.0.a, outcome.0.b).conj();
    let w2 = weyl(d, outcome.1.a, outcome.1.b).conj();
    phi.apply_local(&w1, &[0])?.apply_local(&w2, &[1])
}

/// Bob prepares `|Φ>` and teleports each half through an isotropic state;
/// returns the Alice-Charlie state for Bell outcomes `outcome`.
///
/// With outcome `(Ψ+, Ψ+)` (or any outcome under [`Correction::Apply`]) the
/// result is `(Λ_p ⊗ Λ_p)(|Φ><Φ|)`, the four-term mixture of
/// [`four_term_mixture`].
pub fn double_teleport(
    phi: &PureState,
    p: f64,
    d: usize,
    outcome: (BellIndex, BellIndex),
    correction: Correction,
) -> Result<ProtocolOutcome> {
    check_teleport_args(phi, p, d)?;
    outcome.0.check(d)?;
    outcome.1.check(d)?;
    let network = teleport_network(phi, p)?;

    let first = project_and_condition(&network, &bell_projector(d, outcome.0)?, &FIRST_BELL_PAIR)?;
    let mut stage_probabilities = vec![first.probability];
    let labels = vec![OutcomeLabel::Bell(outcome.0), OutcomeLabel::Bell(outcome.1)];
    let Some(after_first) = first.state else {
        return Ok(ProtocolOutcome {
            success_probability: first.probability,
            stage_probabilities,
            conditional_state: None,
            outcome_labels: labels,
        });
    };
    let second = project_and_condition(&after_first, &bell_projector(d, outcome.1)?, &SECOND_BELL_PAIR)?;
    stage_probabilities.push(second.probability);
    let success_probability = first.probability * second.probability;

    let conditional_state = match second.state {
        None => None,
        Some(full) => {
            let ac = partial_trace(&full, &[ALICE, CHARLIE])?;
            Some(match correction {
                Correction::PostSelect => ac,
                Correction::Apply => {
                    let u = teleport_correction(d, outcome.0)?.kron(&teleport_correction(d, outcome.1)?);
                    let (m, dims) = sandwich(&u, ac.matrix(), ac.dims(), &[0, 1])?;
                    DensityMatrix::sanitized(dims, m)?
                }
            })
        }
    };
    Ok(ProtocolOutcome {
        success_probability,
        stage_probabilities,
        conditional_state,
        outcome_labels: labels,
    })
}

/// `p²|Φ><Φ| + p(1-p) σ_A ⊗ 1/d + p(1-p) 1/d ⊗ σ_C + (1-p)² 1/d ⊗ 1/d`,
/// with `σ_A`, `σ_C` the marginals of `|Φ>`.
pub fn four_term_mixture(phi: &PureState, p: f64) -> Result<DensityMatrix> {
    let d = phi.dims()[0];
    if phi.dims() != [d, d] {
        return Err(Error::Argument(format!("Φ must be bipartite d x d, got {:?}", phi.dims())));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("isotropic weight p = {p} outside [0, 1]")));
    }
    let rho = phi.to_density();
    let mixed = DensityMatrix::maximally_mixed(vec![d])?;
    let sigma_a = tensor(&partial_trace(&rho, &[0])?, &mixed)?;
    let sigma_c = tensor(&mixed, &partial_trace(&rho, &[1])?)?;
    let noise = DensityMatrix::maximally_mixed(vec![d, d])?;
    let q = 1.0 - p;
    DensityMatrix::mixture(&[(p * p, &rho), (p * q, &sigma_a), (p * q, &sigma_c), (q * q, &noise)])
}

fn check_povm(elements: &[ComplexMatrix], d: usize, who: &str) -> Result<()> {
    if elements.is_empty() {
        return Err(Error::Validation(format!("{who}'s POVM is empty")));
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    for e in elements {
        if e.rows() != d || e.cols() != d {
            return Err(Error::Validation(format!(
                "{who}'s POVM element is {}x{}, expected {d}x{d}",
                e.rows(),
                e.cols()
            )));
        }
        let min = eigvalsh(e)?.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::Validation(format!("{who}'s POVM element has eigenvalue {min:.3e}")));
        }
        sum = &sum + e;
    }
    let err = sum.max_abs_diff(&ComplexMatrix::identity(d));
    if err > STATE_TOL {
        return Err(Error::Validation(format!("{who}'s POVM does not sum to the identity ({err:.3e})")));
    }
    Ok(())
}

fn expectation(m: &ComplexMatrix, op: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * op[(j, i)];
        }
    }
    acc.re
}

/// Joint outcome table `P[x][z]`.
pub type JointTable = Vec<Vec<f64>>;

fn joint_table(rho: &ComplexMatrix, alice: &[ComplexMatrix], charlie: &[ComplexMatrix]) -> JointTable {
    alice
        .iter()
        .map(|ax| charlie.iter().map(|cz| expectation(rho, &ax.kron(cz))).collect())
        .collect()
}

/// Outcome statistics of measuring the teleported state, split as
/// `joint = p² p_phi + (1 - p²) p_loc`.
#[derive(Clone, Debug)]
pub struct TeleportDistribution {
    pub joint: JointTable,
    /// Same measurements on `|Φ><Φ|`.
    pub p_phi: JointTable,
    /// Same measurements on the separable remainder, built term by term
    /// from products of single-party statistics.
    pub p_loc: JointTable,
    /// `p²`
    pub weight: f64,
    /// `max |joint - (p² p_phi + (1 - p²) p_loc)|`
    pub residual: f64,
}

/// Distribution Alice and Charlie observe after double teleportation with
/// outcome `(Ψ+, Ψ+)`.
pub fn teleport_distribution(
    phi: &PureState,
    p: f64,
    d: usize,
    alice_povm: &[ComplexMatrix],
    charlie_povm: &[ComplexMatrix],
) -> Result<TeleportDistribution> {
    check_teleport_args(phi, p, d)?;
    check_povm(alice_povm, d, "Alice")?;
    check_povm(charlie_povm, d, "Charlie")?;
    let outcome = double_teleport(phi, p, d, (BellIndex::PSI_PLUS, BellIndex::PSI_PLUS), Correction::PostSelect)?;
    let state = outcome
        .conditional_state
        .ok_or_else(|| Error::Validation("teleportation outcome has zero probability".into()))?;
    let joint = joint_table(state.matrix(), alice_povm, charlie_povm);

    let rho = phi.to_density();
    let p_phi = joint_table(rho.matrix(), alice_povm, charlie_povm);

    let sigma_a = partial_trace(&rho, &[0])?;
    let sigma_c = partial_trace(&rho, &[1])?;
    let df = d as f64;
    let a_sigma: Vec<f64> = alice_povm.iter().map(|e| expectation(sigma_a.matrix(), e)).collect();
    let a_flat: Vec<f64> = alice_povm.iter().map(|e| e.trace().re / df).collect();
    let c_sigma: Vec<f64> = charlie_povm.iter().map(|e| expectation(sigma_c.matrix(), e)).collect();
    let c_flat: Vec<f64> = charlie_povm.iter().map(|e| e.trace().re / df).collect();
    let q = 1.0 - p;
    let rest = 1.0 - p * p;
    let p_loc: JointTable = (0..alice_povm.len())
        .map(|x| {
            (0..charlie_povm.len())
                .map(|z| {
                    let flat = a_flat[x] * c_flat[z];
                    if rest <= 0.0 {
                        flat
                    } else {
                        (p * q * (a_sigma[x] * c_flat[z] + a_flat[x] * c_sigma[z]) + q * q * flat) / rest
                    }
                })
                .collect()
        })
        .collect();

    let weight = p * p;
    let mut residual = 0.0f64;
    for x in 0..joint.len() {
        for z in 0..joint[x].len() {
            let model = weight * p_phi[x][z] + rest * p_loc[x][z];
            residual = residual.max((joint[x][z] - model).abs());
        }
    }
    Ok(TeleportDistribution {
        joint,
        p_phi,
        p_loc,
        weight,
        residual,
    })
}

/// Projective qubit measurement along `n`: `[(1 + n·σ)/2, (1 - n·σ)/2]`.
pub fn spin_measurement(n: [f64; 3]) -> [ComplexMatrix; 2] {
    let [x, y, z] = crate::qcore::pauli();
    let ns = &(&x.scale_real(n[0]) + &y.scale_real(n[1])) + &z.scale_real(n[2]);
    let id = ComplexMatrix::identity(2);
    [(&id + &ns).scale_real(0.5), (&id - &ns).scale_real(0.5)]
}

/// `Σ (-1)^(x+z) P[x][z]` for a two-outcome table.
pub fn correlator(table: &JointTable) -> f64 {
    let mut e = 0.0;
    for (x, row) in table.iter().enumerate() {
        for (z, &v) in row.iter().enumerate() {
            e += if (x + z) % 2 == 0 { v } else { -v };
        }
    }
    e
}

/// `E(a,b) + E(a,b') + E(a',b) - E(a',b')` from the four tables, ordered `[ab, ab', a'b, a'b']`.
pub fn chsh_from_tables(tables: [&JointTable; 4]) -> f64 {
    correlator(tables[0]) + correlator(tables[1]) + correlator(tables[2]) - correlator(tables[3])
}

/// `ρ_eras(A,B1) ⊗ ρ_eras(B2,C)` with dims `[2, 3, 3, 2]`.
pub fn erased_network(k: f64) -> Result<DensityMatrix> {
    let left = erased(k)?;
    let right = left.permute(&[1, 0])?;
    tensor(&left, &right)
}

/// Qubit Bell projector embedded in the `|0>,|1>` block of two qutrits.
pub fn embedded_bell_projector(idx: BellIndex) -> Result<ComplexMatrix> {
    let bell = bell_state(2, idx)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 9];
    for i in 0..2 {
        for j in 0..2 {
            amps[3 * i + j] = bell.amplitudes()[2 * i + j];
        }
    }
    Ok(ComplexMatrix::outer(&amps, &amps))
}

/// First stage only: Bob filters both qutrits with `{M0, M1}`.
pub fn erased_filter_branch(k: f64, outcomes: (FilterOutcome, FilterOutcome)) -> Result<ProtocolOutcome> {
    let network = erased_network(k)?;
    let filter = outcomes.0.projector().kron(&outcomes.1.projector());
    let c = project_and_condition(&network, &filter, &[1, 2])?;
    let conditional_state = c.state.map(|s| partial_trace(&s, &[0, 3])).transpose()?;
    Ok(ProtocolOutcome {
        success_probability: c.probability,
        stage_probabilities: vec![c.probability],
        conditional_state,
        outcome_labels: vec![OutcomeLabel::Filter(outcomes.0), OutcomeLabel::Filter(outcomes.1)],
    })
}

/// Both qutrits filtered onto the qubit block, then a Bell measurement on
/// `(B1, B2)`. Bell outcome `(a, b)` leaves Alice and Charlie in Bell state `(a, b)`.
pub fn erased_protocol(k: f64, bell_outcome: BellIndex) -> Result<ProtocolOutcome> {
    bell_outcome.check(2)?;
    let network = erased_network(k)?;
    let filter = FilterOutcome::Qubit.projector().kron(&FilterOutcome::Qubit.projector());
    let filtered = project_and_condition(&network, &filter, &[1, 2])?;
    let labels = vec![
        OutcomeLabel::Filter(FilterOutcome::Qubit),
        OutcomeLabel::Filter(FilterOutcome::Qubit),
        OutcomeLabel::Bell(bell_outcome),
    ];
    let state = filtered
        .state
        .ok_or_else(|| Error::Validation("qubit filter outcome has zero probability".into()))?;
    let measured = project_and_condition(&state, &embedded_bell_projector(bell_outcome)?, &[1, 2])?;
    let conditional_state = measured.state.map(|s| partial_trace(&s, &[0, 3])).transpose()?;
    Ok(ProtocolOutcome {
        success_probability: filtered.probability * measured.probability,
        stage_probabilities: vec![filtered.probability, measured.probability],
        conditional_state,
        outcome_labels: labels,
    })
}

/// Every leaf of the erased protocol: the four Bell outcomes after a double
/// qubit filter, and the three filter outcomes where a qutrit was erased
/// (no Bell measurement follows those).
pub fn erased_outcome_tree(k: f64) -> Result<Vec<ProtocolOutcome>> {
    let mut leaves = Vec::with_capacity(7);
    for i in 0..4 {
        leaves.push(erased_protocol(k, BellIndex::from_qubit_index(i)?)?);
    }
    use FilterOutcome::{Erased, Qubit};
    for pair in [(Qubit, Erased), (Erased, Qubit), (Erased, Erased)] {
        leaves.push(erased_filter_branch(k, pair)?);
    }
    Ok(leaves)
}

/// `(1/k) Σ_i |Ψ+²><Ψ+²|(A,B_i) ⊗ ⊗_{j≠i} |2><2|(B_j)` on `[2, 3, .., 3]`.
/// Every `(A, B_i)` marginal is the erased state with parameter `k`.
pub fn build_symmetric_extension(k: usize) -> Result<DensityMatrix> {
    if !(2..=MAX_EXTENSION_K).contains(&k) {
        return Err(Error::Size {
            requested: 2 * 3usize.pow(k as u32),
            limit: 2 * 3usize.pow(MAX_EXTENSION_K as u32),
        });
    }
    let mut dims = vec![2];
    dims.extend(std::iter::repeat_n(3, k));
    let n: usize = dims.iter().product();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..k {
        // |a> on A, |a> on B_i, |2> on every other B_j
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..2 {
            let flat = (0..k).fold(a, |acc, j| acc * 3 + if j == i { a } else { 2 });
            amps[flat] = Complex64::new(h, 0.0);
        }
        m = &m + &ComplexMatrix::outer(&amps, &amps).scale_real(1.0 / k as f64);
    }
    DensityMatrix::new(dims, m)
}

/// A projector applied to chosen subsystems, i.e. one measurement outcome.
#[derive(Clone, Copy, Debug)]
pub struct Conditioning<'a> {
    pub projector: &'a ComplexMatrix,
    pub subsystems: &'a [usize],
}

/// Conditions `rho` on the given outcome, keeps the two subsystems in
/// `keep`, and reports whether that two-qubit state violates CHSH. A `true`
/// certifies that `rho` is nonlocal. Zero-probability outcomes certify nothing.
pub fn verify_locality_observation(rho: &DensityMatrix, conditioning: &Conditioning, keep: &[usize]) -> Result<bool> {
    check_projector(conditioning.projector)?;
    let c = project_and_condition(rho, conditioning.projector, conditioning.subsystems)?;
    let Some(state) = c.state else {
        return Ok(false);
    };
    let reduced = partial_trace(&state, keep)?;
    if reduced.dims() != [2, 2] {
        return Err(Error::UnsupportedCut(format!(
            "conditional state on subsystems {keep:?} has dims {:?}; only two-qubit states are tested",
            reduced.dims()
        )));
    }
    Ok(horodecki_m(&reduced)? > 1.0 + TIE_TOLERANCE)
}
