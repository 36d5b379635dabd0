use num_complex::Complex64;

use super::eigen::{eigh, eigvalsh, reconstruct_with};
use super::subsystems::{partial_trace_matrix, permute_matrix, sandwich, total_dim, validate_targets};
use super::ComplexMatrix;
use crate::{Error, Result};

/// Largest total Hilbert-space dimension any state may have.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Tolerance for Hermiticity, unit trace and positivity of density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance on `‖ψ‖² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Conditioning outcomes below this probability carry no state.
pub const MIN_PROBABILITY: f64 = 1e-12;
/// Eigenvalue clipping is skipped above this dimension; see [`DensityMatrix::sanitized`].
pub const HYGIENE_MAX_DIM: usize = 256;
/// Eigenvalues below this are treated as exact zeros in entropies.
const ENTROPY_CUTOFF: f64 = 1e-14;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Argument(format!("subsystem dimensions must be positive, got {dims:?}")));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if total > MAX_TOTAL_DIM {
        return Err(Error::Size { requested: total, limit: MAX_TOTAL_DIM });
    }
    Ok(total)
}

/// Unit vector over a tensor factorisation `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::Argument(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm² is {norm2}, expected 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Argument("cannot normalise a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(dims, amplitudes)
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dims(&dims)?;
        if index >= total {
            return Err(Error::Argument(format!("basis index {index} out of range {total}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); total];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|ψ><ψ|`
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.clone(),
            matrix: self.projector(),
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `(op ⊗ 1)|ψ>` with a unitary `op` on `targets`, renormalised.
    pub fn apply_local(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<PureState> {
        let column = ComplexMatrix::from_vec(self.dim(), 1, self.amplitudes.clone())?;
        let (out, dims) = super::subsystems::left_apply(op, &column, &self.dims, targets)?;
        PureState::normalized(dims, out.data().to_vec())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(PureState { dims, amplitudes })
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix over `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates every state invariant (Hermitian, unit trace, PSD within 1e-10).
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.rows() != total || matrix.cols() != total {
            return Err(Error::Argument(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::Validation(format!("not Hermitian: max |ρ - ρ†| = {herm:.3e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let min_eig = eigvalsh(&matrix)?.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::Validation(format!("not positive semidefinite: min eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// `1/D` on every subsystem.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self {
            dims,
            matrix: ComplexMatrix::identity(total).scale_real(1.0 / total as f64),
        })
    }

    /// Re-Hermitises, renormalises and clips eigenvalues in `[-1e-10, 0)` to
    /// zero. Larger negativity is a validation error. For total dimension
    /// above [`HYGIENE_MAX_DIM`] only the Hermitian part and trace are fixed.
    pub(crate) fn sanitized(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let mut m = matrix.hermitize();
        let tr = m.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::Validation(format!("state has non-positive trace {tr}")));
        }
        if tr != 1.0 {
            m = m.scale_real(1.0 / tr);
        }
        if m.rows() <= HYGIENE_MAX_DIM {
            let e = eigh(&m)?;
            let min = e.values.last().copied().unwrap_or(0.0);
            if min < -STATE_TOL {
                return Err(Error::Validation(format!(
                    "operation produced eigenvalue {min:.3e} below -{STATE_TOL:e}"
                )));
            }
            if min < 0.0 {
                let clipped: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
                let sum: f64 = clipped.iter().sum();
                let scaled: Vec<f64> = clipped.iter().map(|x| x / sum).collect();
                m = reconstruct_with(&e.vectors, &scaled).hermitize();
            }
        }
        Ok(Self { dims, matrix: m })
    }

    /// Builds a state from a matrix produced by invariant-preserving algebra
    /// (convex combinations, Kronecker products of states). Only checked in
    /// debug builds.
    pub(crate) fn from_trusted(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(total_dim(&dims), matrix.rows());
        debug_assert!(matrix.hermiticity_error() < 1e-8);
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix).expect("density matrices are Hermitian")
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Reorders subsystems so that new subsystem `k` is old subsystem `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        let (m, dims) = permute_matrix(&self.matrix, &self.dims, order)?;
        Ok(Self { dims, matrix: m })
    }

    /// Convex combination `Σ w_i ρ_i` of states on identical dims.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let mut total_weight = 0.0;
        let mut m = ComplexMatrix::zeros(first.dim(), first.dim());
        for &(w, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::Argument("mixture components have different dims".into()));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Argument(format!("mixture weight {w} outside [0, 1]")));
            }
            total_weight += w;
            m = &m + &rho.matrix.scale_real(w);
        }
        if (total_weight - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("mixture weights sum to {total_weight}")));
        }
        Ok(Self::from_trusted(first.dims.clone(), m))
    }
}

/// `a ⊗ b`, dims concatenated.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    check_dims(&dims)?;
    Ok(DensityMatrix {
        dims,
        matrix: a.matrix.kron(&b.matrix),
    })
}

/// Reduced state on the subsystems in `keep`, which keep their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    validate_targets(&rho.dims, keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let dims = keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityMatrix {
        dims,
        matrix: partial_trace_matrix(&rho.matrix, &rho.dims, &keep),
    })
}

/// `-Tr ρ log2 ρ`, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Shannon entropy in bits of an eigenvalue list; entries below 1e-14 count as zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&x| x > ENTROPY_CUTOFF)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `<ψ|ρ|ψ>`
pub fn fidelity_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dims != psi.dims {
        return Err(Error::Argument(format!(
            "state dims {:?} do not match vector dims {:?}",
            rho.dims, psi.dims
        )));
    }
    let rv = rho.matrix.mul_vec(&psi.amplitudes);
    Ok(psi.amplitudes.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
}

/// Result of conditioning a state on a projector outcome.
#[derive(Clone, Debug)]
pub struct Conditioned {
    pub probability: f64,
    /// `None` when the outcome has probability below 1e-12.
    pub state: Option<DensityMatrix>,
}

/// Checks `P = P† = P²` within the state tolerance.
pub fn check_projector(proj: &ComplexMatrix) -> Result<()> {
    let herm = proj.hermiticity_error();
    if herm > STATE_TOL {
        return Err(Error::Validation(format!("projector not Hermitian ({herm:.3e})")));
    }
    let idem = proj.matmul(proj).max_abs_diff(proj);
    if idem > STATE_TOL {
        return Err(Error::Validation(format!("projector not idempotent ({idem:.3e})")));
    }
    Ok(())
}

/// Applies the projector `proj` on `subsystems` (in that order) and
/// renormalises. The probability is `Tr[P ρ P†]`.
pub fn project_and_condition(
    rho: &DensityMatrix,
    proj: &ComplexMatrix,
    subsystems: &[usize],
) -> Result<Conditioned> {
    check_projector(proj)?;
    let (m, dims) = sandwich(proj, &rho.matrix, &rho.dims, subsystems)?;
    let probability = m.trace().re.clamp(0.0, 1.0);
    if probability < MIN_PROBABILITY {
        return Ok(Conditioned { probability, state: None });
    }
    let state = DensityMatrix::sanitized(dims, m.scale_real(1.0 / probability))?;
    Ok(Conditioned { probability, state: Some(state) })
}
