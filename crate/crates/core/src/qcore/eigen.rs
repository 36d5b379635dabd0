//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Each rotation is a phase fix that makes `a_pq` real followed by a real
//! Jacobi rotation, so the combined 2x2 unitary is
//!
//! ```text
//!   G = [ c          s        ]
//!       [ -s e^{-iφ}  c e^{-iφ} ]   with a_pq = |a_pq| e^{iφ}
//! ```
//!
//! and `A <- G† A G` zeroes `a_pq`. Sweeps stop once the off-diagonal
//! Frobenius norm drops below `1e-12 · max(1, ‖A‖_F)`.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order; `vectors` holds the matching
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `Σ λ_i v_i v_i†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        reconstruct_with(&self.vectors, &self.values)
    }
}

pub(crate) fn reconstruct_with(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = vectors.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vectors[(i, k)] * lambda;
            for j in 0..n {
                out[(i, j)] += vi * vectors[(j, k)].conj();
            }
        }
    }
    out
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Validation(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max |m - m†| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let (values, _) = jacobi(m.hermitize(), false);
    Ok(values)
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let (values, vectors) = jacobi(m.hermitize(), true);
    Ok(HermitianEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = a.rows();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase_conj = (apq / r).conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = phase_conj * (-s);
                let g_qq = phase_conj * c;

                rotate_columns(&mut a, p, q, g_pp, g_pq, g_qp, g_qq);
                // rows: A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;

                if let Some(v) = v.as_mut() {
                    rotate_columns(v, p, q, g_pp, g_pq, g_qp, g_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]));
    (values, vectors)
}

/// `M <- M G` restricted to columns `p`, `q`.
#[inline]
fn rotate_columns(
    m: &mut ComplexMatrix,
    p: usize,
    q: usize,
    g_pp: Complex64,
    g_pq: Complex64,
    g_qp: Complex64,
    g_qq: Complex64,
) {
    for k in 0..m.rows() {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::matrix::pauli;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        // small LCG keeps this test free of RNG plumbing
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn pauli_z_spectrum() {
        let [_, _, z] = pauli();
        assert_eq!(eigvalsh(&z).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn scaled_identity() {
        let m = ComplexMatrix::identity(4).scale_real(0.25);
        assert_eq!(eigvalsh(&m).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let [_, y, _] = pauli();
        let e = eigh(&y).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        for (n, seed) in [(3, 1), (6, 2), (17, 3), (40, 4)] {
            let m = random_hermitian(n, seed);
            let e = eigh(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) < 1e-9, "n={n}");
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let tr: f64 = e.values.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_nalgebra_oracle() {
        for (n, seed) in [(2, 10), (4, 11), (9, 12), (27, 13)] {
            let m = random_hermitian(n, seed);
            let ours = eigvalsh(&m).unwrap();
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let z = m[(i, j)];
                nalgebra::Complex::new(z.re, z.im)
            });
            let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eigvalsh(&m), Err(Error::Validation(_))));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(eigh(&r).is_err());
    }

    #[test]
    fn degenerate_spectrum() {
        let m = ComplexMatrix::from_diagonal(&[0.5, 0.5, 0.0, 0.0]);
        let e = eigh(&m).unwrap();
        assert_eq!(e.values, vec![0.5, 0.5, 0.0, 0.0]);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-15);
    }
}
