//! Named states and seeded random-state samplers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qcore::{total_dim, ComplexMatrix, DensityMatrix, PureState};
use crate::{Error, Result};

/// Seed plus stream index of a ChaCha8 generator; together they fix the
/// sample sequence. Distinct stream indices give non-overlapping streams,
/// which is how Monte Carlo work is partitioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `|Ψ+^d> = Σ_i |ii> / √d`
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::Argument(format!("local dimension must be at least 2, got {d}")));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    PureState::new(vec![d, d], amps)
}

/// `p |Ψ+^d><Ψ+^d| + (1 - p) 1/d²`
pub fn isotropic(p: f64, d: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("isotropic weight p = {p} outside [0, 1]")));
    }
    let phi = max_entangled(d)?;
    let noise = DensityMatrix::maximally_mixed(vec![d, d])?;
    DensityMatrix::mixture(&[(p, &phi.to_density()), (1.0 - p, &noise)])
}

/// Qubit-qutrit state `(1/k)|Ψ+²><Ψ+²| + (1 - 1/k) 1_A/2 ⊗ |2><2|_B`.
pub fn erased(k: f64) -> Result<DensityMatrix> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::Argument(format!("erasure parameter k = {k} must be a finite value >= 1")));
    }
    let keep = 1.0 / k;
    let lost = 0.5 * (1.0 - keep);
    // flat index of |a, b> on dims [2, 3] is 3a + b
    let mut m = ComplexMatrix::zeros(6, 6);
    for (i, j) in [(0, 0), (0, 4), (4, 0), (4, 4)] {
        m[(i, j)] = Complex64::new(0.5 * keep, 0.0);
    }
    m[(2, 2)] = Complex64::new(lost, 0.0);
    m[(5, 5)] = Complex64::new(lost, 0.0);
    DensityMatrix::new(vec![2, 3], m)
}

/// Draws `G G† / Tr(G G†)` with `G` square complex Ginibre; this is the
/// Hilbert-Schmidt measure on states of dimension `Π dims`.
pub fn sample_mixed_hs<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<DensityMatrix> {
    let n = total_dim(dims);
    if n < 2 {
        return Err(Error::Argument(format!("total dimension must be at least 2, got {n}")));
    }
    let g = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let ggd = g.matmul(&g.adjoint());
    let tr = ggd.trace().re;
    DensityMatrix::sanitized(dims.to_vec(), ggd.scale_real(1.0 / tr))
}

/// Hilbert-Schmidt random state from its own `(seed, stream)` generator.
pub fn random_mixed_hs(dims: &[usize], seed: RngSeed) -> Result<DensityMatrix> {
    sample_mixed_hs(&mut seed.rng(), dims)
}

/// Normalised complex Gaussian vector, i.e. a Fubini-Study (Haar) random pure state.
pub fn sample_pure_fs<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<PureState> {
    let n = total_dim(dims);
    if n < 2 {
        return Err(Error::Argument(format!("total dimension must be at least 2, got {n}")));
    }
    let amps = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(dims.to_vec(), amps)
}

pub fn random_pure_fs(dims: &[usize], seed: RngSeed) -> Result<PureState> {
    sample_pure_fs(&mut seed.rng(), dims)
}

/// Haar-random `d x d` unitary via Gram-Schmidt on a Ginibre matrix.
pub fn sample_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}
