//! CHSH violation (Horodecki criterion), one-way distillability via the
//! hashing inequality, and the combined classifier.
//!
//! A two-qubit state violates CHSH iff `M(ρ) > 1`, where `M` is the sum of
//! the two largest eigenvalues of `TᵀT` and `T_ij = Tr[ρ σ_i ⊗ σ_j]`; the
//! largest CHSH value is `2√M`. A state with `max(S_A, S_B) > S_AB` is
//! one-way distillable. A state that does not violate CHSH but is
//! distillable is flagged as a nonlocal resource: many copies of it give
//! Bell violations in the three-party scenario. That flag is a sufficient
//! condition only; `false` does not mean the state is local.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qcore::{eigvalsh, partial_trace, pauli, von_neumann_entropy, ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

/// Margin both inequalities must clear. Exact ties (`M = 1`, equal
/// entropies) classify as non-violating / non-distillable.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::Argument(format!(
            "expected a two-qubit state with dims [2, 2], got {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// `T_ij = Tr[ρ (σ_i ⊗ σ_j)]` of a two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// `T v`
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|j| self.0[i][j] * v[j]).sum())
    }

    /// `Tᵀ v`
    pub fn apply_transpose(&self, v: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|j| (0..3).map(|i| self.0[i][j] * v[i]).sum())
    }

    /// `TᵀT`
    pub fn gram(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| self.0[k][i] * self.0[k][j]).sum()))
    }
}

pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    require_two_qubits(rho)?;
    let paulis = pauli();
    let m = rho.matrix();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in paulis.iter().enumerate() {
        for (j, sj) in paulis.iter().enumerate() {
            let op = si.kron(sj);
            // Tr[ρ O] = Σ_ab ρ_ab O_ba
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    acc += m[(a, b)] * op[(b, a)];
                }
            }
            debug_assert!(acc.im.abs() < 1e-10);
            t[i][j] = acc.re;
        }
    }
    Ok(CorrelationMatrix(t))
}

/// Sum of the two largest eigenvalues of `TᵀT`.
pub fn horodecki_m(rho: &DensityMatrix) -> Result<f64> {
    let t = correlation_matrix(rho)?;
    Ok(m_from_correlations(&t))
}

pub fn m_from_correlations(t: &CorrelationMatrix) -> f64 {
    let g = t.gram();
    let gm = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new(g[i][j], 0.0));
    let ev = eigvalsh(&gm).expect("TᵀT is symmetric");
    ev[0] + ev[1]
}

/// The subsystems forming party A; party B is the complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    part_a: Vec<usize>,
}

impl Bipartition {
    pub fn new(part_a: Vec<usize>) -> Self {
        Self { part_a }
    }

    /// Subsystem 0 against subsystem 1.
    pub fn two_party() -> Self {
        Self { part_a: vec![0] }
    }

    fn split(&self, n_subsystems: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut a = self.part_a.clone();
        a.sort_unstable();
        a.dedup();
        if a.len() != self.part_a.len() || a.iter().any(|&k| k >= n_subsystems) {
            return Err(Error::Argument(format!(
                "cut {:?} is not a set of subsystems of a {n_subsystems}-partite state",
                self.part_a
            )));
        }
        let b: Vec<usize> = (0..n_subsystems).filter(|k| !a.contains(k)).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument(format!("cut {:?} leaves one side empty", self.part_a)));
        }
        Ok((a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HashingReport {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub distillable: bool,
}

impl HashingReport {
    /// `max(S_A, S_B) - S_AB`
    pub fn margin(&self) -> f64 {
        self.s_a.max(self.s_b) - self.s_ab
    }
}

/// Entropies in bits and the one-way distillability flag across `cut`.
pub fn hashing_criterion(rho: &DensityMatrix, cut: &Bipartition) -> Result<HashingReport> {
    let (a, b) = cut.split(rho.dims().len())?;
    let s_a = von_neumann_entropy(&partial_trace(rho, &a)?);
    let s_b = von_neumann_entropy(&partial_trace(rho, &b)?);
    let s_ab = von_neumann_entropy(rho);
    let margin = s_a.max(s_b) - s_ab;
    Ok(HashingReport {
        s_a,
        s_b,
        s_ab,
        distillable: margin > TIE_TOLERANCE,
    })
}

/// Per-state record of both criteria.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub m_value: f64,
    /// `2√M`
    pub chsh_max: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub violates_chsh: bool,
    pub hashing_distillable: bool,
    /// Not CHSH-violating but hashing-distillable.
    pub nonlocal_resource: bool,
}

impl Classification {
    pub fn hashing_margin(&self) -> f64 {
        self.s_a.max(self.s_b) - self.s_ab
    }

    /// Whether the flags agree with the numeric fields.
    pub fn is_consistent(&self) -> bool {
        self.violates_chsh == (self.m_value > 1.0 + TIE_TOLERANCE)
            && self.hashing_distillable == (self.hashing_margin() > TIE_TOLERANCE)
            && self.nonlocal_resource == (!self.violates_chsh && self.hashing_distillable)
    }
}

/// CHSH check first, then the hashing inequality.
pub fn classify(rho: &DensityMatrix) -> Result<Classification> {
    let m_value = horodecki_m(rho)?;
    let h = hashing_criterion(rho, &Bipartition::two_party())?;
    let violates_chsh = m_value > 1.0 + TIE_TOLERANCE;
    Ok(Classification {
        m_value,
        chsh_max: 2.0 * m_value.max(0.0).sqrt(),
        s_a: h.s_a,
        s_b: h.s_b,
        s_ab: h.s_ab,
        violates_chsh,
        hashing_distillable: h.distillable,
        nonlocal_resource: !violates_chsh && h.distillable,
    })
}

/// Measurement directions `a, a'` (first qubit) and `b, b'` (second qubit).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
}

impl ChshSettings {
    /// Settings reaching `2√2` on `|Ψ+²>`, whose correlation matrix is `diag(1, -1, 1)`.
    pub fn bell_optimal() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a: [0.0, 0.0, 1.0],
            a_prime: [1.0, 0.0, 0.0],
            b: [h, 0.0, h],
            b_prime: [-h, 0.0, h],
        }
    }
}

fn spin_observable(n: &[f64; 3]) -> ComplexMatrix {
    let [x, y, z] = pauli();
    let xy = &x.scale_real(n[0]) + &y.scale_real(n[1]);
    &xy + &z.scale_real(n[2])
}

/// `E(a, b) = Tr[ρ (a·σ ⊗ b·σ)]`, evaluated directly on the density matrix.
fn correlator(rho: &DensityMatrix, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let op = spin_observable(a).kron(&spin_observable(b));
    let m = rho.matrix();
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (m[(i, j)] * op[(j, i)]).re;
        }
    }
    acc
}

/// `E(a,b) + E(a,b') + E(a',b) - E(a',b')` for explicit unit vectors.
pub fn chsh_value(rho: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    require_two_qubits(rho)?;
    for v in [settings.a, settings.a_prime, settings.b, settings.b_prime] {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Argument(format!("setting {v:?} is not a unit vector")));
        }
    }
    let ChshSettings { a, a_prime, b, b_prime } = settings;
    Ok(correlator(rho, a, b) + correlator(rho, a, b_prime) + correlator(rho, a_prime, b)
        - correlator(rho, a_prime, b_prime))
}

/// Numerical CHSH maximisation by alternating closed-form updates, used as an
/// independent check of `2√M`.
#[derive(Clone, Copy, Debug)]
pub struct ChshOptimizer {
    pub rounds: usize,
    pub tolerance: f64,
    pub restarts: usize,
}

impl Default for ChshOptimizer {
    fn default() -> Self {
        Self {
            rounds: 100,
            tolerance: 1e-12,
            restarts: 10,
        }
    }
}

fn normalize_or(v: [f64; 3], fallback: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-300 {
        fallback
    } else {
        v.map(|x| x / n)
    }
}

fn add(u: [f64; 3], v: [f64; 3], sign: f64) -> [f64; 3] {
    std::array::from_fn(|i| u[i] + sign * v[i])
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let v = [(); 3].map(|_| rng.sample::<f64, _>(StandardNormal));
    normalize_or(v, [0.0, 0.0, 1.0])
}

impl ChshOptimizer {
    /// Best value found and the settings reaching it.
    pub fn maximize<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<(f64, ChshSettings)> {
        require_two_qubits(rho)?;
        // Linear responses built from direct correlator evaluations:
        // (T v)_i = E(e_i, v) and (Tᵀ u)_j = E(u, e_j).
        let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let t_apply = |v: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|i| correlator(rho, &basis[i], v)) };
        let tt_apply = |u: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|j| correlator(rho, u, &basis[j])) };

        let mut best: Option<(f64, ChshSettings)> = None;
        for _ in 0..self.restarts.max(1) {
            let mut b = random_direction(rng);
            let mut b_prime = random_direction(rng);
            let mut a = [0.0, 0.0, 1.0];
            let mut a_prime = [1.0, 0.0, 0.0];
            let mut last = f64::NEG_INFINITY;
            for _ in 0..self.rounds {
                a = normalize_or(t_apply(&add(b, b_prime, 1.0)), a);
                a_prime = normalize_or(t_apply(&add(b, b_prime, -1.0)), a_prime);
                b = normalize_or(tt_apply(&add(a, a_prime, 1.0)), b);
                b_prime = normalize_or(tt_apply(&add(a, a_prime, -1.0)), b_prime);
                let s = ChshSettings { a, a_prime, b, b_prime };
                let value = chsh_value(rho, &s)?;
                let done = (value - last).abs() <= self.tolerance;
                last = value;
                if done {
                    break;
                }
            }
            let s = ChshSettings { a, a_prime, b, b_prime };
            if best.as_ref().is_none_or(|(v, _)| last > *v) {
                best = Some((last, s));
            }
        }
        Ok(best.expect("at least one restart"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{isotropic, max_entangled, random_mixed_hs, sample_unitary, RngSeed};

    fn bell_rho() -> DensityMatrix {
        max_entangled(2).unwrap().to_density()
    }

    fn assert_t(t: &CorrelationMatrix, want: [[f64; 3]; 3]) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.get(i, j) - want[i][j]).abs() < 1e-12, "T[{i}][{j}]");
            }
        }
    }

    #[test]
    fn correlation_matrices() {
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert_t(&correlation_matrix(&mixed).unwrap(), [[0.0; 3]; 3]);
        assert_t(
            &correlation_matrix(&bell_rho()).unwrap(),
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        );
        let p = 0.37;
        assert_t(
            &correlation_matrix(&isotropic(p, 2).unwrap()).unwrap(),
            [[p, 0.0, 0.0], [0.0, -p, 0.0], [0.0, 0.0, p]],
        );
        let wrong = DensityMatrix::maximally_mixed(vec![4]).unwrap();
        assert!(matches!(correlation_matrix(&wrong), Err(Error::Argument(_))));
    }

    #[test]
    fn horodecki_values() {
        assert!(horodecki_m(&DensityMatrix::maximally_mixed(vec![2, 2]).unwrap()).unwrap().abs() < 1e-15);
        assert!((horodecki_m(&bell_rho()).unwrap() - 2.0).abs() < 1e-12);
        for p in [0.1, 0.5, 0.7, 0.71, 0.9] {
            let m = horodecki_m(&isotropic(p, 2).unwrap()).unwrap();
            assert!((m - 2.0 * p * p).abs() < 1e-12);
            let c = classify(&isotropic(p, 2).unwrap()).unwrap();
            assert_eq!(c.violates_chsh, p > std::f64::consts::FRAC_1_SQRT_2);
        }
    }

    #[test]
    fn hashing_examples() {
        let h = hashing_criterion(&bell_rho(), &Bipartition::two_party()).unwrap();
        assert!((h.s_a - 1.0).abs() < 1e-12 && (h.s_b - 1.0).abs() < 1e-12 && h.s_ab.abs() < 1e-12);
        assert!(h.distillable);
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let h = hashing_criterion(&mixed, &Bipartition::two_party()).unwrap();
        assert!((h.s_ab - 2.0).abs() < 1e-12 && !h.distillable);
    }

    #[test]
    fn hashing_rejects_bad_cuts() {
        let rho = bell_rho();
        for cut in [vec![], vec![0, 1], vec![2], vec![0, 0]] {
            assert!(matches!(
                hashing_criterion(&rho, &Bipartition::new(cut)),
                Err(Error::Argument(_))
            ));
        }
    }

    #[test]
    fn isotropic_hashing_threshold_matches_bisection() {
        // Oracle: S_A = S_B = 1 and the spectrum {(1+3p)/4, (1-p)/4 ×3} give
        // margin(p) = 1 - H(p); bisect margin = 0 on the closed form.
        let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
        let margin = |p: f64| 1.0 - h((1.0 + 3.0 * p) / 4.0) - 3.0 * h((1.0 - p) / 4.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if margin(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let p_star = 0.5 * (lo + hi);
        assert!((p_star - 0.747_614).abs() < 1e-5, "p* = {p_star}");
        for (p, want) in [(p_star - 1e-4, false), (p_star + 1e-4, true), (0.5, false), (0.95, true)] {
            let r = hashing_criterion(&isotropic(p, 2).unwrap(), &Bipartition::two_party()).unwrap();
            assert_eq!(r.distillable, want, "p = {p}");
            assert!((r.margin() - margin(p)).abs() < 1e-10);
        }
    }

    #[test]
    fn classification_flags() {
        let c = classify(&bell_rho()).unwrap();
        assert!(c.violates_chsh && c.hashing_distillable && !c.nonlocal_resource);
        assert!((c.chsh_max - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let c = classify(&DensityMatrix::maximally_mixed(vec![2, 2]).unwrap()).unwrap();
        assert!(!c.violates_chsh && !c.hashing_distillable && !c.nonlocal_resource);
        // isotropic: the hashing threshold 0.7476 lies above 1/√2, so distillable
        // isotropic states always violate CHSH and are never flagged
        for p in [0.72, 0.75, 0.8] {
            let c = classify(&isotropic(p, 2).unwrap()).unwrap();
            assert!(c.violates_chsh && !c.nonlocal_resource && c.is_consistent());
        }
    }

    #[test]
    fn chsh_settings_examples() {
        let v = chsh_value(&bell_rho(), &ChshSettings::bell_optimal()).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        let rho = random_mixed_hs(&[2, 2], RngSeed::new(3, 0)).unwrap();
        let a = [0.6, 0.0, 0.8];
        let b = [0.0, 1.0, 0.0];
        let s = ChshSettings { a, a_prime: a, b, b_prime: b };
        let v = chsh_value(&rho, &s).unwrap();
        let t = correlation_matrix(&rho).unwrap();
        let e: f64 = (0..3).map(|i| a[i] * t.apply(&b)[i]).sum();
        assert!((v - 2.0 * e).abs() < 1e-12 && v.abs() <= 2.0);

        let bad = ChshSettings { a: [1.0, 1.0, 0.0], ..ChshSettings::bell_optimal() };
        assert!(chsh_value(&rho, &bad).is_err());
    }

    #[test]
    fn optimizer_reaches_closed_form() {
        let opt = ChshOptimizer::default();
        let mut rng = RngSeed::new(11, 0).rng();
        for i in 0..20 {
            let rho = random_mixed_hs(&[2, 2], RngSeed::new(12, i)).unwrap();
            let closed = 2.0 * horodecki_m(&rho).unwrap().sqrt();
            let (v, _) = opt.maximize(&rho, &mut rng).unwrap();
            assert!(v <= closed + 1e-9);
            assert!((v - closed).abs() < 1e-5, "{v} vs {closed}");
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = RngSeed::new(21, 0).rng();
        for i in 0..20 {
            let rho = random_mixed_hs(&[2, 2], RngSeed::new(22, i)).unwrap();
            let u = sample_unitary(&mut rng, 2).kron(&sample_unitary(&mut rng, 2));
            let rotated = u.matmul(rho.matrix()).matmul(&u.adjoint()).hermitize();
            let rotated = DensityMatrix::new(vec![2, 2], rotated).unwrap();
            let d = horodecki_m(&rho).unwrap() - horodecki_m(&rotated).unwrap();
            assert!(d.abs() < 1e-9);
        }
    }
}
