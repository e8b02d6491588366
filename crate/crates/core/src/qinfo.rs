//! Two-qubit quantum-information metrics.
//!
//! Operates on 4×4 density matrices in the computational basis (hh, hv, vh,
//! vv), where h/v are the horizontal/vertical polarization states adapted to
//! the principal states of the dispersive arm. Everything works for arbitrary
//! physical states, not just the single-parameter family produced by the PMD
//! model, so matrices reconstructed from simulated tomography are handled by
//! the same code paths.

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use thiserror::Error;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QinfoError {
    #[error("matrix is not Hermitian: max |rho - rho^H| entry = {max_dev:.3e} exceeds {HERMITICITY_TOL:.0e}")]
    NotHermitian { max_dev: f64 },
    #[error("trace must be 1 within {TRACE_TOL:.0e}, got {trace:.12}")]
    BadTrace { trace: f64 },
    #[error(
        "matrix is not positive semidefinite: min eigenvalue {min_eig:.3e} below {PSD_TOL:.0e}"
    )]
    NotPsd { min_eig: f64 },
}

/// A validated two-qubit density matrix, basis order (hh, hv, vh, vv).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (within documented tolerances) and wraps the matrix.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self, QinfoError> {
        let max_dev = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_dev > HERMITICITY_TOL {
            return Err(QinfoError::NotHermitian { max_dev });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(QinfoError::BadTrace { trace: trace.re });
        }
        let min_eig = hermitian_eigenvalues(&rho).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(QinfoError::NotPsd { min_eig });
        }
        Ok(Self { rho })
    }

    /// Construction for matrices that are physical by construction; invariants
    /// are only debug-checked.
    pub(crate) fn from_valid(rho: Matrix4<Complex64>) -> Self {
        debug_assert!(
            Self::new(rho).is_ok(),
            "internal construction violated density-matrix invariants"
        );
        Self { rho }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Eigenvalues in descending order (real; the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut e = hermitian_eigenvalues(&self.rho);
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }
}

/// Summary metrics of a state, as reported by experiment runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Wootters concurrence, in [0, 1].
    pub concurrence: f64,
    /// Maximal CHSH value by the Horodecki criterion, in [0, 2√2].
    pub s_max: f64,
    /// Tr ρ², in [1/4, 1].
    pub purity: f64,
}

/// Computes all summary metrics of a state.
pub fn metrics(state: &TwoQubitState) -> MetricReport {
    MetricReport { concurrence: concurrence(state), s_max: max_chsh(state), purity: purity(state) }
}

/// Wootters concurrence C = max(0, λ₁−λ₂−λ₃−λ₄), where the λᵢ are the
/// descending square roots of the eigenvalues of ρ·ρ̃ and
/// ρ̃ = (σy⊗σy) ρ* (σy⊗σy).
///
/// Evaluated through the Hermitian product √ρ·ρ̃·√ρ, which has the same
/// spectrum as ρ·ρ̃ but keeps the eigenproblem symmetric.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let rho = &state.rho;
    let yy = pauli_y_pair();
    let rho_tilde = yy * rho.conjugate() * yy;
    let sqrt_rho = hermitian_sqrt(rho);
    let m = sqrt_rho * rho_tilde * sqrt_rho;
    // Tiny negative eigenvalues appear at roundoff level; clamp before the
    // square root.
    let mut lambda: Vec<f64> =
        hermitian_eigenvalues(&m).into_iter().map(|e| e.max(0.0).sqrt()).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

/// Maximal CHSH expectation over analyzer settings, per the Horodecki
/// criterion: 2√(m₁+m₂) with m₁, m₂ the two largest eigenvalues of TᵀT, where
/// T_ij = Tr(ρ σᵢ⊗σⱼ) is the correlation matrix.
pub fn max_chsh(state: &TwoQubitState) -> f64 {
    let t = correlation_matrix(state);
    let mut m: Vec<f64> =
        SymmetricEigen::new(t.transpose() * t).eigenvalues.iter().copied().collect();
    m.sort_by(|a, b| b.total_cmp(a));
    2.0 * (m[0] + m[1]).max(0.0).sqrt()
}

/// Pauli correlation matrix T_ij = Tr(ρ σᵢ⊗σⱼ); real for Hermitian ρ.
pub fn correlation_matrix(state: &TwoQubitState) -> Matrix3<f64> {
    let sigma = pauli_matrices();
    Matrix3::from_fn(|i, j| (sigma[i].kronecker(&sigma[j]) * state.rho).trace().re)
}

/// Uhlmann fidelity F(a,b) = (Tr √(√a·b·√a))², in [0, 1]; 1 iff a = b.
pub fn fidelity(a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    let sa = hermitian_sqrt(&a.rho);
    let m = sa * b.rho * sa;
    let root_sum: f64 = hermitian_eigenvalues(&m).into_iter().map(|e| e.max(0.0).sqrt()).sum();
    (root_sum * root_sum).min(1.0)
}

/// Trace distance ½·Tr|a − b|, in [0, 1].
pub fn trace_distance(a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    let d = a.rho - b.rho;
    0.5 * hermitian_eigenvalues(&d).into_iter().map(f64::abs).sum::<f64>()
}

/// Purity Tr ρ².
pub fn purity(state: &TwoQubitState) -> f64 {
    (state.rho * state.rho).trace().re
}

/// Projects an arbitrary Hermitian matrix onto the physical set (trace-1,
/// positive semidefinite), nearest in Frobenius norm: the input is
/// symmetrized, diagonalized, and its eigenvalues are projected onto the
/// probability simplex. Idempotent, and the identity on already-physical
/// inputs.
pub fn project_physical(raw: &Matrix4<Complex64>) -> TwoQubitState {
    let herm = (raw + raw.adjoint()).map(|z| 0.5 * z);
    let eig = SymmetricEigen::new(herm);
    let mu: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let lambda = simplex_projection(&mu);
    let v = &eig.eigenvectors;
    let mut rho = Matrix4::zeros();
    for (k, &l) in lambda.iter().enumerate() {
        if l > 0.0 {
            let col = v.column(k);
            rho += (col * col.adjoint()).map(|z| z * l);
        }
    }
    // Rebuild can leave ~1e-16 trace drift; pin the trace exactly by scaling.
    let tr = rho.trace().re;
    if tr > 0.0 {
        rho /= Complex64::new(tr, 0.0);
    } else {
        // All eigenvalues projected to a single unit weight is the only way
        // the sum can vanish; fall back to the maximally mixed state.
        rho = Matrix4::identity().map(|z: Complex64| z * 0.25);
    }
    TwoQubitState::from_valid((rho + rho.adjoint()).map(|z| 0.5 * z))
}

/// Euclidean projection of a vector onto the probability simplex
/// {λ ≥ 0, Σλ = 1} (water-filling).
fn simplex_projection(mu: &[f64]) -> Vec<f64> {
    let mut sorted = mu.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut theta = 0.0;
    let mut cumsum = 0.0;
    for (k, &m) in sorted.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if m - candidate > 0.0 {
            theta = candidate;
        }
    }
    mu.iter().map(|&m| (m - theta).max(0.0)).collect()
}

/// The Bell state Φ⁺ = (|hh⟩ + |vv⟩)/√2 as a density matrix.
pub fn bell_phi_plus() -> TwoQubitState {
    let ket = Vector4::from_row_slice(&[
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ]);
    TwoQubitState::from_valid(ket * ket.adjoint())
}

fn pauli_matrices() -> [Matrix2<Complex64>; 3] {
    let z = |re, im| Complex64::new(re, im);
    [
        Matrix2::new(z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)),
        Matrix2::new(z(0.0, 0.0), z(0.0, -1.0), z(0.0, 1.0), z(0.0, 0.0)),
        Matrix2::new(z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0), z(-1.0, 0.0)),
    ]
}

fn pauli_y_pair() -> Matrix4<Complex64> {
    let sigma = pauli_matrices();
    sigma[1].kronecker(&sigma[1])
}

fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> [f64; 4] {
    let herm = (m + m.adjoint()).map(|z| 0.5 * z);
    let eig = SymmetricEigen::new(herm);
    [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2], eig.eigenvalues[3]]
}

/// Hermitian PSD square root via diagonalization; negative roundoff
/// eigenvalues are clamped to zero.
fn hermitian_sqrt(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let herm = (m + m.adjoint()).map(|z| 0.5 * z);
    let eig = SymmetricEigen::new(herm);
    let v = &eig.eigenvectors;
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let l = eig.eigenvalues[k].max(0.0).sqrt();
        if l > 0.0 {
            let col = v.column(k);
            out += (col * col.adjoint()).map(|z| z * l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmdcore::build_density_matrix;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn maximally_mixed() -> TwoQubitState {
        TwoQubitState::new(Matrix4::identity().map(|v: Complex64| v * 0.25)).unwrap()
    }

    fn werner(p: f64) -> TwoQubitState {
        let phi = bell_phi_plus();
        let m = phi.matrix().map(|v| v * p)
            + Matrix4::identity().map(|v: Complex64| v * (0.25 * (1.0 - p)));
        TwoQubitState::new(m).unwrap()
    }

    fn bell_phi_minus() -> TwoQubitState {
        let ket = Vector4::from_row_slice(&[
            z(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            z(0.0, 0.0),
            z(0.0, 0.0),
            z(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        TwoQubitState::from_valid(ket * ket.adjoint())
    }

    /// Random density matrix from a complex Ginibre draw, ρ = GG†/Tr(GG†).
    fn random_state(rng: &mut StdRng) -> TwoQubitState {
        let g = Matrix4::from_fn(|_, _| z(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = g * g.adjoint();
        let m = m.map(|v| v / m.trace().re);
        TwoQubitState::new((m + m.adjoint()).map(|v| 0.5 * v)).unwrap()
    }

    fn random_su2(rng: &mut StdRng) -> Matrix2<Complex64> {
        let a = z(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let b = z(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        Matrix2::new(a, b, -b.conj(), a.conj())
    }

    #[test]
    fn validation_accepts_and_rejects() {
        assert!(TwoQubitState::new(Matrix4::identity().map(|v: Complex64| v * 0.25)).is_ok());

        let mut non_herm = Matrix4::zeros();
        non_herm[(0, 0)] = z(1.0, 0.0);
        non_herm[(0, 1)] = z(0.1, 0.0);
        assert!(matches!(TwoQubitState::new(non_herm), Err(QinfoError::NotHermitian { .. })));

        let not_psd = Matrix4::from_diagonal(&Vector4::from_row_slice(&[
            z(0.6, 0.0),
            z(0.6, 0.0),
            z(-0.1, 0.0),
            z(-0.1, 0.0),
        ]));
        assert!(matches!(TwoQubitState::new(not_psd), Err(QinfoError::NotPsd { .. })));

        let bad_trace = Matrix4::identity().map(|v: Complex64| v * 0.3);
        assert!(matches!(TwoQubitState::new(bad_trace), Err(QinfoError::BadTrace { .. })));
    }

    #[test]
    fn concurrence_reference_values() {
        assert_abs_diff_eq!(concurrence(&bell_phi_plus()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence(&maximally_mixed()), 0.0, epsilon = 1e-12);
        let r = build_density_matrix(z(0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(concurrence(&r), 0.3, epsilon = 1e-12);
        // Werner state at p: C = max(0, (3p-1)/2).
        assert_abs_diff_eq!(concurrence(&werner(0.5)), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence(&werner(0.2)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn max_chsh_reference_values() {
        assert_abs_diff_eq!(max_chsh(&bell_phi_plus()), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        let dephased = build_density_matrix(z(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(max_chsh(&dephased), 2.0, epsilon = 1e-12);
        // Product state |hh><hh|: single unit singular value in T.
        let mut hh = Matrix4::zeros();
        hh[(0, 0)] = z(1.0, 0.0);
        assert_abs_diff_eq!(max_chsh(&TwoQubitState::new(hh).unwrap()), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_reference_values() {
        let phi = bell_phi_plus();
        assert_abs_diff_eq!(fidelity(&phi, &phi), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&phi, &bell_phi_minus()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&phi, &maximally_mixed()), 0.25, epsilon = 1e-12);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            assert_abs_diff_eq!(fidelity(&a, &b), fidelity(&b, &a), epsilon = 1e-9);
            assert!(fidelity(&a, &b) < 1.0 - 1e-9);
            assert_abs_diff_eq!(fidelity(&a, &a), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn purity_reference_values() {
        assert_abs_diff_eq!(purity(&bell_phi_plus()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(purity(&maximally_mixed()), 0.25, epsilon = 1e-12);
        let s = build_density_matrix(z(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(purity(&s), 0.625, epsilon = 1e-12);
        assert_eq!(s.eigenvalues().map(|e| (e * 1e12).round() / 1e12), [0.75, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn projection_reference_values() {
        // Fixed point.
        let phi = bell_phi_plus();
        assert!(trace_distance(&project_physical(phi.matrix()), &phi) < 1e-12);

        // diag(1.1, 0, 0, -0.1): water-filling by hand gives diag(1, 0, 0, 0).
        let d = Matrix4::from_diagonal(&Vector4::from_row_slice(&[
            z(1.1, 0.0),
            z(0.0, 0.0),
            z(0.0, 0.0),
            z(-0.1, 0.0),
        ]));
        let p = project_physical(&d);
        let mut expected = Matrix4::zeros();
        expected[(0, 0)] = z(1.0, 0.0);
        assert!((p.matrix() - expected).norm() < 1e-12);

        // Uniform trace deficit spreads evenly: 0.5·I/4 projects to I/4.
        let half = Matrix4::identity().map(|v: Complex64| v * 0.125);
        let p = project_physical(&half);
        assert!(trace_distance(&p, &maximally_mixed()) < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_on_noisy_matrices() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..25 {
            let s = random_state(&mut rng);
            let noise = Matrix4::from_fn(|_, _| {
                z(0.05 * (rng.random::<f64>() - 0.5), 0.05 * (rng.random::<f64>() - 0.5))
            });
            let noisy = s.matrix() + noise;
            let once = project_physical(&noisy);
            let twice = project_physical(once.matrix());
            assert!(trace_distance(&once, &twice) < 1e-12);
        }
    }

    #[test]
    fn chsh_closed_form_on_dephased_family() {
        for k in 0..=20 {
            let c = k as f64 / 20.0;
            let r = z(c, 0.0) * z(0.3, 0.87).exp() / z(0.3, 0.87).exp().norm();
            let s = build_density_matrix(r).unwrap();
            assert_relative_eq!(max_chsh(&s), 2.0 * (1.0 + c * c).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn metrics_are_invariant_under_local_unitaries() {
        let mut rng = StdRng::seed_from_u64(99);
        let base = werner(0.8);
        let (c0, s0) = (concurrence(&base), max_chsh(&base));
        for _ in 0..100 {
            let u = random_su2(&mut rng).kronecker(&random_su2(&mut rng));
            let rotated = TwoQubitState::new((u * base.matrix() * u.adjoint()).map(|v| v)).unwrap();
            assert_abs_diff_eq!(concurrence(&rotated), c0, epsilon = 1e-9);
            assert_abs_diff_eq!(max_chsh(&rotated), s0, epsilon = 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metrics_stay_in_range(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let s = random_state(&mut rng);
            let m = metrics(&s);
            prop_assert!((0.0..=1.0).contains(&m.concurrence));
            prop_assert!((0.0..=2.0 * 2f64.sqrt() + 1e-12).contains(&m.s_max));
            prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&m.purity));
        }

        #[test]
        fn simplex_projection_is_a_distribution(
            v in proptest::collection::vec(-2.0f64..2.0, 4)
        ) {
            let p = simplex_projection(&v);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
