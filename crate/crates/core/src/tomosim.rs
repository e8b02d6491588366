//! Simulated quantum state tomography of the photon pair.
//!
//! Mirrors the measurement procedure of the experiment being modeled: each
//! of 16 analyzer settings projects the pair onto a product polarization
//! state, coincidences are counted with per-detector efficiency η and
//! Poisson statistics, and the density matrix is recovered by linear
//! inversion of the normalized count frequencies followed by projection onto
//! the physical (PSD, unit-trace) set.
//!
//! The counting noise is the only imperfection modeled; dark counts,
//! accidental coincidences, and analyzer miscalibration are out of scope.

use crate::pmdcore::{build_density_matrix, compute_r, LinkConfig, PmdError};
use crate::qinfo::{fidelity, metrics, project_physical, MetricReport, TwoQubitState};
use nalgebra::{Matrix4, SMatrix, SVector, Vector2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

/// Unit-norm tolerance for analyzer kets.
const KET_NORM_TOL: f64 = 1e-12;
/// Plans whose projector Gram determinant falls below this are rejected as
/// informationally incomplete.
const GRAM_DET_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomoError {
    #[error("analyzer ket not normalized: |norm - 1| = {0:.3e}")]
    BadSetting(f64),
    #[error("invalid tomography plan: {0}")]
    BadPlan(String),
    #[error(
        "measurement design is singular (projector Gram determinant {gram_determinant:.3e}): \
         the settings do not span the space of two-qubit operators"
    )]
    SingularDesign { gram_determinant: f64 },
    #[error("count record unusable: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Link(#[from] PmdError),
}

/// The four canonical analyzer orientations: horizontal, vertical, diagonal
/// (h+v)/√2, and right-circular (h+iv)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
    D,
    R,
}

impl Polarization {
    pub fn ket(self) -> Vector2<Complex64> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Polarization::H => (Complex64::new(1.0, 0.0), Complex64::ZERO),
            Polarization::V => (Complex64::ZERO, Complex64::new(1.0, 0.0)),
            Polarization::D => (Complex64::new(inv_sqrt2, 0.0), Complex64::new(inv_sqrt2, 0.0)),
            Polarization::R => (Complex64::new(inv_sqrt2, 0.0), Complex64::new(0.0, inv_sqrt2)),
        };
        Vector2::new(a, b)
    }
}

/// One joint analyzer configuration: a pure polarization ket on each arm.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerSetting {
    ket_a: Vector2<Complex64>,
    ket_b: Vector2<Complex64>,
}

impl AnalyzerSetting {
    pub fn new(ket_a: Vector2<Complex64>, ket_b: Vector2<Complex64>) -> Result<Self, TomoError> {
        for ket in [&ket_a, &ket_b] {
            let dev = (ket.norm() - 1.0).abs();
            if dev > KET_NORM_TOL {
                return Err(TomoError::BadSetting(dev));
            }
        }
        Ok(Self { ket_a, ket_b })
    }

    pub fn from_labels(a: Polarization, b: Polarization) -> Self {
        Self { ket_a: a.ket(), ket_b: b.ket() }
    }

    pub fn ket_a(&self) -> &Vector2<Complex64> {
        &self.ket_a
    }

    pub fn ket_b(&self) -> &Vector2<Complex64> {
        &self.ket_b
    }

    /// |ψ⟩⟨ψ| with ψ = ket_a ⊗ ket_b in basis (hh, hv, vh, vv).
    pub fn projector(&self) -> Matrix4<Complex64> {
        let psi = self.joint_ket();
        Matrix4::from_fn(|i, j| psi[i] * psi[j].conj())
    }

    fn joint_ket(&self) -> [Complex64; 4] {
        [
            self.ket_a[0] * self.ket_b[0],
            self.ket_a[0] * self.ket_b[1],
            self.ket_a[1] * self.ket_b[0],
            self.ket_a[1] * self.ket_b[1],
        ]
    }
}

/// Conditioning report for a measurement design; see
/// [`TomographyPlan::diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanDiagnostics {
    /// |det| of the 16×16 Gram matrix Tr(P_i†P_j) of the setting projectors.
    pub gram_determinant: f64,
    /// Ratio of extreme singular values of the linear-inversion design
    /// matrix.
    pub condition_number: f64,
}

/// A full tomography protocol: 16 analyzer settings plus the counting
/// parameters (expected generated pairs per setting, per-detector
/// efficiency, RNG seed).
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyPlan {
    settings: Vec<AnalyzerSetting>,
    pairs_per_setting: u64,
    efficiency: f64,
    seed: u64,
}

pub const SETTINGS_PER_PLAN: usize = 16;

impl TomographyPlan {
    pub fn new(
        settings: Vec<AnalyzerSetting>,
        pairs_per_setting: u64,
        efficiency: f64,
        seed: u64,
    ) -> Result<Self, TomoError> {
        if settings.len() != SETTINGS_PER_PLAN {
            return Err(TomoError::BadPlan(format!(
                "expected {} settings, got {}",
                SETTINGS_PER_PLAN,
                settings.len()
            )));
        }
        if pairs_per_setting == 0 {
            return Err(TomoError::BadPlan("pairs_per_setting must be positive".into()));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(TomoError::BadPlan(format!(
                "efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        Ok(Self { settings, pairs_per_setting, efficiency, seed })
    }

    pub fn settings(&self) -> &[AnalyzerSetting] {
        &self.settings
    }

    pub fn pairs_per_setting(&self) -> u64 {
        self.pairs_per_setting
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pairs_per_setting(mut self, pairs: u64) -> Result<Self, TomoError> {
        if pairs == 0 {
            return Err(TomoError::BadPlan("pairs_per_setting must be positive".into()));
        }
        self.pairs_per_setting = pairs;
        Ok(self)
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self, TomoError> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(TomoError::BadPlan(format!(
                "efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        self.efficiency = efficiency;
        Ok(self)
    }

    /// Numerical conditioning of the design: how invertible the map from
    /// states to the 16 probabilities is.
    pub fn diagnostics(&self) -> PlanDiagnostics {
        let a = design_matrix(&self.settings);
        let svd = a.svd(false, false);
        let (mut s_max, mut s_min) = (0.0f64, f64::INFINITY);
        let mut log_det = 0.0f64;
        for s in svd.singular_values.iter() {
            s_max = s_max.max(*s);
            s_min = s_min.min(*s);
            log_det += s.max(f64::MIN_POSITIVE).ln();
        }
        PlanDiagnostics {
            // Gram = A·A†, so |det Gram| = Π σ².
            gram_determinant: (2.0 * log_det).exp(),
            condition_number: if s_min > 0.0 { s_max / s_min } else { f64::INFINITY },
        }
    }
}

/// The canonical {h, v, d, r} ⊗ {h, v, d, r} plan with the experiment's
/// nominal counting parameters: 10⁶ generated pairs per setting, η = 0.20,
/// seed 0. Arm A's setting varies slowest: index 4·a + b.
pub fn default_plan() -> TomographyPlan {
    use Polarization::{D, H, R, V};
    let labels = [H, V, D, R];
    let settings = labels
        .iter()
        .flat_map(|&a| labels.iter().map(move |&b| AnalyzerSetting::from_labels(a, b)))
        .collect();
    TomographyPlan::new(settings, 1_000_000, 0.20, 0).expect("canonical plan is valid")
}

/// The per-generated-pair probability of a coincidence at `setting` (before
/// detector efficiency): ⟨ψ|ρ|ψ⟩.
pub fn coincidence_probability(state: &TwoQubitState, setting: &AnalyzerSetting) -> f64 {
    let psi = setting.joint_ket();
    let rho = state.matrix();
    let mut acc = Complex64::ZERO;
    for i in 0..4 {
        for j in 0..4 {
            acc += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    acc.re.clamp(0.0, 1.0)
}

/// Simulated coincidence counts plus an echo of the plan that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    plan: TomographyPlan,
    counts: Vec<u64>,
}

impl CountRecord {
    pub fn new(plan: TomographyPlan, counts: Vec<u64>) -> Result<Self, TomoError> {
        if counts.len() != plan.settings().len() {
            return Err(TomoError::BadRecord(format!(
                "expected {} counts, got {}",
                plan.settings().len(),
                counts.len()
            )));
        }
        Ok(Self { plan, counts })
    }

    pub fn plan(&self) -> &TomographyPlan {
        &self.plan
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Draws Poisson coincidence counts with mean N·η²·p(setting) for every
/// setting of the plan.
///
/// Each setting uses its own counter-indexed RNG stream derived from the
/// plan seed, so per-setting results do not depend on the order in which
/// settings are evaluated (or on which other settings exist).
pub fn simulate_counts(state: &TwoQubitState, plan: &TomographyPlan) -> CountRecord {
    let rate = plan.pairs_per_setting() as f64 * plan.efficiency().powi(2);
    let counts = plan
        .settings()
        .iter()
        .enumerate()
        .map(|(i, setting)| {
            let mean = rate * coincidence_probability(state, setting);
            if mean <= 0.0 {
                return 0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed());
            rng.set_stream(i as u64);
            Poisson::new(mean).expect("mean is positive and finite").sample(&mut rng) as u64
        })
        .collect();
    CountRecord { plan: plan.clone(), counts }
}

/// Density-matrix estimate from a count record: normalize counts to
/// frequencies using the completeness combination of settings as the total
/// rate estimator, invert the linear design, then project onto physical
/// states.
///
/// For the canonical plan the rate estimator reduces to the summed counts of
/// the (h/v)⊗(h/v) basis block.
pub fn reconstruct(record: &CountRecord) -> Result<TwoQubitState, TomoError> {
    let plan = record.plan();
    let a = checked_design(plan)?;
    // Coefficients x with Σ x_i·P_i = I; then Σ x_i·E[counts_i] = N·η².
    let identity_vec = SVector::<Complex64, 16>::from_fn(|m, _| {
        let (j, k) = (m / 4, m % 4);
        if j == k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let lu_t = a.transpose().lu();
    let x = lu_t.solve(&identity_vec).ok_or(TomoError::SingularDesign {
        gram_determinant: plan.diagnostics().gram_determinant,
    })?;
    let total: f64 =
        record.counts().iter().zip(x.iter()).map(|(&c, coeff)| coeff.re * c as f64).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(TomoError::BadRecord(format!(
            "total-rate estimate from the completeness combination is {total}; cannot normalize"
        )));
    }
    let freqs: Vec<f64> = record.counts().iter().map(|&c| c as f64 / total).collect();
    invert_design(&a, &freqs, plan)
}

/// Noiseless entry point: reconstruct directly from exact per-setting
/// probabilities (what [`simulate_counts`] would produce in expectation,
/// already normalized). Round trips any physical state to trace distance
/// below 1e−6.
pub fn reconstruct_from_probabilities(
    plan: &TomographyPlan,
    probabilities: &[f64],
) -> Result<TwoQubitState, TomoError> {
    if probabilities.len() != plan.settings().len() {
        return Err(TomoError::BadRecord(format!(
            "expected {} probabilities, got {}",
            plan.settings().len(),
            probabilities.len()
        )));
    }
    let a = checked_design(plan)?;
    invert_design(&a, probabilities, plan)
}

fn checked_design(plan: &TomographyPlan) -> Result<SMatrix<Complex64, 16, 16>, TomoError> {
    let diag = plan.diagnostics();
    if diag.gram_determinant.is_nan() || diag.gram_determinant <= GRAM_DET_FLOOR {
        return Err(TomoError::SingularDesign { gram_determinant: diag.gram_determinant });
    }
    Ok(design_matrix(plan.settings()))
}

fn invert_design(
    a: &SMatrix<Complex64, 16, 16>,
    values: &[f64],
    plan: &TomographyPlan,
) -> Result<TwoQubitState, TomoError> {
    let rhs = SVector::<Complex64, 16>::from_fn(|i, _| Complex64::new(values[i], 0.0));
    let v_rho = a.lu().solve(&rhs).ok_or(TomoError::SingularDesign {
        gram_determinant: plan.diagnostics().gram_determinant,
    })?;
    let raw = Matrix4::from_fn(|j, k| v_rho[4 * j + k]);
    let sym = (raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(project_physical(&sym))
}

/// Row i holds the row-major entries of P_iᵀ, so that A·vec(ρ) gives the 16
/// probabilities Tr(P_i ρ) for vec(ρ) in row-major order.
fn design_matrix(settings: &[AnalyzerSetting]) -> SMatrix<Complex64, 16, 16> {
    let projectors: Vec<Matrix4<Complex64>> = settings.iter().map(|s| s.projector()).collect();
    SMatrix::from_fn(|i, m| {
        let (j, k) = (m / 4, m % 4);
        projectors[i][(k, j)]
    })
}

/// Everything produced by one simulated tomography run.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// The state predicted from the link model.
    pub theory: TwoQubitState,
    /// The state recovered from (simulated) measurement.
    pub reconstructed: TwoQubitState,
    /// The raw counts, when counting noise was simulated.
    pub record: Option<CountRecord>,
    /// Entanglement metrics of the reconstructed state.
    pub metrics: MetricReport,
    /// Uhlmann fidelity between reconstructed and theoretical states.
    pub fidelity_to_theory: f64,
}

/// Full pipeline at one DGD value: predict the state from the link
/// configuration, simulate counting, reconstruct, and compare.
pub fn run_experiment(
    config: &LinkConfig,
    tau_ps: f64,
    plan: &TomographyPlan,
) -> Result<ExperimentReport, TomoError> {
    let theory = build_density_matrix(compute_r(config, tau_ps)?)?;
    let record = simulate_counts(&theory, plan);
    let reconstructed = reconstruct(&record)?;
    Ok(ExperimentReport {
        metrics: metrics(&reconstructed),
        fidelity_to_theory: fidelity(&reconstructed, &theory),
        theory,
        reconstructed,
        record: Some(record),
    })
}

/// As [`run_experiment`], but with exact expected frequencies instead of
/// Poisson draws — isolates reconstruction bias from counting noise.
pub fn run_experiment_noiseless(
    config: &LinkConfig,
    tau_ps: f64,
    plan: &TomographyPlan,
) -> Result<ExperimentReport, TomoError> {
    let theory = build_density_matrix(compute_r(config, tau_ps)?)?;
    let probs: Vec<f64> =
        plan.settings().iter().map(|s| coincidence_probability(&theory, s)).collect();
    let reconstructed = reconstruct_from_probabilities(plan, &probs)?;
    Ok(ExperimentReport {
        metrics: metrics(&reconstructed),
        fidelity_to_theory: fidelity(&reconstructed, &theory),
        theory,
        reconstructed,
        record: None,
    })
}
