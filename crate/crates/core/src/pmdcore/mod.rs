//! The pair-coherence function R(τ) and the output density matrix.
//!
//! A polarization-entangled pair is filtered into two channels with field
//! transfer functions H_A, H_B; the pump contributes a spectral weight at the
//! mean detuning of the two photons (energy conservation). When the arm
//! toward A carries a differential group delay τ between its principal
//! polarization states, the surviving two-photon coherence is
//!
//! ```text
//! R(τ) = κ ∫ |H_A(f_a)|² G(f_a) e^{+i2πf_a τ} df_a,
//! G(f_a) = ∫ |H_B(f_b)|² · pump_weight((f_a+f_b)/2) df_b,
//! ```
//!
//! with κ chosen so R(0) = 1. The two-qubit polarization state is then fully
//! determined by R: the hh/vv populations stay at 1/2 and the hh–vv coherence
//! is R(τ)/2.
//!
//! Internally all frequencies are THz and times are ps, so the Fourier phase
//! 2π·f·τ is dimensionless without unit constants; the public API speaks GHz
//! (bandwidths) and ps.

mod batch;
mod time_domain;

pub use time_domain::{time_domain_r, TimeGridSpec};

use crate::qinfo::TwoQubitState;
use crate::spectra::SpectralShape;
use gauss_quad::GaussLegendre;
use nalgebra::Matrix4;
use num_complex::Complex64;
use std::f64::consts::TAU as TWO_PI;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PmdError {
    #[error("quadrature spec invalid: {0}")]
    BadQuadrature(String),
    #[error(
        "truncated spectral supports do not overlap (eps = {eps:.1e}): the filters and the \
         pump-allowed band share no frequency range"
    )]
    SupportDegenerate { eps: f64 },
    #[error("coherence magnitude |r| = {magnitude} exceeds 1")]
    CoherenceOutOfRange { magnitude: f64 },
    #[error("tau grid must be uniformly spaced; point {index} deviates from the uniform step")]
    NonUniformGrid { index: usize },
    #[error("empty tau grid")]
    EmptyGrid,
    #[error(
        "time grid too coarse for the widest spectrum: step {step_ps} ps exceeds the Nyquist \
         bound {max_step_ps:.4} ps"
    )]
    GridTooCoarse { step_ps: f64, max_step_ps: f64 },
    #[error(
        "time grid too short for the narrowest spectrum: span {span_ps} ps is below the \
         required {min_span_ps:.1} ps"
    )]
    GridTooShort { span_ps: f64, min_span_ps: f64 },
}

/// Controls for the frequency-domain quadrature.
///
/// The defaults resolve every shape in this crate's working range to better
/// than 1e−10; they are exposed for convergence studies, not because typical
/// runs need tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per 1-D integral (the outer node count escalates
    /// automatically with τ to track the oscillation e^{i2πfτ}).
    pub nodes_per_axis: usize,
    /// Integrand factors below this relative level are treated as zero when
    /// truncating integration domains.
    pub truncation_eps: f64,
    /// Sign convention of the Fourier kernel e^{+i2πfτ}. Only +1 is
    /// supported; the field exists so serialized configurations state the
    /// convention explicitly.
    pub kernel_sign: i8,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_axis: 513, truncation_eps: 1e-12, kernel_sign: 1 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), PmdError> {
        if self.nodes_per_axis < 65 {
            return Err(PmdError::BadQuadrature(format!(
                "nodes_per_axis must be at least 65, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps < 1e-3) {
            return Err(PmdError::BadQuadrature(format!(
                "truncation_eps must be in (0, 1e-3), got {:e}",
                self.truncation_eps
            )));
        }
        if self.kernel_sign != 1 {
            return Err(PmdError::BadQuadrature(format!(
                "kernel_sign must be +1, got {}",
                self.kernel_sign
            )));
        }
        Ok(())
    }
}

/// The full physical scenario: both channel filters, the pump, and the
/// numerical controls.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub filter_a: SpectralShape,
    pub filter_b: SpectralShape,
    pub pump: SpectralShape,
    pub quadrature: QuadratureSpec,
}

impl LinkConfig {
    pub fn new(filter_a: SpectralShape, filter_b: SpectralShape, pump: SpectralShape) -> Self {
        Self { filter_a, filter_b, pump, quadrature: QuadratureSpec::default() }
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureSpec) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// Symmetric named constructor for the common case: both channel filters
    /// of order `n` and bandwidth `b_ch_ghz`, pump of order `n_pump` and
    /// bandwidth `b_p_ghz`, everything centered.
    pub fn symmetric(
        n: u32,
        b_ch_ghz: f64,
        n_pump: u32,
        b_p_ghz: f64,
    ) -> Result<Self, crate::spectra::SpectraError> {
        let ch = SpectralShape::new(n, b_ch_ghz)?;
        Ok(Self::new(ch, ch, SpectralShape::new(n_pump, b_p_ghz)?))
    }

    fn min_channel_fwhm_thz(&self) -> f64 {
        self.filter_a.fwhm_ghz().min(self.filter_b.fwhm_ghz()) / 1e3
    }

    fn min_fwhm_thz(&self) -> f64 {
        self.min_channel_fwhm_thz().min(self.pump.fwhm_ghz() / 1e3)
    }

    fn max_fwhm_thz(&self) -> f64 {
        self.filter_a.fwhm_ghz().max(self.filter_b.fwhm_ghz()).max(self.pump.fwhm_ghz()) / 1e3
    }
}

/// Extra outer nodes requested per oscillation cycle of e^{i2πfτ} across the
/// integration window.
const NODES_PER_CYCLE: f64 = 10.0;
/// Outer node count escalates by doubling at most this many times.
const MAX_ESCALATIONS: u32 = 6;

/// One fully precomputed outer quadrature rule: nodes f_i (THz) and
/// coefficients w_i·|H_A(f_i)|²·G(f_i).
struct Level {
    degree: usize,
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

/// Precomputed evaluator of R(τ) for one [`LinkConfig`].
///
/// Construction validates the configuration, truncates all integration
/// domains to the `truncation_eps` supports, performs the τ-independent inner
/// integrals, and fixes the normalization so that `eval(0.0)` returns exactly
/// 1 + 0i. Evaluation at any τ is then a single weighted exponential sum;
/// node counts escalate automatically (and are cached) as |τ| grows.
pub struct CoherenceKernel {
    filter_a: SpectralShape,
    filter_b: SpectralShape,
    pump: SpectralShape,
    base_nodes: usize,
    /// Outer integration window over f_a, THz.
    outer_lo: f64,
    outer_hi: f64,
    /// B-filter support window over f_b, THz.
    b_lo: f64,
    b_hi: f64,
    /// Pump-allowed window expressed in f_a + f_b, THz.
    sum_lo: f64,
    sum_hi: f64,
    /// Σ w_i·F_i at the base level; divides every evaluation so R(0) is
    /// exactly 1.
    norm: f64,
    levels: Mutex<Vec<Level>>,
    min_channel_fwhm_thz: f64,
    min_fwhm_thz: f64,
}

impl CoherenceKernel {
    pub fn new(config: &LinkConfig) -> Result<Self, PmdError> {
        config.quadrature.validate()?;
        let eps = config.quadrature.truncation_eps;
        let base_nodes = config.quadrature.nodes_per_axis;

        let wa = config.filter_a.support_halfwidth(eps) / 1e3;
        let ca = config.filter_a.center_ghz() / 1e3;
        let wb = config.filter_b.support_halfwidth(eps) / 1e3;
        let cb = config.filter_b.center_ghz() / 1e3;
        // The pump weight is the squared power spectrum, so it falls to eps
        // where the power spectrum falls to sqrt(eps).
        let wp = config.pump.support_halfwidth(eps.sqrt()) / 1e3;
        let cp = config.pump.center_ghz() / 1e3;

        let (b_lo, b_hi) = (cb - wb, cb + wb);
        // (f_a + f_b)/2 must lie within the pump window.
        let (sum_lo, sum_hi) = (2.0 * (cp - wp), 2.0 * (cp + wp));
        // f_a values for which the inner f_b window is nonempty.
        let outer_lo = (ca - wa).max(sum_lo - b_hi);
        let outer_hi = (ca + wa).min(sum_hi - b_lo);
        if outer_lo >= outer_hi {
            return Err(PmdError::SupportDegenerate { eps });
        }

        let mut kernel = Self {
            filter_a: config.filter_a,
            filter_b: config.filter_b,
            pump: config.pump,
            base_nodes,
            outer_lo,
            outer_hi,
            b_lo,
            b_hi,
            sum_lo,
            sum_hi,
            norm: 0.0,
            levels: Mutex::new(Vec::new()),
            min_channel_fwhm_thz: config.min_channel_fwhm_thz(),
            min_fwhm_thz: config.min_fwhm_thz(),
        };
        let base = kernel.build_level(base_nodes);
        let norm: f64 = base.coeffs.iter().sum();
        if !(norm.is_finite() && norm > 0.0) {
            // Windows intersect geometrically but the integrand underflows
            // everywhere: physically disjoint spectra.
            return Err(PmdError::SupportDegenerate { eps });
        }
        kernel.norm = norm;
        kernel.levels.get_mut().unwrap().push(base);
        Ok(kernel)
    }

    /// Inner integral G(f_a) = ∫ |H_B|²·pump_weight((f_a+f_b)/2) df_b over
    /// the truncated window, in THz measure; zero when the window is empty.
    fn inner_integral(&self, f_a: f64) -> f64 {
        let lo = self.b_lo.max(self.sum_lo - f_a);
        let hi = self.b_hi.min(self.sum_hi - f_a);
        if lo >= hi {
            return 0.0;
        }
        let rule = gauss_legendre_rule(self.base_nodes);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for &(x, w) in rule.iter() {
            let f_b = mid + half * x;
            let p_b = self.filter_b.power_transmittivity(f_b * 1e3);
            let p_pump = self.pump.pump_weight(0.5 * (f_a + f_b) * 1e3);
            acc += w * p_b * p_pump;
        }
        acc * half
    }

    /// Full integrand of the outer integral at f_a (THz):
    /// |H_A(f_a)|²·G(f_a).
    fn integrand(&self, f_a: f64) -> f64 {
        self.filter_a.power_transmittivity(f_a * 1e3) * self.inner_integral(f_a)
    }

    fn build_level(&self, degree: usize) -> Level {
        let rule = gauss_legendre_rule(degree);
        let half = 0.5 * (self.outer_hi - self.outer_lo);
        let mid = 0.5 * (self.outer_hi + self.outer_lo);
        let mut nodes = Vec::with_capacity(degree);
        let mut coeffs = Vec::with_capacity(degree);
        for &(x, w) in rule.iter() {
            let f_a = mid + half * x;
            nodes.push(f_a);
            coeffs.push(w * half * self.integrand(f_a));
        }
        Level { degree, nodes, coeffs }
    }

    /// Outer node count needed to resolve the oscillation at this τ.
    fn degree_for(&self, tau_ps: f64) -> usize {
        let cycles = (self.outer_hi - self.outer_lo) * tau_ps.abs();
        let needed = NODES_PER_CYCLE * cycles;
        let mut degree = self.base_nodes;
        let mut level = 0;
        while (degree as f64) < needed && level < MAX_ESCALATIONS {
            degree *= 2;
            level += 1;
        }
        degree
    }

    /// R(τ) for a DGD of `tau_ps` picoseconds. Negative τ is allowed and
    /// satisfies R(−τ) = R(τ)*.
    pub fn eval(&self, tau_ps: f64) -> Complex64 {
        let degree = self.degree_for(tau_ps);
        let mut levels = self.levels.lock().unwrap();
        if !levels.iter().any(|l| l.degree == degree) {
            let built = self.build_level(degree);
            levels.push(built);
        }
        let level = levels.iter().find(|l| l.degree == degree).unwrap();
        let (mut re, mut im) = (0.0, 0.0);
        for (&f, &c) in level.nodes.iter().zip(&level.coeffs) {
            let (s, co) = (TWO_PI * f * tau_ps).sin_cos();
            re += c * co;
            im += c * s;
        }
        Complex64::new(re / self.norm, im / self.norm)
    }

    /// R on a uniform τ grid via a chirp-z transform; see
    /// [`compute_r_batch`].
    pub fn eval_batch(&self, taus_ps: &[f64]) -> Result<Vec<Complex64>, PmdError> {
        batch::eval_batch(self, taus_ps)
    }

    /// The marginal kernel G(f_a) at a detuning in GHz, integrated over f_b
    /// in GHz measure.
    pub fn marginal(&self, f_a_ghz: f64) -> f64 {
        self.inner_integral(f_a_ghz / 1e3) * 1e3
    }

    pub(crate) fn outer_window_thz(&self) -> (f64, f64) {
        (self.outer_lo, self.outer_hi)
    }

    pub(crate) fn min_channel_fwhm_thz(&self) -> f64 {
        self.min_channel_fwhm_thz
    }

    pub(crate) fn min_fwhm_thz(&self) -> f64 {
        self.min_fwhm_thz
    }
}

fn gauss_legendre_rule(degree: usize) -> Box<[(f64, f64)]> {
    let degree = std::num::NonZeroUsize::new(degree).expect("quadrature degrees are positive");
    GaussLegendre::new(degree).into_node_weight_pairs()
}

/// The coherence function R(τ) of the link at a single DGD value (ps).
///
/// For repeated evaluations on one configuration, construct a
/// [`CoherenceKernel`] once instead.
pub fn compute_r(config: &LinkConfig, tau_ps: f64) -> Result<Complex64, PmdError> {
    Ok(CoherenceKernel::new(config)?.eval(tau_ps))
}

/// R(τ) over a uniform τ grid (ps), evaluated in O(M log M) after one kernel
/// precomputation via a chirp-z transform. Agrees with [`compute_r`]
/// pointwise to better than 1e−8 absolute.
///
/// A single-point grid is accepted and falls back to pointwise evaluation
/// (the uniform-spacing requirement is vacuous there).
pub fn compute_r_batch(config: &LinkConfig, taus_ps: &[f64]) -> Result<Vec<Complex64>, PmdError> {
    CoherenceKernel::new(config)?.eval_batch(taus_ps)
}

/// G(f_a): the inner spectral integral ∫|H_B(f_b)|²·pump_weight((f_a+f_b)/2) df_b
/// over GHz detunings, truncated to the configured support.
pub fn marginal_kernel(config: &LinkConfig, f_a_ghz: f64) -> Result<f64, PmdError> {
    Ok(CoherenceKernel::new(config)?.marginal(f_a_ghz))
}

/// The output polarization density matrix for a pair coherence `r`: hh/vv
/// populations of 1/2 and an hh–vv coherence of r/2, in basis
/// (hh, hv, vh, vv).
///
/// `|r|` may exceed 1 by at most 1e−9 (quadrature roundoff); such values are
/// rescaled onto the unit circle so the output is exactly positive
/// semidefinite.
pub fn build_density_matrix(r: Complex64) -> Result<TwoQubitState, PmdError> {
    let magnitude = r.norm();
    if magnitude > 1.0 + 1e-9 {
        return Err(PmdError::CoherenceOutOfRange { magnitude });
    }
    let r = if magnitude > 1.0 { r / magnitude } else { r };
    let half = Complex64::new(0.5, 0.0);
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = half;
    rho[(3, 3)] = half;
    rho[(0, 3)] = half * r;
    rho[(3, 0)] = half * r.conj();
    Ok(TwoQubitState::from_valid(rho))
}
