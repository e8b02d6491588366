//! Independent time-domain evaluation of R(τ).
//!
//! This route never touches the frequency-domain quadrature. The two channel
//! impulse responses h_A, h_B and the pump envelope A(t) are synthesized by
//! direct Fourier sums, the joint two-photon amplitude
//! g(t_a, t_b) = ∫ A(t) h_A(t_a − t) h_B(t_b − t) dt is assembled on a time
//! grid as a matrix product, and R(τ) is read off as the normalized overlap
//! of g with its copy shifted by τ along the A axis:
//!
//! ```text
//! R(τ) = Σ g(t_a − τ/2, t_b) g*(t_a + τ/2, t_b) / Σ |g(t_a, t_b)|².
//! ```
//!
//! The pump's zero-phase field spectrum enters on the sum-frequency axis:
//! Ã(s) = |Ẽ_p(s/2)|², so the envelope weight seen by the photon pair at
//! mean detuning s/2 is the squared power spectrum, matching the
//! frequency-domain pump weight.
//!
//! The two routes share nothing but the spectral shape definitions, so their
//! agreement (typically 1e−7 or better on the default grids) checks both.

use super::{LinkConfig, PmdError};
use crate::spectra::SpectralShape;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU as TWO_PI;

/// Spectral level down to which the field tails are kept when synthesizing
/// time-domain samples.
const FIELD_SUPPORT_EPS: f64 = 1e-14;
/// Gauss–Legendre nodes for each Fourier synthesis integral.
const FIELD_NODES: usize = 2_049;
/// Hard cap on time samples per axis; beyond this the O(N³) assembly of g
/// stops being a sane cross-check.
const MAX_SAMPLES: usize = 2_500;

/// Sampling grid for the time-domain route.
///
/// The grid is centered on t = 0 and covers `[-half_span_ps, half_span_ps]`.
/// The step is adjusted downward so that τ/2 lands on an integer number of
/// samples, which keeps the shifted overlap exact instead of interpolated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGridSpec {
    pub step_ps: f64,
    pub half_span_ps: f64,
}

impl TimeGridSpec {
    /// A grid adequate for `config` at delay `tau_ps`: eight samples per
    /// period of the widest spectrum, and a span covering five reciprocal
    /// bandwidths of the narrowest one plus the shift itself.
    pub fn auto(config: &LinkConfig, tau_ps: f64) -> Self {
        Self {
            step_ps: 1.0 / (8.0 * config.max_fwhm_thz()),
            half_span_ps: 5.0 / config.min_fwhm_thz() + 0.5 * tau_ps.abs(),
        }
    }
}

/// R(τ) by direct time-domain construction of the joint amplitude.
///
/// Slow (O(N³) in the grid size) but structurally independent of
/// [`compute_r`](super::compute_r); intended as an oracle and convergence
/// check, not for production sweeps.
pub fn time_domain_r(
    config: &LinkConfig,
    tau_ps: f64,
    grid: &TimeGridSpec,
) -> Result<Complex64, PmdError> {
    if !(grid.step_ps > 0.0 && grid.step_ps.is_finite())
        || !(grid.half_span_ps > 0.0 && grid.half_span_ps.is_finite())
    {
        return Err(PmdError::BadQuadrature(format!(
            "time grid must have positive finite step and span, got step {} ps, half-span {} ps",
            grid.step_ps, grid.half_span_ps
        )));
    }

    let abs_tau = tau_ps.abs();
    // Snap the step so the shift is an integer number of samples. The ceil
    // guarantees the snapped step never exceeds the requested one.
    let (half_shift, dt) = if abs_tau > 0.0 {
        let s = (abs_tau / (2.0 * grid.step_ps)).ceil() as usize;
        (s, abs_tau / (2.0 * s as f64))
    } else {
        (0, grid.step_ps)
    };

    let max_step = 1.0 / (6.0 * config.max_fwhm_thz());
    if dt > max_step {
        return Err(PmdError::GridTooCoarse { step_ps: grid.step_ps, max_step_ps: max_step });
    }
    let span = 2.0 * grid.half_span_ps;
    let min_span = 6.0 / config.min_fwhm_thz();
    if span < min_span {
        return Err(PmdError::GridTooShort { span_ps: span, min_span_ps: min_span });
    }

    let n = (span / dt).floor() as usize + 1;
    if n < 2 * half_shift + 3 {
        return Err(PmdError::GridTooShort {
            span_ps: span,
            min_span_ps: (2 * half_shift + 2) as f64 * dt,
        });
    }
    if n > MAX_SAMPLES {
        return Err(PmdError::BadQuadrature(format!(
            "time grid needs {n} samples per axis (cap {MAX_SAMPLES}); use a coarser step or a \
             smaller span"
        )));
    }

    // Times t_k = (k − (N−1)/2)·Δt; field responses are needed at all
    // pairwise differences t_m − t_a = (m − a)·Δt.
    let center = 0.5 * (n - 1) as f64;
    let times: Vec<f64> = (0..n).map(|k| (k as f64 - center) * dt).collect();
    let diffs: Vec<f64> = (0..2 * n - 1).map(|k| (k as f64 - (n as f64 - 1.0)) * dt).collect();

    let h_a = filter_response(&config.filter_a, &diffs);
    let h_b = filter_response(&config.filter_b, &diffs);
    let a_env = pump_envelope(&config.pump, &times);

    // g = U·V with U[a, m] = h_A*(t_m − t_a), V[m, b] = A(t_m)·h_B*(t_m − t_b);
    // the overall Δt and synthesis constants cancel in the normalized ratio.
    let u = DMatrix::from_fn(n, n, |a, m| h_a[m + n - 1 - a].conj());
    let v = DMatrix::from_fn(n, n, |m, b| a_env[m] * h_b[m + n - 1 - b].conj());
    let g = u * v;

    let mut num = Complex64::ZERO;
    for a in half_shift..n - half_shift {
        // Σ_b g[a − s, b]·g*[a + s, b]
        num += g.row(a + half_shift).dotc(&g.row(a - half_shift));
    }
    let den = g.norm_squared();
    let r = num / den;
    Ok(if tau_ps < 0.0 { r.conj() } else { r })
}

/// h(t) = ∫ H(f) e^{−i2πft} df over the truncated support of the (field)
/// amplitude response.
fn filter_response(shape: &SpectralShape, times: &[f64]) -> Vec<Complex64> {
    let w = shape.support_halfwidth(FIELD_SUPPORT_EPS) / 1e3;
    let c = shape.center_ghz() / 1e3;
    fourier_sum(times, c - w, c + w, |f_thz| shape.amplitude(f_thz * 1e3))
}

/// A(t) = ∫ Ã(s) e^{−i2πst} ds with Ã(s) = |Ẽ_p(s/2)|², i.e. the pump power
/// spectrum stretched onto the sum-frequency axis.
fn pump_envelope(shape: &SpectralShape, times: &[f64]) -> Vec<Complex64> {
    let w = shape.support_halfwidth(FIELD_SUPPORT_EPS) / 1e3;
    let c = shape.center_ghz() / 1e3;
    fourier_sum(times, 2.0 * (c - w), 2.0 * (c + w), |s_thz| {
        shape.power_transmittivity(s_thz * 500.0)
    })
}

fn fourier_sum(
    times: &[f64],
    lo_thz: f64,
    hi_thz: f64,
    spectrum: impl Fn(f64) -> f64,
) -> Vec<Complex64> {
    let rule = super::gauss_legendre_rule(FIELD_NODES);
    let half = 0.5 * (hi_thz - lo_thz);
    let mid = 0.5 * (hi_thz + lo_thz);
    let samples: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (mid + half * x, w * half)).collect();
    times
        .iter()
        .map(|&t| {
            let mut acc = Complex64::ZERO;
            for &(f, w) in &samples {
                let (s, c) = (-TWO_PI * f * t).sin_cos();
                let a = w * spectrum(f);
                acc += Complex64::new(a * c, a * s);
            }
            acc
        })
        .collect()
}
