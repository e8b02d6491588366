//! Batched evaluation of R on uniform τ grids.
//!
//! The outer Fourier-type integral is resampled onto a uniform frequency
//! grid (trapezoid weights), after which R at M uniformly spaced delays is a
//! partial non-integer-stride DFT, evaluated with Bluestein's chirp-z
//! identity jk = (j² + k² − (k−j)²)/2 and two FFTs. Cost is
//! O((Nf+M)·log(Nf+M)) instead of O(Nf·M).

use super::{CoherenceKernel, PmdError};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Relative tolerance for the uniform-spacing check on the τ grid.
const GRID_TOL: f64 = 1e-9;
/// Bounds on the resampled frequency grid size.
const MIN_FREQ_NODES: usize = 2_049;
const MAX_FREQ_NODES: usize = 262_145;

pub(super) fn eval_batch(
    kernel: &CoherenceKernel,
    taus_ps: &[f64],
) -> Result<Vec<Complex64>, PmdError> {
    if taus_ps.is_empty() {
        return Err(PmdError::EmptyGrid);
    }
    if taus_ps.len() == 1 {
        return Ok(vec![kernel.eval(taus_ps[0])]);
    }
    let m = taus_ps.len();
    let tau0 = taus_ps[0];
    let dtau = (taus_ps[m - 1] - tau0) / (m - 1) as f64;
    let max_abs = taus_ps.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let tol = GRID_TOL * max_abs.max(1.0);
    for (k, &t) in taus_ps.iter().enumerate() {
        if (t - (tau0 + k as f64 * dtau)).abs() > tol {
            return Err(PmdError::NonUniformGrid { index: k });
        }
    }

    // Uniform frequency resampling. The step must resolve both the shapes
    // themselves and the largest delay present (so that the trapezoid rule's
    // aliases fall well outside the band of interest).
    let (f_lo, f_hi) = kernel.outer_window_thz();
    let span = f_hi - f_lo;
    let period = max_abs + 16.0 / kernel.min_channel_fwhm_thz();
    let df_target = (1.0 / period).min(kernel.min_fwhm_thz() / 64.0);
    let nf = ((span / df_target).ceil() as usize + 1).clamp(MIN_FREQ_NODES, MAX_FREQ_NODES);
    let df = span / (nf - 1) as f64;

    // Trapezoid coefficients of the normalized integrand.
    let mut coeffs = Vec::with_capacity(nf);
    for j in 0..nf {
        let f = f_lo + j as f64 * df;
        let w = if j == 0 || j == nf - 1 { 0.5 } else { 1.0 };
        coeffs.push(w * df * kernel.integrand(f));
    }
    let total: f64 = coeffs.iter().sum();
    // The kernel constructor guarantees a strictly positive integral; the
    // trapezoid resampling of the same integrand cannot lose it.
    debug_assert!(total > 0.0);
    for c in &mut coeffs {
        *c /= total;
    }

    Ok(czt_sum(&coeffs, f_lo, df, tau0, dtau, m))
}

/// Σ_j c_j · e^{i2π(f0 + jΔf)(τ0 + kΔτ)} for k = 0..m, via chirp-z.
fn czt_sum(coeffs: &[f64], f0: f64, df: f64, tau0: f64, dtau: f64, m: usize) -> Vec<Complex64> {
    let nf = coeffs.len();
    let phi_half = PI * df * dtau; // φ/2 with φ = 2πΔfΔτ
    let len = (nf + m).next_power_of_two();

    let mut x = vec![Complex64::ZERO; len];
    for (j, &c) in coeffs.iter().enumerate() {
        let jf = j as f64;
        // a_j·e^{iφj²/2} with a_j = c_j·e^{i2πjΔfτ0}
        let phase = 2.0 * PI * jf * df * tau0 + phi_half * jf * jf;
        x[j] = Complex64::from_polar(c, phase);
    }
    let mut y = vec![Complex64::ZERO; len];
    for mm in -(nf as i64 - 1)..=(m as i64 - 1) {
        let mf = mm as f64;
        let idx = mm.rem_euclid(len as i64) as usize;
        y[idx] = Complex64::from_polar(1.0, -phi_half * mf * mf);
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    fft.process(&mut x);
    fft.process(&mut y);
    for (xi, yi) in x.iter_mut().zip(&y) {
        *xi *= *yi;
    }
    ifft.process(&mut x);

    (0..m)
        .map(|k| {
            let kf = k as f64;
            let tau_k = tau0 + kf * dtau;
            let phase = 2.0 * PI * f0 * tau_k + phi_half * kf * kf;
            Complex64::from_polar(1.0 / len as f64, phase) * x[k]
        })
        .collect()
}
