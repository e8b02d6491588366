//! Cross-validation of the frequency-domain R(τ) against the independent
//! time-domain route, which builds the two-photon amplitude on a sampled time
//! grid and applies the arm-A delay as a discrete shift. The two paths share
//! no numerical machinery beyond the spectral shape definitions, so agreement
//! is strong evidence that both implement the same physics.
//!
//! A few values are additionally frozen as literals so an accidental change
//! to *both* routes at once still trips a test.

use num_complex::Complex64;
use pmdsim_core::pmdcore::{compute_r, time_domain_r, LinkConfig, TimeGridSpec};
use pmdsim_core::spectra::SpectralShape;

#[test]
fn frozen_super_gaussian_values() {
    // Third-order 130/120 GHz link at τ = 10 ps sits in the first negative
    // lobe of R.
    let config = LinkConfig::symmetric(3, 130.0, 3, 120.0).unwrap();
    let freq = compute_r(&config, 10.0).unwrap();
    assert!((freq.re - (-0.115_368_7)).abs() < 2e-6, "freq = {freq}");
    assert!(freq.im.abs() < 1e-9);
    let time = time_domain_r(&config, 10.0, &TimeGridSpec::auto(&config, 10.0)).unwrap();
    assert!((time - freq).norm() < 1e-4, "time = {time}, freq = {freq}");

    // Fourth-order channels with a narrow pump: the narrow pump slows the
    // decay, and τ = 10 ps is still inside the first positive lobe.
    let config = LinkConfig::symmetric(4, 100.0, 4, 25.0).unwrap();
    let freq = compute_r(&config, 10.0).unwrap();
    assert!((freq.re - 0.136_306_0).abs() < 2e-6, "freq = {freq}");
    let time = time_domain_r(&config, 10.0, &TimeGridSpec::auto(&config, 10.0)).unwrap();
    assert!((time - freq).norm() < 1e-4);
}

#[test]
fn frozen_off_center_complex_value() {
    let config = LinkConfig::new(
        SpectralShape::with_center(2, 100.0, 20.0).unwrap(),
        SpectralShape::with_center(2, 110.0, -10.0).unwrap(),
        SpectralShape::with_center(1, 60.0, 5.0).unwrap(),
    );
    let freq = compute_r(&config, 4.0).unwrap();
    let expected = Complex64::new(0.668_642, 0.367_589);
    assert!((freq - expected).norm() < 2e-6, "freq = {freq}");
    let time = time_domain_r(&config, 4.0, &TimeGridSpec::auto(&config, 4.0)).unwrap();
    assert!((time - freq).norm() < 1e-6, "time = {time}, freq = {freq}");
}

#[test]
fn routes_agree_on_spot_checks_of_the_config_matrix() {
    // A fast subset of the full order/ratio/delay matrix; the complete sweep
    // runs in the acceptance suite.
    for order in [1u32, 4] {
        for ratio in [0.25, 1.0] {
            let config = LinkConfig::symmetric(order, 100.0, order, 100.0 * ratio).unwrap();
            let tau = 5.0;
            let freq = compute_r(&config, tau).unwrap();
            let time = time_domain_r(&config, tau, &TimeGridSpec::auto(&config, tau)).unwrap();
            assert!(
                (time - freq).norm() < 1e-4,
                "order={order} ratio={ratio}: time={time}, freq={freq}"
            );
        }
    }
}

#[test]
fn manual_grid_refinement_converges_toward_frequency_route() {
    let config = LinkConfig::symmetric(2, 100.0, 2, 50.0).unwrap();
    let freq = compute_r(&config, 6.0).unwrap();
    let coarse = TimeGridSpec { step_ps: 1.0, half_span_ps: 60.0 };
    let fine = TimeGridSpec { step_ps: 0.5, half_span_ps: 80.0 };
    let r_coarse = time_domain_r(&config, 6.0, &coarse).unwrap();
    let r_fine = time_domain_r(&config, 6.0, &fine).unwrap();
    assert!((r_fine - freq).norm() <= (r_coarse - freq).norm() + 1e-12);
    assert!((r_fine - freq).norm() < 1e-4);
}
