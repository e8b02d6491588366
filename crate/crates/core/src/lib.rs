//! Simulation of polarization-entanglement degradation caused by polarization
//! mode dispersion (PMD) in one arm of a fiber entanglement-distribution link.
//!
//! A photon-pair source feeds two WDM channels through super-Gaussian filters;
//! one path adds a differential group delay τ between the principal
//! polarization states. The surviving two-photon coherence is a single complex
//! number R(τ), obtained by a spectral overlap integral, and the polarization
//! density matrix, concurrence, and maximal CHSH value all follow from it.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectra`] — super-Gaussian filter/pump spectral models;
//! - [`pmdcore`] — the R(τ) coherence integral (quadrature, FFT batching, and
//!   an independent time-domain oracle) and the density-matrix builder;
//! - [`qinfo`] — general two-qubit metrics: concurrence, CHSH, fidelity;
//! - [`tomosim`] — simulated 16-setting coincidence tomography;
//! - [`analysis`] — figure-level products: C(τ) curves, τ_dec, pump sweeps.

pub mod analysis;
pub mod pmdcore;
pub mod qinfo;
pub mod spectra;
pub mod tomosim;

pub use analysis::{concurrence_curve, find_tau_dec, mixed_shape_sweep, pump_sweep, DecThreshold};
pub use pmdcore::{
    build_density_matrix, compute_r, compute_r_batch, time_domain_r, CoherenceKernel, LinkConfig,
    QuadratureSpec, TimeGridSpec,
};
pub use qinfo::{concurrence, fidelity, max_chsh, purity, MetricReport, TwoQubitState};
pub use spectra::SpectralShape;
pub use tomosim::{
    default_plan, reconstruct, run_experiment, simulate_counts, CountRecord, TomographyPlan,
};
