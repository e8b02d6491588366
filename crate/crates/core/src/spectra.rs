//! Super-Gaussian spectral models for channel filters and the pump.
//!
//! A single shape family covers everything: the power transmittivity
//! `exp(−ln2·(2(f−c)/B)^(2n))` is Gaussian at order n=1 and approaches a flat
//! rectangular passband as n grows. All bandwidths are the FWHM of the *power*
//! spectrum (the 3 dB bandwidth an optical spectrum analyzer would report),
//! and all frequencies are detunings in GHz from the nominal channel center;
//! absolute optical carriers never enter the model.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("super-Gaussian order must be >= 1")]
    ZeroOrder,
    #[error("bandwidth must be positive and finite, got {0} GHz")]
    BadBandwidth(f64),
    #[error("center detuning must be finite, got {0} GHz")]
    BadCenter(f64),
}

/// Super-Gaussian power spectrum of a filter or of the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralShape {
    order: u32,
    fwhm_ghz: f64,
    center_ghz: f64,
}

impl SpectralShape {
    /// Shape centered on the nominal channel frequency (zero detuning).
    pub fn new(order: u32, fwhm_ghz: f64) -> Result<Self, SpectraError> {
        Self::with_center(order, fwhm_ghz, 0.0)
    }

    /// Shape offset by `center_ghz` from the nominal center, for misalignment
    /// studies.
    pub fn with_center(order: u32, fwhm_ghz: f64, center_ghz: f64) -> Result<Self, SpectraError> {
        if order < 1 {
            return Err(SpectraError::ZeroOrder);
        }
        if !(fwhm_ghz.is_finite() && fwhm_ghz > 0.0) {
            return Err(SpectraError::BadBandwidth(fwhm_ghz));
        }
        if !center_ghz.is_finite() {
            return Err(SpectraError::BadCenter(center_ghz));
        }
        Ok(Self { order, fwhm_ghz, center_ghz })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// FWHM of the power spectrum, GHz.
    pub fn fwhm_ghz(&self) -> f64 {
        self.fwhm_ghz
    }

    /// Center detuning, GHz.
    pub fn center_ghz(&self) -> f64 {
        self.center_ghz
    }

    /// Power transmittivity |H(f)|² at detuning `f_ghz`: exactly 1 at the
    /// center and exactly 1/2 at center ± fwhm/2.
    pub fn power_transmittivity(&self, f_ghz: f64) -> f64 {
        let u = 2.0 * (f_ghz - self.center_ghz) / self.fwhm_ghz;
        (-std::f64::consts::LN_2 * u.powi(2 * self.order as i32)).exp()
    }

    /// Field amplitude |H(f)| = sqrt of the power transmittivity (all filters
    /// and the pump are modeled with zero spectral phase).
    pub fn amplitude(&self, f_ghz: f64) -> f64 {
        self.power_transmittivity(f_ghz).sqrt()
    }

    /// Pump spectral weight |Ẽ_p(f)|⁴, the square of the power spectrum. This
    /// is the factor the pair-coherence integral attaches to the mean detuning
    /// of the two photons.
    pub fn pump_weight(&self, f_ghz: f64) -> f64 {
        let p = self.power_transmittivity(f_ghz);
        p * p
    }

    /// Smallest halfwidth W such that the power transmittivity at
    /// center ± W has fallen to `eps`; closed form
    /// W = (fwhm/2)·(ln(1/eps)/ln2)^(1/2n). Used to truncate quadrature
    /// domains.
    ///
    /// # Panics
    /// If `eps` is not in (0, 1).
    pub fn support_halfwidth(&self, eps: f64) -> f64 {
        assert!(eps > 0.0 && eps < 1.0, "support eps must be in (0,1), got {eps}");
        let x = (1.0 / eps).ln() / std::f64::consts::LN_2;
        0.5 * self.fwhm_ghz * x.powf(1.0 / (2.0 * self.order as f64))
    }
}
