//! TOML run configuration: schema, defaults, and validation.
//!
//! Unknown keys are rejected (deny_unknown_fields), so typos surface as
//! parse errors naming the offending key. Semantic violations (negative
//! bandwidths, bad grids) are reported as validation errors naming the
//! constraint.

use pmdsim_core::pmdcore::{LinkConfig, QuadratureSpec};
use pmdsim_core::spectra::SpectralShape;
use serde::Deserialize;
use std::path::PathBuf;
use thiserror::Error;

/// Filter order used when a config omits one.
pub const DEFAULT_FILTER_ORDER: u32 = 3;
/// Default curve grid: τ from 0 to 30 ps in 0.25 ps steps.
pub const DEFAULT_TAU_MAX_PS: f64 = 30.0;
pub const DEFAULT_TAU_STEP_PS: f64 = 0.25;
/// Default tomography counting parameters.
pub const DEFAULT_PAIRS_PER_SETTING: u64 = 1_000_000;
pub const DEFAULT_EFFICIENCY: f64 = 0.20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    Curve,
    Sweep,
    MixedSweep,
    Tomo,
    Rho,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Curve => "curve",
            ScenarioName::Sweep => "sweep",
            ScenarioName::MixedSweep => "mixed-sweep",
            ScenarioName::Tomo => "tomo",
            ScenarioName::Rho => "rho",
        }
    }
}

/// A fully validated run request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Output path from the config file; a `--out` flag overrides it.
    pub out: Option<PathBuf>,
    /// Output format from the config file; a `--format` flag overrides it.
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    Curve { link: LinkConfig, taus_ps: Vec<f64> },
    Sweep { channel_order: u32, ratios: Vec<f64> },
    MixedSweep { channel_order: u32, ratios: Vec<f64> },
    Tomo { link: LinkConfig, tau_ps: f64, pairs_per_setting: u64, efficiency: f64, seed: u64 },
    Rho { link: LinkConfig, tau_ps: f64 },
}

impl Scenario {
    pub fn name(&self) -> ScenarioName {
        match self {
            Scenario::Curve { .. } => ScenarioName::Curve,
            Scenario::Sweep { .. } => ScenarioName::Sweep,
            Scenario::MixedSweep { .. } => ScenarioName::MixedSweep,
            Scenario::Tomo { .. } => ScenarioName::Tomo,
            Scenario::Rho { .. } => ScenarioName::Rho,
        }
    }
}

// ---- raw TOML schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scenario: ScenarioName,
    link: Option<LinkSection>,
    quadrature: Option<QuadSection>,
    curve: Option<CurveSection>,
    sweep: Option<SweepSection>,
    tomo: Option<TomoSection>,
    rho: Option<RhoSection>,
    out: Option<String>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    /// Shorthand: symmetric channels at this FWHM (GHz)...
    b_ch_ghz: Option<f64>,
    /// ...with a pump at this FWHM (GHz). Both filters get `order`.
    b_p_ghz: Option<f64>,
    /// Filter order for the shorthand form (default 3).
    order: Option<u32>,
    /// Detailed per-filter form; mutually exclusive with the shorthand.
    filter_a: Option<FilterSection>,
    filter_b: Option<FilterSection>,
    pump: Option<FilterSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterSection {
    order: Option<u32>,
    fwhm_ghz: f64,
    center_ghz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadSection {
    nodes_per_axis: Option<usize>,
    truncation_eps: Option<f64>,
    kernel_sign: Option<i8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSection {
    /// Explicit τ values (ps); overrides the uniform grid keys.
    taus_ps: Option<Vec<f64>>,
    tau_max_ps: Option<f64>,
    tau_step_ps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    channel_order: Option<u32>,
    ratios: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TomoSection {
    tau_ps: Option<f64>,
    pairs_per_setting: Option<u64>,
    efficiency: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhoSection {
    tau_ps: Option<f64>,
}

// ---- validation ----

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

    let link = raw.link.map(|section| build_link(section, raw.quadrature.as_ref())).transpose()?;
    let require_link = |scenario: &str| {
        link.clone().ok_or_else(|| {
            ConfigError::Invalid(format!("scenario \"{scenario}\" requires a [link] section"))
        })
    };

    let scenario = match raw.scenario {
        ScenarioName::Curve => Scenario::Curve {
            link: require_link("curve")?,
            taus_ps: build_tau_grid(raw.curve.as_ref())?,
        },
        ScenarioName::Sweep => {
            let (channel_order, ratios) = build_sweep(raw.sweep.as_ref())?;
            Scenario::Sweep { channel_order, ratios }
        }
        ScenarioName::MixedSweep => {
            let (channel_order, ratios) = build_sweep(raw.sweep.as_ref())?;
            Scenario::MixedSweep { channel_order, ratios }
        }
        ScenarioName::Tomo => {
            let t = raw.tomo.as_ref();
            let efficiency = t.and_then(|t| t.efficiency).unwrap_or(DEFAULT_EFFICIENCY);
            if !(efficiency > 0.0 && efficiency <= 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "tomo.efficiency must lie in (0, 1], got {efficiency}"
                )));
            }
            let pairs = t.and_then(|t| t.pairs_per_setting).unwrap_or(DEFAULT_PAIRS_PER_SETTING);
            if pairs == 0 {
                return Err(ConfigError::Invalid("tomo.pairs_per_setting must be positive".into()));
            }
            Scenario::Tomo {
                link: require_link("tomo")?,
                tau_ps: finite_tau(t.and_then(|t| t.tau_ps), "tomo.tau_ps")?,
                pairs_per_setting: pairs,
                efficiency,
                seed: t.and_then(|t| t.seed).unwrap_or(0),
            }
        }
        ScenarioName::Rho => Scenario::Rho {
            link: require_link("rho")?,
            tau_ps: finite_tau(raw.rho.as_ref().and_then(|r| r.tau_ps), "rho.tau_ps")?,
        },
    };

    Ok(RunConfig { scenario, out: raw.out.map(PathBuf::from), format: raw.format })
}

fn finite_tau(tau: Option<f64>, key: &str) -> Result<f64, ConfigError> {
    let tau = tau.unwrap_or(0.0);
    if !tau.is_finite() {
        return Err(ConfigError::Invalid(format!("{key} must be finite, got {tau}")));
    }
    Ok(tau)
}

fn build_link(
    section: LinkSection,
    quadrature: Option<&QuadSection>,
) -> Result<LinkConfig, ConfigError> {
    let shorthand = section.b_ch_ghz.is_some() || section.b_p_ghz.is_some();
    let detailed =
        section.filter_a.is_some() || section.filter_b.is_some() || section.pump.is_some();
    if shorthand && detailed {
        return Err(ConfigError::Invalid(
            "[link] mixes the shorthand keys (b_ch_ghz/b_p_ghz) with per-filter tables; use one \
             form"
                .into(),
        ));
    }

    let (filter_a, filter_b, pump) = if shorthand {
        let b_ch = section
            .b_ch_ghz
            .ok_or_else(|| ConfigError::Invalid("[link] shorthand form needs b_ch_ghz".into()))?;
        let b_p = section
            .b_p_ghz
            .ok_or_else(|| ConfigError::Invalid("[link] shorthand form needs b_p_ghz".into()))?;
        let order = section.order.unwrap_or(DEFAULT_FILTER_ORDER);
        let ch = shape(order, b_ch, 0.0, "link.b_ch_ghz")?;
        (ch, ch, shape(order, b_p, 0.0, "link.b_p_ghz")?)
    } else {
        let build = |f: Option<FilterSection>, key: &str| -> Result<SpectralShape, ConfigError> {
            let f = f.ok_or_else(|| {
                ConfigError::Invalid(format!("[link] detailed form needs a [link.{key}] table"))
            })?;
            shape(
                f.order.unwrap_or(DEFAULT_FILTER_ORDER),
                f.fwhm_ghz,
                f.center_ghz.unwrap_or(0.0),
                &format!("link.{key}"),
            )
        };
        if section.order.is_some() {
            return Err(ConfigError::Invalid(
                "[link] order applies to the shorthand form; set order per filter instead".into(),
            ));
        }
        (
            build(section.filter_a, "filter_a")?,
            build(section.filter_b, "filter_b")?,
            build(section.pump, "pump")?,
        )
    };

    let mut config = LinkConfig::new(filter_a, filter_b, pump);
    if let Some(q) = quadrature {
        let mut spec = QuadratureSpec::default();
        if let Some(n) = q.nodes_per_axis {
            spec.nodes_per_axis = n;
        }
        if let Some(eps) = q.truncation_eps {
            spec.truncation_eps = eps;
        }
        if let Some(sign) = q.kernel_sign {
            spec.kernel_sign = sign;
        }
        spec.validate().map_err(|e| ConfigError::Invalid(format!("[quadrature]: {e}")))?;
        config = config.with_quadrature(spec);
    }
    Ok(config)
}

fn shape(
    order: u32,
    fwhm_ghz: f64,
    center_ghz: f64,
    key: &str,
) -> Result<SpectralShape, ConfigError> {
    SpectralShape::with_center(order, fwhm_ghz, center_ghz)
        .map_err(|e| ConfigError::Invalid(format!("{key}: {e}")))
}

fn build_tau_grid(section: Option<&CurveSection>) -> Result<Vec<f64>, ConfigError> {
    if let Some(taus) = section.and_then(|c| c.taus_ps.as_ref()) {
        if taus.is_empty() {
            return Err(ConfigError::Invalid("curve.taus_ps must be nonempty".into()));
        }
        if let Some(bad) = taus.iter().find(|t| !t.is_finite()) {
            return Err(ConfigError::Invalid(format!("curve.taus_ps must be finite, got {bad}")));
        }
        return Ok(taus.clone());
    }
    let max = section.and_then(|c| c.tau_max_ps).unwrap_or(DEFAULT_TAU_MAX_PS);
    let step = section.and_then(|c| c.tau_step_ps).unwrap_or(DEFAULT_TAU_STEP_PS);
    if !(step > 0.0 && step.is_finite()) {
        return Err(ConfigError::Invalid(format!(
            "curve.tau_step_ps must be positive, got {step}"
        )));
    }
    if !(max >= 0.0 && max.is_finite()) {
        return Err(ConfigError::Invalid(format!(
            "curve.tau_max_ps must be nonnegative, got {max}"
        )));
    }
    let count = (max / step).floor() as usize;
    Ok((0..=count).map(|k| k as f64 * step).collect())
}

fn build_sweep(section: Option<&SweepSection>) -> Result<(u32, Vec<f64>), ConfigError> {
    let order = section.and_then(|s| s.channel_order).unwrap_or(DEFAULT_FILTER_ORDER);
    if order == 0 {
        return Err(ConfigError::Invalid("sweep.channel_order must be at least 1".into()));
    }
    let ratios = match section.and_then(|s| s.ratios.as_ref()) {
        Some(r) => {
            if r.is_empty() {
                return Err(ConfigError::Invalid("sweep.ratios must be nonempty".into()));
            }
            if let Some(bad) = r.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(ConfigError::Invalid(format!(
                    "sweep.ratios must be positive and finite, got {bad}"
                )));
            }
            r.clone()
        }
        None => pmdsim_core::analysis::default_sweep_ratios(),
    };
    Ok((order, ratios))
}
