//! `simulate` — command-line front end for the PMD entanglement-degradation
//! model.
//!
//! Subcommands map one-to-one onto scenarios: `curve` (C and S versus DGD),
//! `sweep` / `mixed-sweep` (normalized τ_dec versus pump-bandwidth ratio),
//! `tomo` (simulated tomography experiment), and `rho` (the model density
//! matrix). Runs are driven either by a TOML config (`--config`) or a
//! bundled preset (`--preset`). Exit codes: 0 success, 2 configuration
//! error, 3 numerical failure (degenerate support, no threshold crossing),
//! 1 I/O failure.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_config, OutputFormat, RunConfig, Scenario, ScenarioName};
use output::Provenance;
use pmdsim_core::analysis::{
    self, bell_locus, concurrence_curve, fig2a_presets, fig2a_tau_grid, mixed_shape_sweep,
    pump_sweep, AnalysisError, SweepCurve,
};
use pmdsim_core::pmdcore::{build_density_matrix, compute_r, LinkConfig, PmdError};
use pmdsim_core::tomosim::{self, default_plan, TomoError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "simulate",
    version,
    about = "Quantify how PMD in one arm degrades two-photon polarization entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence and maximal CHSH value versus DGD
    Curve(CommonArgs),
    /// Normalized tau_dec versus pump-to-channel bandwidth ratio
    Sweep(CommonArgs),
    /// Sweep with super-Gaussian channels but a Gaussian pump
    MixedSweep(CommonArgs),
    /// Simulated 16-setting tomography experiment at one DGD value
    Tomo(CommonArgs),
    /// The model two-photon density matrix at one DGD value (JSON)
    Rho(RhoArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Bundled configuration: fig2a-130, fig2a-70, fig2b (curve); fig3
    /// (sweep); fig2a-130/fig2a-70 (tomo, rho)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output path; stdout when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output format (default csv, except rho: json)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct RhoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// DGD in ps; overrides the config value
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Numerical(msg) | CliError::Io(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PmdError> for CliError {
    fn from(e: PmdError) -> Self {
        match e {
            PmdError::SupportDegenerate { .. }
            | PmdError::CoherenceOutOfRange { .. }
            | PmdError::GridTooCoarse { .. }
            | PmdError::GridTooShort { .. } => CliError::Numerical(e.to_string()),
            PmdError::BadQuadrature(_) | PmdError::NonUniformGrid { .. } | PmdError::EmptyGrid => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NoCrossing { .. } => CliError::Numerical(e.to_string()),
            AnalysisError::Link(inner) => inner.into(),
            AnalysisError::EmptyGrid
            | AnalysisError::BadThreshold(_)
            | AnalysisError::BadRatio(_)
            | AnalysisError::Shape(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        match e {
            TomoError::SingularDesign { .. } | TomoError::BadRecord(_) => {
                CliError::Numerical(e.to_string())
            }
            TomoError::Link(inner) => inner.into(),
            TomoError::BadSetting(_) | TomoError::BadPlan(_) => CliError::Config(e.to_string()),
        }
    }
}

/// The work to perform, resolved from a config file or preset.
enum Job {
    Curve {
        link: LinkConfig,
        taus_ps: Vec<f64>,
    },
    /// The S(C) locus (preset fig2b).
    Locus,
    Sweep {
        channel_order: u32,
        ratios: Vec<f64>,
        gaussian_pump: bool,
    },
    /// All four sweep orders (preset fig3).
    Family {
        ratios: Vec<f64>,
    },
    Tomo {
        link: LinkConfig,
        tau_ps: f64,
        pairs_per_setting: u64,
        efficiency: f64,
        seed: u64,
    },
    Rho {
        link: LinkConfig,
        tau_ps: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Multi-line messages (TOML span diagnostics) are collapsed so
            // the failure is always a single stderr line.
            let one_line: Vec<_> = e.to_string().split_whitespace().map(str::to_owned).collect();
            eprintln!("simulate: {}", one_line.join(" "));
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (expected, common, tau_override) = match &cli.command {
        Command::Curve(c) => (ScenarioName::Curve, c, None),
        Command::Sweep(c) => (ScenarioName::Sweep, c, None),
        Command::MixedSweep(c) => (ScenarioName::MixedSweep, c, None),
        Command::Tomo(c) => (ScenarioName::Tomo, c, None),
        Command::Rho(r) => (ScenarioName::Rho, &r.common, r.tau),
    };
    if let Some(tau) = tau_override {
        if !tau.is_finite() {
            return Err(CliError::Config(format!("--tau must be finite, got {tau}")));
        }
    }

    let (hash_source, mut job, config_out, config_format) = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--config and --preset are mutually exclusive".into()))
        }
        (None, None) => {
            return Err(CliError::Config("one of --config or --preset is required".into()))
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            let parsed = parse_config(&text)?;
            if parsed.scenario.name() != expected {
                return Err(CliError::Config(format!(
                    "config declares scenario \"{}\" but the subcommand is \"{}\"",
                    parsed.scenario.name().as_str(),
                    expected.as_str()
                )));
            }
            let RunConfig { scenario, out, format } = parsed;
            (text.into_bytes(), job_from_scenario(scenario), out, format)
        }
        (None, Some(name)) => {
            let job = preset_job(expected, name)?;
            (format!("preset:{name}").into_bytes(), job, None, None)
        }
    };

    // A --seed flag overrides the configured seed and is recorded either way.
    let mut seed_for_header = common.seed.unwrap_or(0);
    if let Job::Tomo { seed, .. } = &mut job {
        if let Some(flag_seed) = common.seed {
            *seed = flag_seed;
        }
        seed_for_header = *seed;
    }

    let format = common.format.or(config_format);
    let provenance = Provenance::new(&hash_source, seed_for_header);
    let artifact = execute(&job, tau_override, format, &provenance)?;

    match common.out.clone().or(config_out) {
        Some(path) => output::write_atomic(&path, &artifact)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{artifact}");
            Ok(())
        }
    }
}

fn job_from_scenario(scenario: Scenario) -> Job {
    match scenario {
        Scenario::Curve { link, taus_ps } => Job::Curve { link, taus_ps },
        Scenario::Sweep { channel_order, ratios } => {
            Job::Sweep { channel_order, ratios, gaussian_pump: false }
        }
        Scenario::MixedSweep { channel_order, ratios } => {
            Job::Sweep { channel_order, ratios, gaussian_pump: true }
        }
        Scenario::Tomo { link, tau_ps, pairs_per_setting, efficiency, seed } => {
            Job::Tomo { link, tau_ps, pairs_per_setting, efficiency, seed }
        }
        Scenario::Rho { link, tau_ps } => Job::Rho { link, tau_ps },
    }
}

fn preset_link(name: &str) -> Option<LinkConfig> {
    fig2a_presets()
        .into_iter()
        .find(|(label, _)| {
            (label == "bch130-bp120" && name == "fig2a-130")
                || (label == "bch70-bp75" && name == "fig2a-70")
        })
        .map(|(_, link)| link)
}

fn preset_job(scenario: ScenarioName, name: &str) -> Result<Job, CliError> {
    let unknown = || {
        CliError::Config(format!(
            "unknown preset \"{name}\" for subcommand \"{}\"",
            scenario.as_str()
        ))
    };
    match scenario {
        ScenarioName::Curve => match name {
            "fig2b" => Ok(Job::Locus),
            _ => {
                let link = preset_link(name).ok_or_else(unknown)?;
                Ok(Job::Curve { link, taus_ps: fig2a_tau_grid() })
            }
        },
        ScenarioName::Sweep if name == "fig3" => {
            Ok(Job::Family { ratios: analysis::default_sweep_ratios() })
        }
        ScenarioName::Tomo => {
            let link = preset_link(name).ok_or_else(unknown)?;
            Ok(Job::Tomo {
                link,
                tau_ps: 0.0,
                pairs_per_setting: config::DEFAULT_PAIRS_PER_SETTING,
                efficiency: config::DEFAULT_EFFICIENCY,
                seed: 0,
            })
        }
        ScenarioName::Rho => {
            let link = preset_link(name).ok_or_else(unknown)?;
            Ok(Job::Rho { link, tau_ps: 0.0 })
        }
        _ => Err(unknown()),
    }
}

fn execute(
    job: &Job,
    tau_override: Option<f64>,
    format: Option<OutputFormat>,
    provenance: &Provenance,
) -> Result<String, CliError> {
    let format_or = |default: OutputFormat| format.unwrap_or(default);
    match job {
        Job::Curve { link, taus_ps } => {
            let points = concurrence_curve(link, taus_ps)?;
            Ok(match format_or(OutputFormat::Csv) {
                OutputFormat::Csv => output::curve_csv(provenance, &points),
                OutputFormat::Json => output::curve_json(provenance, &points),
            })
        }
        Job::Locus => {
            let points = bell_locus();
            Ok(match format_or(OutputFormat::Csv) {
                OutputFormat::Csv => output::locus_csv(provenance, &points),
                OutputFormat::Json => output::locus_json(provenance, &points),
            })
        }
        Job::Sweep { channel_order, ratios, gaussian_pump } => {
            let points = if *gaussian_pump {
                mixed_shape_sweep(*channel_order, ratios)?
            } else {
                pump_sweep(*channel_order, ratios)?
            };
            Ok(match format_or(OutputFormat::Csv) {
                OutputFormat::Csv => output::sweep_csv(provenance, &points),
                OutputFormat::Json => output::sweep_json(provenance, &points),
            })
        }
        Job::Family { ratios } => {
            let curves = (1..=4)
                .map(|order| {
                    Ok(SweepCurve { channel_order: order, points: pump_sweep(order, ratios)? })
                })
                .collect::<Result<Vec<_>, AnalysisError>>()?;
            Ok(match format_or(OutputFormat::Csv) {
                OutputFormat::Csv => output::sweep_family_csv(provenance, &curves),
                OutputFormat::Json => output::sweep_family_json(provenance, &curves),
            })
        }
        Job::Tomo { link, tau_ps, pairs_per_setting, efficiency, seed } => {
            let plan = default_plan()
                .with_pairs_per_setting(*pairs_per_setting)?
                .with_efficiency(*efficiency)?
                .with_seed(*seed);
            let report = tomosim::run_experiment(link, *tau_ps, &plan)?;
            Ok(match format_or(OutputFormat::Csv) {
                OutputFormat::Csv => {
                    let counts = report.record.as_ref().expect("noisy run records counts");
                    output::counts_csv(provenance, counts.counts())
                }
                OutputFormat::Json => output::tomo_json(provenance, *tau_ps, &report),
            })
        }
        Job::Rho { link, tau_ps } => {
            let tau_ps = tau_override.unwrap_or(*tau_ps);
            if format == Some(OutputFormat::Csv) {
                return Err(CliError::Config(
                    "rho emits a density matrix; only --format json is supported".into(),
                ));
            }
            let r = compute_r(link, tau_ps)?;
            let state = build_density_matrix(r)?;
            Ok(output::rho_json(provenance, tau_ps, r, &state))
        }
    }
}
