//! Artifact rendering and atomic writes.
//!
//! CSV files open with a single comment line recording provenance
//! (`# simulate <version> config=<hash> seed=<n>`), use fixed six-decimal
//! formatting and LF endings, and are written via a temp file plus rename so
//! a crash never leaves a half-written artifact. JSON artifacts carry the
//! same provenance as fields; complex numbers serialize as [re, im] pairs.

use num_complex::Complex64;
use pmdsim_core::analysis::{BellLocusPoint, CurvePoint, SweepCurve, SweepPoint};
use pmdsim_core::qinfo::{MetricReport, TwoQubitState};
use pmdsim_core::tomosim::ExperimentReport;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run provenance stamped into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: String,
    /// First 12 hex digits of the SHA-256 of the config source (file bytes
    /// or preset name).
    pub config: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_source: &[u8], seed: u64) -> Self {
        let digest = Sha256::digest(config_source);
        let hex: String = digest.iter().take(6).fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        });
        Self { version: VERSION.to_string(), config: hex, seed }
    }

    fn comment_line(&self) -> String {
        format!("# simulate {} config={} seed={}\n", self.version, self.config, self.seed)
    }
}

fn push_row(out: &mut String, cells: &[f64]) {
    for (i, value) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{value:.6}");
    }
    out.push('\n');
}

pub fn curve_csv(provenance: &Provenance, points: &[CurvePoint]) -> String {
    let mut out = provenance.comment_line();
    out.push_str("tau_ps,concurrence,s_max\n");
    for p in points {
        push_row(&mut out, &[p.tau_ps, p.concurrence, p.s_max]);
    }
    out
}

pub fn locus_csv(provenance: &Provenance, points: &[BellLocusPoint]) -> String {
    let mut out = provenance.comment_line();
    out.push_str("concurrence,s_max\n");
    for p in points {
        push_row(&mut out, &[p.concurrence, p.s_max]);
    }
    out
}

pub fn sweep_csv(provenance: &Provenance, points: &[SweepPoint]) -> String {
    let mut out = provenance.comment_line();
    out.push_str("ratio,tau_dec_times_bch\n");
    for p in points {
        push_row(&mut out, &[p.ratio, p.tau_dec_normalized]);
    }
    out
}

pub fn sweep_family_csv(provenance: &Provenance, curves: &[SweepCurve]) -> String {
    let mut out = provenance.comment_line();
    out.push_str("order,ratio,tau_dec_times_bch\n");
    for curve in curves {
        for p in &curve.points {
            let _ = write!(out, "{},", curve.channel_order);
            push_row(&mut out, &[p.ratio, p.tau_dec_normalized]);
        }
    }
    out
}

pub fn counts_csv(provenance: &Provenance, counts: &[u64]) -> String {
    let mut out = provenance.comment_line();
    out.push_str("setting_index,count\n");
    for (i, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "{i},{c}");
    }
    out
}

// ---- JSON bodies ----

type ComplexPair = [f64; 2];

fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn matrix_rows(state: &TwoQubitState) -> Vec<Vec<ComplexPair>> {
    let m = state.matrix();
    (0..4).map(|i| (0..4).map(|j| pair(m[(i, j)])).collect()).collect()
}

pub const BASIS: [&str; 4] = ["hh", "hv", "vh", "vv"];

#[derive(Serialize)]
struct CurveJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    points: Vec<CurvePointJson>,
}

#[derive(Serialize)]
struct CurvePointJson {
    tau_ps: f64,
    concurrence: f64,
    s_max: f64,
}

pub fn curve_json(provenance: &Provenance, points: &[CurvePoint]) -> String {
    to_pretty(&CurveJson {
        provenance,
        points: points
            .iter()
            .map(|p| CurvePointJson {
                tau_ps: p.tau_ps,
                concurrence: p.concurrence,
                s_max: p.s_max,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct LocusJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    points: Vec<LocusPointJson>,
}

#[derive(Serialize)]
struct LocusPointJson {
    concurrence: f64,
    s_max: f64,
}

pub fn locus_json(provenance: &Provenance, points: &[BellLocusPoint]) -> String {
    to_pretty(&LocusJson {
        provenance,
        points: points
            .iter()
            .map(|p| LocusPointJson { concurrence: p.concurrence, s_max: p.s_max })
            .collect(),
    })
}

#[derive(Serialize)]
struct SweepJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    points: Vec<SweepPointJson>,
}

#[derive(Serialize)]
struct SweepPointJson {
    ratio: f64,
    tau_dec_times_bch: f64,
}

pub fn sweep_json(provenance: &Provenance, points: &[SweepPoint]) -> String {
    to_pretty(&SweepJson { provenance, points: sweep_points_json(points) })
}

fn sweep_points_json(points: &[SweepPoint]) -> Vec<SweepPointJson> {
    points
        .iter()
        .map(|p| SweepPointJson { ratio: p.ratio, tau_dec_times_bch: p.tau_dec_normalized })
        .collect()
}

#[derive(Serialize)]
struct SweepFamilyJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    curves: Vec<SweepCurveJson>,
}

#[derive(Serialize)]
struct SweepCurveJson {
    order: u32,
    points: Vec<SweepPointJson>,
}

pub fn sweep_family_json(provenance: &Provenance, curves: &[SweepCurve]) -> String {
    to_pretty(&SweepFamilyJson {
        provenance,
        curves: curves
            .iter()
            .map(|c| SweepCurveJson {
                order: c.channel_order,
                points: sweep_points_json(&c.points),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct RhoJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    tau_ps: f64,
    r: ComplexPair,
    basis: [&'static str; 4],
    rho: Vec<Vec<ComplexPair>>,
}

pub fn rho_json(
    provenance: &Provenance,
    tau_ps: f64,
    r: Complex64,
    state: &TwoQubitState,
) -> String {
    to_pretty(&RhoJson { provenance, tau_ps, r: pair(r), basis: BASIS, rho: matrix_rows(state) })
}

#[derive(Serialize)]
struct MetricsJson {
    concurrence: f64,
    s_max: f64,
    purity: f64,
}

impl From<&MetricReport> for MetricsJson {
    fn from(m: &MetricReport) -> Self {
        Self { concurrence: m.concurrence, s_max: m.s_max, purity: m.purity }
    }
}

#[derive(Serialize)]
struct TomoJson<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    tau_ps: f64,
    fidelity_to_theory: f64,
    metrics: MetricsJson,
    counts: Vec<u64>,
    basis: [&'static str; 4],
    theory: Vec<Vec<ComplexPair>>,
    reconstructed: Vec<Vec<ComplexPair>>,
}

pub fn tomo_json(provenance: &Provenance, tau_ps: f64, report: &ExperimentReport) -> String {
    to_pretty(&TomoJson {
        provenance,
        tau_ps,
        fidelity_to_theory: report.fidelity_to_theory,
        metrics: (&report.metrics).into(),
        counts: report.record.as_ref().map(|r| r.counts().to_vec()).unwrap_or_default(),
        basis: BASIS,
        theory: matrix_rows(&report.theory),
        reconstructed: matrix_rows(&report.reconstructed),
    })
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serialization is infallible");
    text.push('\n');
    text
}

/// Writes through a sibling temp file and an atomic rename; the destination
/// never holds a partial artifact.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir)?;
    file.write_all(contents.as_bytes())?;
    file.flush()?;
    file.persist(path).map_err(|e| e.error)?;
    Ok(())
}
