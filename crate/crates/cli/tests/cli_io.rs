//! Black-box tests of the `simulate` binary: artifact layout, determinism,
//! exit codes, and flag/config precedence.

use std::path::Path;
use std::process::{Command, Output};

fn simulate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_line(out: &Output) -> String {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "diagnostics must be a single line, got: {text:?}");
    assert!(lines[0].starts_with("simulate: "), "{text:?}");
    lines[0].to_string()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn curve_preset_layout_and_frozen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&["curve", "--preset", "fig2a-130", "--out", "curve.csv"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 + 121);
    let header = lines[0];
    assert!(
        header.starts_with(concat!("# simulate ", env!("CARGO_PKG_VERSION"), " config=")),
        "{header}"
    );
    assert!(header.ends_with(" seed=0"), "{header}");
    let hash = header.split("config=").nth(1).unwrap().split(' ').next().unwrap();
    assert_eq!(hash.len(), 12);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(lines[1], "tau_ps,concurrence,s_max");
    assert_eq!(lines[2], "0.000000,1.000000,2.828427");
    assert_eq!(lines[2 + 20], "5.000000,0.451931,2.194759");
    assert_eq!(lines[2 + 40], "10.000000,0.115369,2.013266");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = simulate(
            &["tomo", "--preset", "fig2a-130", "--seed", "123", "--out", name],
            dir.path(),
        );
        assert_eq!(exit_code(&out), 0);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);

    // The same holds when driven by a config file.
    let config = "scenario = \"curve\"\n[link]\nb_ch_ghz = 100.0\nb_p_ghz = 50.0\norder = 1\n\
                  [curve]\ntaus_ps = [0.0, 2.0, 4.0]\n";
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    let first = simulate(&["curve", "--config", "run.toml"], dir.path());
    let second = simulate(&["curve", "--config", "run.toml"], dir.path());
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn config_errors_exit_2_with_one_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();

    let out = simulate(&["curve"], dir.path());
    assert_eq!(exit_code(&out), 2);
    stderr_line(&out);

    let out = simulate(&["curve", "--preset", "fig2a-130", "--config", "x.toml"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_line(&out).contains("mutually exclusive"));

    std::fs::write(
        dir.path().join("typo.toml"),
        "scenario = \"curve\"\n[link]\nbandwith_ghz = 130.0\nb_p_ghz = 120.0\n",
    )
    .unwrap();
    let out = simulate(&["curve", "--config", "typo.toml"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_line(&out).contains("bandwith_ghz"));

    // Scenario/subcommand mismatch.
    std::fs::write(dir.path().join("sweep.toml"), "scenario = \"sweep\"\n").unwrap();
    let out = simulate(&["curve", "--config", "sweep.toml"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_line(&out).contains("sweep"));

    let out = simulate(&["curve", "--preset", "fig3"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_line(&out).contains("fig3"));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // A pump detuned far outside the channel passbands leaves no spectral
    // overlap, which is a numerical (support) failure, not a config error.
    let config = "scenario = \"rho\"\n\
                  [link.filter_a]\nfwhm_ghz = 100.0\n\
                  [link.filter_b]\nfwhm_ghz = 100.0\n\
                  [link.pump]\nfwhm_ghz = 50.0\ncenter_ghz = 1e6\n";
    std::fs::write(dir.path().join("far.toml"), config).unwrap();
    let out = simulate(&["rho", "--config", "far.toml"], dir.path());
    assert_eq!(exit_code(&out), 3);
    stderr_line(&out);
}

#[test]
fn io_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&["curve", "--preset", "fig2b", "--out", "missing/dir/out.csv"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_line(&out).contains("out.csv"));
}

#[test]
fn sweep_config_peaks_in_the_interior() {
    let dir = tempfile::tempdir().unwrap();
    let ratios: Vec<String> = (4..=14).map(|k| format!("{:.2}", k as f64 * 0.05)).collect();
    let config = format!(
        "scenario = \"sweep\"\n[sweep]\nchannel_order = 3\nratios = [{}]\n",
        ratios.join(", ")
    );
    std::fs::write(dir.path().join("sweep.toml"), config).unwrap();
    let out = simulate(&["sweep", "--config", "sweep.toml"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(2)
        .map(|line| {
            let mut cells = line.split(',');
            let ratio: f64 = cells.next().unwrap().parse().unwrap();
            let value: f64 = cells.next().unwrap().parse().unwrap();
            (ratio, value)
        })
        .collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(text.lines().nth(1).unwrap(), "ratio,tau_dec_times_bch");
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap();
    assert!(best > 0 && best < rows.len() - 1, "peak on boundary: {rows:?}");
    assert!((rows[best].0 - 0.4).abs() < 0.051, "peak ratio {}", rows[best].0);
}

#[test]
fn rho_emits_bell_state_json_and_honors_tau_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&["rho", "--preset", "fig2a-130"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tau_ps"], 0.0);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["basis"][0], "hh");
    assert_eq!(v["basis"][3], "vv");
    assert!((v["r"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["r"][1].as_f64().unwrap(), 0.0);
    let rho = &v["rho"];
    assert!((rho[0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((rho[0][3][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(rho[1][1][0].as_f64().unwrap(), 0.0);

    let out = simulate(&["rho", "--preset", "fig2a-130", "--tau", "10"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["tau_ps"], 10.0);
    assert!((v["r"][0].as_f64().unwrap() + 0.115_369).abs() < 1e-5);
    assert!((rho_entry(&v, 0, 3).0 + 0.057_684).abs() < 1e-5);
    assert!((rho_entry(&v, 0, 0).0 - 0.5).abs() < 1e-12);

    let out = simulate(&["rho", "--preset", "fig2a-130", "--format", "csv"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_line(&out).contains("json"));
}

fn rho_entry(v: &serde_json::Value, i: usize, j: usize) -> (f64, f64) {
    let cell = &v["rho"][i][j];
    (cell[0].as_f64().unwrap(), cell[1].as_f64().unwrap())
}

#[test]
fn tomo_json_reports_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tomo", "--preset", "fig2a-70", "--seed", "7", "--format", "json"];
    let out = simulate(&args, dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tau_ps"], 0.0);
    assert_eq!(v["counts"].as_array().unwrap().len(), 16);
    assert!(v["fidelity_to_theory"].as_f64().unwrap() > 0.98);
    assert!(v["metrics"]["concurrence"].as_f64().unwrap() > 0.9);

    let again = simulate(&args, dir.path());
    assert_eq!(out.stdout, again.stdout);

    let other =
        simulate(&["tomo", "--preset", "fig2a-70", "--seed", "8", "--format", "json"], dir.path());
    let w: serde_json::Value = serde_json::from_str(&stdout(&other)).unwrap();
    assert_eq!(w["seed"], 8);
    assert_ne!(v["counts"], w["counts"]);
}

#[test]
fn config_out_and_format_apply_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = "scenario = \"curve\"\nout = \"from_config.json\"\nformat = \"json\"\n\
                  [link]\nb_ch_ghz = 100.0\nb_p_ghz = 50.0\norder = 1\n\
                  [curve]\ntaus_ps = [0.0, 1.0]\n";
    std::fs::write(dir.path().join("cfg.toml"), config).unwrap();

    let out = simulate(&["curve", "--config", "cfg.toml"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let written = std::fs::read_to_string(dir.path().join("from_config.json")).unwrap();
    assert!(written.trim_start().starts_with('{'), "config format ignored: {written}");
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 2);

    // Flags override both the output path and the format.
    let out = simulate(
        &["curve", "--config", "cfg.toml", "--out", "flag.csv", "--format", "csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let written = std::fs::read_to_string(dir.path().join("flag.csv")).unwrap();
    assert!(written.starts_with("# simulate "));
    assert!(written.contains("tau_ps,concurrence,s_max"));
}
