use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rydberg_cz::budget::Mechanism;
use rydberg_cz::cli::config::{ExperimentConfig, Figure};
use rydberg_cz::cli::output::{config_from_header, emit_figure_data, FigureData};
use rydberg_cz::optimizer::SweepVariable;

fn rydcz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydcz"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn without_timestamp(p: &PathBuf) -> String {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# generated_unix_s"))
        .collect::<Vec<_>>()
        .join("\n")
}

const DELTA_JUMP: &str = r#"
mode = "optimize"
seed = 4

[system]
V_over_Omega0 = 21.1

[pulse]
family = "delta_jump"
tau_Omega0 = 8.6
delta0_over_Omega0 = 0.38
theta_rad = 3.9

[optimize]
objective = "min_duration"
restarts = 0
max_evals = 300
"#;

#[test]
fn simulate_writes_tables_with_round_trip_header() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().display().to_string();
    let o = rydcz(&[
        "simulate",
        "--config",
        &config("simulate_ramped.toml"),
        "--out",
        &out,
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["gate.csv", "gate.json", "summary.csv", "summary.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let text = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let embedded = config_from_header(&text).unwrap();
    let parsed = ExperimentConfig::parse(&embedded, &[]).unwrap();
    assert_eq!(parsed.resolved().unwrap(), parsed);
    assert_eq!(parsed.output.dir.as_deref(), Some(out.as_str()));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DELTA_JUMP);
    let out = tmp.path().join("o");
    let file = out.join("optimize.csv");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = rydcz(&[
            "optimize",
            "--config",
            &cfg,
            "--out",
            &out.display().to_string(),
        ]);
        assert!(
            matches!(o.status.code(), Some(0 | 3)),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        runs.push(without_timestamp(&file));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn infeasible_optimization_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = DELTA_JUMP
        .replace("V_over_Omega0 = 21.1", "V_over_Omega0 = 0.3")
        .replace("max_evals = 300", "max_evals = 60");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("o").display().to_string();
    let o = rydcz(&["optimize", "--config", &cfg, "--out", &out]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let row = fs::read_to_string(Path::new(&out).join("optimize.csv")).unwrap();
    assert!(row.contains("false"));
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{DELTA_JUMP}\n[output]\ncolour = \"red\"\n"),
    );
    assert_eq!(
        rydcz(&["optimize", "--config", &cfg]).status.code(),
        Some(1)
    );
    let cfg = write_config(tmp.path(), DELTA_JUMP);
    let o = rydcz(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode"));
    let o = rydcz(&["optimize", "--config", &cfg, "--set", "pulse.tau_Omega0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        rydcz(&["simulate", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn zero_rabi_frequency_leaves_phases_at_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
mode = "simulate"

[system]
V_over_Omega0 = 21.1

[pulse]
family = "gaussian"
tau_Omega0 = 7.69
delta0_over_Omega0 = 1.2
amplitude_over_Omega0 = -1.85
width_Omega0 = 1.7
omega_peak_over_Omega0 = 0.0
"#,
    );
    let out = tmp.path().join("o");
    let o = rydcz(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        &out.display().to_string(),
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("gate.json")).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        for k in ["phase_rad", "rydberg_time_Omega0", "amplitude_im"] {
            assert!(row[k].as_f64().unwrap().abs() < 1e-12, "{k} = {}", row[k]);
        }
        assert!((row["amplitude_re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn empty_figure_data_is_an_error() {
    let sweep = FigureData::Sweep {
        variable: SweepVariable::Width,
        points: &[],
    };
    assert!(emit_figure_data(&sweep, Figure::Fig3).is_err());
    let scan = FigureData::Scan {
        mechanism: Mechanism::Recoil,
        rows: &[],
    };
    assert!(emit_figure_data(&scan, Figure::Fig5b).is_err());
    assert!(emit_figure_data(&scan, Figure::Fig2d).is_err());
}
