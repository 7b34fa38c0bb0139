//! End-to-end runs of the `hamsim` binary on temporary configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    p.canonicalize().unwrap().display().to_string()
}

fn hamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsim")).args(args).output().unwrap()
}

/// Writes `body` as a config in a fresh directory and runs `command` on it.
fn run(dir: &TempDir, name: &str, body: &str, command: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.path().join(format!("{name}.toml"));
    fs::write(&cfg, body).unwrap();
    let out = dir.path().join(name);
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (hamsim(&args), out)
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const HUBBARD: &str = r#"
[hamiltonian]
source = "hubbard"
sites = 2
hopping = 1.0
interaction = 4.0
"#;

#[test]
fn sweep_row_count_schema_and_determinism() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{HUBBARD}
[protocol]
names = ["qdrift"]
times = [0.5]
grid = [10, 20, 40, 80]

[trials]
count = 3
base_seed = 5

[observables]
names = ["energy", "particle_number"]

[outputs]
metrics = ["spectral_error", "mixing_bound", "observables", "tallies"]
plots = true
"#
    );
    let (o, out) = run(&dir, "a", &body, "sweep", &[]);
    ok(&o);
    let (header, rows) = read_csv(&out.join("results.csv"));
    assert_eq!(
        header,
        [
            "protocol",
            "seed",
            "t",
            "N",
            "exponential_count",
            "cnot_count",
            "spectral_error",
            "mixing_bound",
            "energy",
            "particle_number"
        ]
    );
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!(r[2..].iter().all(|v| v.parse::<f64>().unwrap().is_finite()), "{r:?}");
    }
    let mut keys: Vec<_> = rows.iter().map(|r| r[..4].join(",")).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 12);
    assert!(out.join("spectral_error_0.svg").exists());
    assert!(out.join("tallies.csv").exists());

    let (o, again) = run(&dir, "b", &body, "sweep", &[]);
    ok(&o);
    assert_eq!(fs::read(out.join("results.csv")).unwrap(), fs::read(again.join("results.csv")).unwrap());

    // the seed flag overrides the config and changes the draws
    let (o, other) = run(&dir, "c", &body, "sweep", &["--seed", "99"]);
    ok(&o);
    let (_, rows_other) = read_csv(&other.join("results.csv"));
    assert_eq!(rows_other[0][1], "99");
    assert_ne!(rows, rows_other);
}

#[test]
fn histogram_counts_and_rejection_of_deterministic_protocols() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"
[hamiltonian]
source = "fcidump"
path = "{}"

[protocol]
names = ["physdrift_abs"]
times = [0.5]
grid = [1420]
"#,
        fixture("h3_chain.fcidump")
    );
    let (o, out) = run(&dir, "h", &body, "histogram", &[]);
    ok(&o);
    let (header, rows) = read_csv(&out.join("histogram.csv"));
    assert_eq!(header, ["index", "label", "count", "expected"]);
    let total: u64 = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    let expected: f64 = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).sum();
    assert_eq!(total, 1420);
    assert!((expected - 1420.0).abs() < 1e-6);
    let (o, again) = run(&dir, "h2", &body, "histogram", &[]);
    ok(&o);
    assert_eq!(fs::read(out.join("histogram.csv")).unwrap(), fs::read(again.join("histogram.csv")).unwrap());

    let (o, _) = run(&dir, "d", &body.replace("physdrift_abs", "trotter1"), "histogram", &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("randomized"));
}

#[test]
fn bounds_flags_hold_for_qdrift_and_are_blank_for_trotter() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{HUBBARD}
[protocol]
names = ["qdrift", "trotter1"]
times = [0.5, 1.0]
grid = [10, 30, 100, 300, 3000]
"#
    );
    let (o, out) = run(&dir, "b", &body, "bounds", &[]);
    ok(&o);
    let (header, rows) = read_csv(&out.join("bounds.csv"));
    let (flag, kind, ratio) = (column(&header, "within_bound"), column(&header, "kind"), column(&header, "ratio"));
    let qdrift: Vec<_> = rows.iter().filter(|r| r[0] == "qdrift").collect();
    assert_eq!(qdrift.len(), 10);
    assert!(qdrift.iter().all(|r| r[flag] == "true" && r[kind] == "inequality"));
    for t in ["0.5", "1"] {
        let ratios: Vec<f64> = qdrift.iter().filter(|r| r[1] == t).map(|r| r[ratio].parse().unwrap()).collect();
        // the exponential prefactor fades, so the ratio settles as N grows
        let steps: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(steps.last().unwrap() < &steps[0], "{ratios:?}");
        assert!(ratios.iter().all(|r| *r <= 1.0));
    }
    let trotter: Vec<_> = rows.iter().filter(|r| r[0] == "trotter1").collect();
    assert!(trotter.iter().all(|r| r[flag].is_empty() && r[kind] == "up_to_constant"));
    assert!(out.join("bounds_table.csv").exists());
}

#[test]
fn headline_ordering_on_h2_at_equal_depth() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"
[hamiltonian]
source = "fcidump"
path = "{}"

[protocol]
names = ["trotter1", "qdrift", "physdrift_mean"]
times = [0.5]
grid = [500]
grid_unit = "exponential_count"

[trials]
count = 20

[outputs]
metrics = ["spectral_error"]
"#,
        fixture("h2_sto3g.fcidump")
    );
    let (o, out) = run(&dir, "s", &body, "sweep", &[]);
    ok(&o);
    let (header, rows) = read_csv(&out.join("summary.csv"));
    let (mean, se) = (column(&header, "mean_spectral_error"), column(&header, "stderr_spectral_error"));
    let get = |p: &str| {
        let r = rows.iter().find(|r| r[0] == p).unwrap();
        (r[mean].parse::<f64>().unwrap(), r[se].parse::<f64>().unwrap())
    };
    let (q, q_se) = get("qdrift");
    let (m, m_se) = get("physdrift_mean");
    let combined = (q_se * q_se + m_se * m_se).sqrt();
    println!("qdrift {q:.5} ± {q_se:.5}, physdrift_mean {m:.5} ± {m_se:.5}");
    assert!(m <= q + 2.0 * combined, "physdrift_mean {m} exceeds qdrift {q} by more than two standard errors");
}

#[test]
fn compile_simulate_and_qasm_outputs() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{HUBBARD}
[protocol]
names = ["physdrift_abs", "trotter1"]
times = [1.0]
grid = [20]

[trials]
count = 2

[observables]
initial = "ground"
names = ["energy", "particle_number", "state_error"]

[outputs]
plots = true
"#
    );
    let (o, out) = run(&dir, "c", &body, "compile", &[]);
    ok(&o);
    let seq: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sequence.json")).unwrap()).unwrap();
    assert_eq!(seq["n_qubits"], 4);
    assert_eq!(seq["protocol"], "physdrift");
    let tally: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("tally.json")).unwrap()).unwrap();
    assert_eq!(tally["exponential_count"].as_u64().unwrap() as usize, seq["entries"].as_array().unwrap().len());

    let (o, out) = run(&dir, "q", &body, "qasm-export", &[]);
    ok(&o);
    let qasm = fs::read_to_string(out.join("circuit.qasm")).unwrap();
    assert!(qasm.starts_with("OPENQASM 2.0;"));
    assert!(qasm.contains("qreg q[4];"));

    let (o, out) = run(&dir, "s", &body, "simulate", &[]);
    ok(&o);
    let (header, rows) = read_csv(&out.join("timeseries.csv"));
    let n = column(&header, "particle_number");
    let phys: Vec<_> = rows.iter().filter(|r| r[0] == "physdrift_abs").collect();
    assert_eq!(phys.len(), 2 * 21);
    assert!(phys.iter().all(|r| (r[n].parse::<f64>().unwrap() - 2.0).abs() < 1e-10));
    assert!(rows.iter().any(|r| r[0] == "exact"));
    assert!(out.join("energy.svg").exists());
}

#[test]
fn configuration_errors_are_reported() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run(&dir, "p", &format!("{HUBBARD}\n[protocol]\nnames = [\"qdrfit\"]\ntimes = [1.0]\ngrid = [4]\n"), "sweep", &[]);
    assert!(!o.status.success());
    let (o, _) = run(
        &dir,
        "f",
        "[hamiltonian]\nsource = \"fcidump\"\npath = \"missing.fcidump\"\n[protocol]\nnames = [\"qdrift\"]\ntimes = [1.0]\ngrid = [4]\n",
        "sweep",
        &[],
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.fcidump"));
    let (o, _) = run(&dir, "g", &format!("{HUBBARD}\n[protocol]\nnames = [\"qdrift\"]\ntimes = [1.0]\ngrid = [8, 4]\n"), "sweep", &[]);
    assert!(!o.status.success());
    let (o, _) = run(
        &dir,
        "l",
        &format!("{HUBBARD}\n[protocol]\nnames = [\"qdrift\"]\ntimes = [1.0]\ngrid = [4]\n"),
        "sweep",
        &["--dense-limit", "2"],
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dense limit"));
    assert!(!hamsim(&["sweep"]).status.success());
}

#[test]
fn bundled_configs_parse() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            hamsim_core::harness::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
