use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const ZERO_1D: &str = r#"
[domain]
extents = [[0.0, 1.0]]

[boundary]
dirichlet = ["left"]
neumann = ["right"]

[damping]
region = [[[0.4, 0.6]]]
a0 = 1.0

[grid]
nodes = [51]

[time]
t_final = 1.0
"#;

fn wavezar(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavezar"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn wavezar")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("experiment.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_data_gives_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO_1D);
    let out = dir.path().join("out");
    let o = wavezar(&["simulate"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,E,E_kin,E_pot,E_nl,D_accum");
    let mut rows = 0;
    for line in lines {
        let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(vals[1..].iter().all(|&v| v == 0.0), "{line}");
        rows += 1;
    }
    assert!(rows > 1);
    for name in ["residual.json", "resolved-config.toml", "run-manifest.json", "plot.gp"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn resolved_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO_1D);
    let out = dir.path().join("out");
    assert!(wavezar(&["rays"], &cfg, &out).status.success());
    let resolved = out.join("resolved-config.toml");
    let again = dir.path().join("again");
    let o = wavezar(&["rays"], &resolved, &again);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(out.join("gcc.json")).unwrap(), fs::read(again.join("gcc.json")).unwrap());
}

#[test]
fn oversized_resolvent_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let text = ZERO_1D.replace("nodes = [51]", "nodes = [5001]");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = wavezar(&["resolvent"], &cfg, &out);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("5000") && err.contains("2000"), "{err}");
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn failed_run_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // Only a Dirichlet boundary: not a mixed problem.
    let text = ZERO_1D.replace("neumann = [\"right\"]", "").replace("[\"left\"]", "[\"left\", \"right\"]");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = wavezar(&["simulate"], &cfg, &out);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("geometry"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{ZERO_1D}\n[grid2]\nnodes = [3]\n"));
    let o = wavezar(&["simulate"], &cfg, &dir.path().join("out"));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("grid2"), "{}", stderr(&o));
}

#[test]
fn inadmissible_nonlinearity_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ZERO_1D}\n[nonlinearity]\nname = \"power\"\np = 9.0\ncheck_dimension = 3\n");
    let cfg = write_config(dir.path(), &text);
    let o = wavezar(&["simulate"], &cfg, &dir.path().join("out"));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nonlinearity.validate"), "{}", stderr(&o));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ZERO_1D}\n[analysis]\nensemble = 6\nhorizon = 2.0\n");
    let cfg = write_config(dir.path(), &text);
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_wavezar"))
            .args(["observe", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env("WAVEZAR_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("observability.json")).unwrap()
    };
    assert_eq!(run("1", "one"), run("4", "four"));

    let o = Command::new(env!("CARGO_BIN_EXE_wavezar"))
        .args(["rays", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("bad"))
        .env("WAVEZAR_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("WAVEZAR_THREADS"));
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO_1D);
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_wavezar"))
        .args(["rays", "--seed", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["subcommand"], "rays");
    assert!(fs::read_to_string(out.join("resolved-config.toml")).unwrap().contains("seed = 7"));
}
