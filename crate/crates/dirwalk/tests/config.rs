//! `dirwalk run --config`: crafted configurations and their exit statuses.

use std::process::{Command, Output};

fn run_config(source: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, source).unwrap();
    let mut args = vec!["run", "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = Command::new(env!("CARGO_BIN_EXE_dirwalk")).args(&args).output().unwrap();
    (out, dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_configs_exit_with_two_and_a_line() {
    for (source, line) in [
        ("seed = 1\n[model\n", "line 2"),
        ("seed = 1\ncolour = \"blue\"\n[[experiment]]\nname = \"beta\"\n", "line 2"),
        ("[[experiment]]\nname = \"beta\"\n\n[[experiment]]\nname = \"beta\"\nwalks = 3\n", "line 4"),
        ("\n\n[[experiment]]\nname = \"frobnicate\"\n", "line 3"),
        ("[model]\ndimension = 2\nweights = [1, 1, 1, 1]\n[[experiment]]\nname = \"identity\"\n", "line 4"),
    ] {
        let (o, _dir) = run_config(source, &[]);
        assert_eq!(o.status.code(), Some(2), "{source}");
        let err = stderr(&o);
        assert!(err.contains(line), "{source}: {err}");
    }
}

#[test]
fn passing_config_writes_reports_and_samples() {
    let source = r#"
seed = 3
workers = 2

[model]
dimension = 2
weights = [2, 1, 1, 1]

[direction]
u = "1,0"

[[experiment]]
name = "cylinder-weights"
N = 2
L = 2

[[experiment]]
name = "verify-lemma1"
max_cycle_len = 5

[[experiment]]
name = "beta"
L = 20
envs = 200
doubling = 5

[output]
format = "json"
csv = true
"#;
    let out = tempfile::tempdir().unwrap();
    let (o, _dir) = run_config(source, &["--out", out.path().to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    for file in ["01-cylinder-weights.json", "02-cycle-reversal.json", "03-beta.json", "03-beta-samples.csv"] {
        assert!(out.path().join(file).exists(), "{file}");
    }
    let beta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("03-beta.json")).unwrap()).unwrap();
    assert_eq!(beta["parameters"]["seed"], 3);
    assert_eq!(beta["parameters"]["envs"], 200);
}

#[test]
fn exact_only_config_exits_with_zero() {
    let (o, _dir) = run_config("[[experiment]]\nname = \"cylinder-weights\"\nu = [2, 1]\n", &["--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");
}

#[test]
fn failing_config_exits_with_one() {
    let source = "[[experiment]]\nname = \"calibration\"\nrepetitions = 50\ntrials = 2\nmax_failure_rate_percent = 0\n";
    let (o, _dir) = run_config(source, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn model_errors_point_at_the_model_table() {
    let (o, _dir) = run_config("seed = 1\n\n[model]\ndimension = 2\nweights = [1, 2, 3]\n[[experiment]]\nname = \"beta\"\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[model]"), "{}", stderr(&o));
}
