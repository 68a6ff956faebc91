use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use netlock::cli::{parse_centrality_csv, parse_sweep_csv, ZERO_VARIANCE};
use netlock::control::parse_policy_csv;
use netlock::epidemic::io::{parse_numeric_csv, AGGREGATE_HEADER};
use netlock::epidemic::TimeGrid;
use netlock::netgen::CentralityKind;

const SCENARIO: &str = r#"
schema_version = 1

[network]
kind = "small-world"
n = 30
mean_degree = 4
seed = 17

[planner]
lambda = 0.05
horizon = 30.0
dt = 0.5

[solver]
starts = [0.0]
"#;

fn netlock(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_netlock"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scenario(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, format!("{SCENARIO}{extra}")).unwrap();
    path
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn optimize_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    scenario(tmp.path(), "");
    for out in ["a", "b"] {
        let (code, _, err) = netlock(
            tmp.path(),
            &["--config", "scenario.toml", "--out", out, "optimize"],
        );
        assert_eq!(code, 0, "{err}");
    }
    for name in ["policy.csv", "aggregate.csv", "summary.json"] {
        assert_eq!(
            read(&tmp.path().join("a"), name),
            read(&tmp.path().join("b"), name),
            "{name}"
        );
    }
    // Worker count does not change results.
    let (code, _, _) = netlock(
        tmp.path(),
        &[
            "--config",
            "scenario.toml",
            "--out",
            "c",
            "--workers",
            "3",
            "optimize",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(
        read(&tmp.path().join("a"), "policy.csv"),
        read(&tmp.path().join("c"), "policy.csv")
    );
}

#[test]
fn outputs_parse_back() {
    let tmp = tempfile::tempdir().unwrap();
    scenario(tmp.path(), "\n[sweep]\nlambdas = [0.03, 0.2]\n");
    let dir = tmp.path().join("out");
    for cmd in [
        "optimize",
        "report-centrality",
        "sweep",
        "simulate",
        "generate-network",
    ] {
        let (code, _, err) = netlock(tmp.path(), &["--config", "scenario.toml", cmd]);
        assert_eq!(code, 0, "{cmd}: {err}");
    }

    let grid = TimeGrid::new(30.0, 0.5).unwrap();
    let policy = parse_policy_csv(&read(&dir, "policy.csv"), grid, 30).unwrap();
    assert!(policy.values().iter().all(|l| (0.0..=1.0).contains(l)));

    let agg = parse_numeric_csv(&read(&dir, "aggregate.csv"), AGGREGATE_HEADER).unwrap();
    assert_eq!(agg.len(), grid.len());
    for row in &agg {
        assert!((row[1] + row[2] + row[3] + row[4] - 1.0).abs() < 1e-9);
    }

    let sweep = parse_sweep_csv(&read(&dir, "sweep.csv")).unwrap();
    assert_eq!(sweep.len(), 2 * grid.len());
    let last = |label: &str| {
        sweep
            .iter()
            .rev()
            .find(|r| r.scenario == label)
            .unwrap()
            .clone()
    };
    assert!(last("lambda=0.03").loss_pct >= last("lambda=0.2").loss_pct);

    let rows = parse_centrality_csv(&read(&dir, "centrality.csv")).unwrap();
    assert_eq!(rows.len(), CentralityKind::ALL.len());
    for row in rows {
        let (r, p) = row.value.unwrap();
        assert!((-1.0..=1.0).contains(&r) && (0.0..=1.0).contains(&p));
    }

    let edges = read(&dir, "network.edges");
    assert_eq!(
        edges
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .count(),
        60
    );
}

#[test]
fn no_infection_gives_zero_loss_and_zero_variance_rows() {
    let tmp = tempfile::tempdir().unwrap();
    scenario(tmp.path(), "\n[initial]\nx0 = 0.0\n");
    let (code, _, _) = netlock(tmp.path(), &["--config", "scenario.toml", "optimize"]);
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&read(&tmp.path().join("out"), "summary.json")).unwrap();
    assert_eq!(summary["loss_pct"].as_f64().unwrap(), 0.0);
    assert_eq!(summary["mean_lockdown"].as_f64().unwrap(), 0.0);

    // A constant policy carries no information about centrality.
    let (code, _, _) = netlock(
        tmp.path(),
        &["--config", "scenario.toml", "report-centrality"],
    );
    assert_eq!(code, 2);
    let rows = parse_centrality_csv(&read(&tmp.path().join("out"), "centrality.csv")).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.value.as_ref().unwrap_err() == ZERO_VARIANCE));
}

#[test]
fn configuration_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 6] = [
        (
            "[network]\nkind = \"edge-list\"\npath = \"missing.edges\"\n",
            &["generate-network"],
        ),
        (
            "[network]\nkind = \"ring-lattice\"\nn = 20\nmean_degree = 3\n",
            &["generate-network"],
        ),
        ("[sweep]\nlambdas = [0.1]\n", &["sweep"]),
        ("[planner]\nlambda = 0.1\nsurprise = 1\n", &["optimize"]),
        ("", &["calibrate"]),
        ("", &["optimize", "--dt", "-1"]),
    ];
    for (toml, args) in cases {
        fs::write(
            tmp.path().join("bad.toml"),
            format!("schema_version = 1\n{toml}"),
        )
        .unwrap();
        let mut full = vec!["--config", "bad.toml"];
        full.extend_from_slice(args);
        let (code, _, err) = netlock(tmp.path(), &full);
        assert_eq!(code, 1, "{toml} {args:?}: {err}");
        assert!(err.contains("error"), "{err}");
    }
    let (code, _, _) = netlock(tmp.path(), &["--config", "nowhere.toml", "optimize"]);
    assert_eq!(code, 1);
    let (code, _, _) = netlock(tmp.path(), &["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn unidentified_calibration_exits_with_two() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let tmp = tempfile::tempdir().unwrap();
    let config = fixtures.join("flat.toml");
    let out = tmp.path().join("out");
    let (code, _, err) = netlock(
        tmp.path(),
        &[
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "calibrate",
        ],
    );
    assert_eq!(code, 2, "{err}");
    let result: serde_json::Value = serde_json::from_str(&read(&out, "calibration.json")).unwrap();
    assert_eq!(result["identified"], false);
}

#[test]
fn simulate_accepts_a_policy_file() {
    let tmp = tempfile::tempdir().unwrap();
    scenario(tmp.path(), "");
    let (code, _, _) = netlock(tmp.path(), &["--config", "scenario.toml", "optimize"]);
    assert_eq!(code, 0);
    fs::write(
        tmp.path().join("replay.toml"),
        format!("{SCENARIO}\n[simulate]\npolicy = \"out/policy.csv\"\n"),
    )
    .unwrap();
    let (code, _, err) = netlock(
        tmp.path(),
        &["--config", "replay.toml", "--out", "replay", "simulate"],
    );
    assert_eq!(code, 0, "{err}");
    // Replaying the optimal policy reproduces its trajectory.
    assert_eq!(
        read(&tmp.path().join("out"), "aggregate.csv"),
        read(&tmp.path().join("replay"), "aggregate.csv")
    );
}
