use std::path::{Path, PathBuf};
use std::process::Command;

use hybrid_trial::cli::report::{config_echo, GRID_HEADER};
use hybrid_trial::cli::{parse_config, CliError};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(configs().join(name)).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-trial"))
}

const SMALL: &str = r#"
seed = 4
replications = 60

[model]
kind = "continuous"
known_sd = 2.0

[design]
n_total = 120
t = [0.3, 0.5]
gamma = [0.3]

[historical_prior]
family = "normal"
components = [{ weight = 1.0, mean = 0.0, sd = 0.25 }]

[simulation]
drift_grid = [-0.2, 0.2]
effect = 0.8
"#;

fn config_error(text: &str) -> (String, String) {
    match parse_config(text) {
        Err(CliError::Config { path, reason }) => (path, reason),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn echo_round_trips_every_shipped_config() {
    for name in [
        "main.toml",
        "sensitivity.toml",
        "mixture.toml",
        "binary.toml",
        "case_study.toml",
    ] {
        let parsed = parse_config(&read(name)).unwrap();
        let again = parse_config(&config_echo(&parsed.file).unwrap()).unwrap();
        assert_eq!(parsed, again, "{name}");
    }
}

#[test]
fn main_config_expands_to_the_full_grid() {
    let plan = parse_config(&read("main.toml"))
        .unwrap()
        .simulation
        .unwrap();
    assert_eq!(plan.points.len(), 4 * 9);
    assert_eq!(plan.scenarios.len(), 2 * 4 * 9);
}

#[test]
fn empty_drift_grid_means_no_drift() {
    let text = SMALL.replace("drift_grid = [-0.2, 0.2]", "drift_grid = []");
    let plan = parse_config(&text).unwrap().simulation.unwrap();
    assert!(plan.points.iter().all(|p| p.drift == 0.0));
    assert_eq!(plan.points.len(), 2);
}

#[test]
fn validation_errors_name_the_field() {
    let (path, _) = config_error(&SMALL.replace("gamma = [0.3]", "gamma = [0.3, 1.5]"));
    assert_eq!(path, "design.gamma[1]");
    let (path, reason) = config_error(&SMALL.replace(
        "components = [{ weight = 1.0, mean = 0.0, sd = 0.25 }]",
        "components = [{ weight = 0.5, mean = 0.0, sd = 0.25 }, { weight = 0.2, mean = 0.1, sd = 0.5 }]",
    ));
    assert_eq!(path, "historical_prior.components");
    assert!(reason.contains("historical_prior"));
    let (path, _) = config_error(&SMALL.replace("known_sd = 2.0", "known_sd = -1.0"));
    assert_eq!(path, "model.known_sd");
    let (path, reason) = config_error(&SMALL.replace("effect = 0.8", "effect = 0.8\nbogus = 1"));
    assert_eq!(path, "<document>");
    assert!(reason.contains("bogus"));
}

#[test]
fn simulate_writes_the_grid_table_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let run = |out: &str, workers: &str| {
        let status = bin()
            .args(["--mode", "simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
    };
    run("a", "1");
    run("b", "3");
    let grid = std::fs::read_to_string(dir.path().join("a/grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), GRID_HEADER.join(","));
    assert_eq!(grid.lines().count(), 1 + 4);
    assert!(!grid.contains('\r'));
    for f in [
        "grid.csv",
        "scenarios.csv",
        "summary.json",
        "config_echo.toml",
    ] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        assert_eq!(
            a,
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let echo = std::fs::read_to_string(dir.path().join("a/config_echo.toml")).unwrap();
    assert_eq!(parse_config(&echo).unwrap(), parse_config(SMALL).unwrap());
}

#[test]
fn overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "77", "--reps-override", "20"])
        .output()
        .unwrap();
    assert!(status.status.success());
    let echo =
        parse_config(&std::fs::read_to_string(out.join("config_echo.toml")).unwrap()).unwrap();
    assert_eq!((echo.file.seed, echo.file.replications), (77, 20));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("t = [0.3, 0.5]", "t = [1.2]")).unwrap();
    let out = bin()
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("design.t[0]"));

    let missing = bin()
        .arg("--config")
        .arg(dir.path().join("nope.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!missing.status.success());

    // calibrate needs a [calibration] section
    let good = dir.path().join("good.toml");
    std::fs::write(&good, SMALL).unwrap();
    let out = bin()
        .args(["--mode", "calibrate", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("y"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("calibration"));
}

#[test]
fn calibrate_emits_the_borrowing_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal");
    let status = bin()
        .args(["--mode", "calibrate", "--reps-override", "500", "--config"])
        .arg(configs().join("case_study.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let table = std::fs::read_to_string(out.join("borrowing_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 1 + 7 + 1);
    assert_eq!(lines[0].split(',').count(), 1 + 12);
    assert!(lines[0].starts_with("drift,gamma=0.2_t=0.4,gamma=0.2_t=0.5"));
    assert!(lines[8].starts_with("mean_saved,"));
    let cells = std::fs::read_to_string(out.join("calibration.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 12);
}
