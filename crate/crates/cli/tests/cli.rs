use std::fs;
use std::process::{Command, Output};

fn isogauge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isogauge"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(isogauge(&[]).status.code(), Some(2));
    assert_eq!(isogauge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        isogauge(&["verify", "--trials", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(isogauge(&["suite", "nope"]).status.code(), Some(2));
    assert_eq!(
        isogauge(&["hermite", "beta0", "--activation", "cosh"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn beta0_prints_full_precision() {
    let o = isogauge(&["hermite", "beta0", "--activation", "exp"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let b: f64 = row[2].parse().unwrap();
    assert!((b - (2.0 - 1.0 / (std::f64::consts::E - 1.0))).abs() < 1e-12);
    // mantissa digits
    assert!(row[2].split('e').next().unwrap().len() >= 17);
}

#[test]
fn meanfield_trace_has_depth_plus_one_rows() {
    let o = isogauge(&[
        "meanfield",
        "run",
        "--activation",
        "tanh",
        "--n",
        "4",
        "--rho0",
        "0.9",
        "--depth",
        "12",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 13);
}

#[test]
fn simulate_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("net.cfg");
    fs::write(
        &cfg,
        "width = 64\nbatch = 4\ndepth = 6\nruns = 2\nactivation = tanh\nseed = 5\n",
    )
    .unwrap();
    let csv = dir.path().join("trace.csv");
    let svg = dir.path().join("trace.svg");
    let o = isogauge(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 7);
    let o = isogauge(&[
        "plot",
        "--in",
        csv.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
        "--series",
        "iso_gap",
        "--group",
        "run",
        "--logy",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
}

#[test]
fn bad_config_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "width = 64\nwidht = 3\n").unwrap();
    let o = isogauge(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        "/dev/null",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_isogauge"))
            .env("ISOGAUGE_THREADS", threads)
            .args([
                "suite",
                "ablations",
                "--smoke",
                "--depth",
                "5",
                "--width",
                "50",
                "--out-dir",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("ablations.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("4", "b"));
    let o = Command::new(env!("CARGO_BIN_EXE_isogauge"))
        .env("ISOGAUGE_THREADS", "0")
        .args(["verify", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
