use std::path::Path;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_a2ilu-bench"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_writes_a_readable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("p.mtx");
    let rhs = dir.path().join("p.rhs");
    run_ok(
        bench()
            .args(["generate", "--kind", "poisson-jump", "--m", "4", "--out"])
            .arg(&mtx)
            .arg("--rhs")
            .arg(&rhs),
    );
    let a = a2ilu::mm::read_matrix_market(&mtx).unwrap();
    let (expect, b) = a2ilu::problems::gen_poisson_jump(4).unwrap();
    assert_eq!(a, expect);
    let values: Vec<f64> = std::fs::read_to_string(&rhs)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values, b);
}

#[test]
fn solve_reports_both_runs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("solve");
    let stdout = run_ok(
        bench()
            .args([
                "solve",
                "--kind",
                "helmholtz",
                "--m",
                "8",
                "--shift",
                "5",
                "--variant",
                "shifted_ilu0",
                "--alpha",
                "0.1",
            ])
            .arg("--out")
            .arg(&prefix),
    );
    assert_eq!(stdout.lines().count(), 3, "{stdout}");
    assert!(stdout.contains("helmholtz_m8_s5"));
    let json = std::fs::read_to_string(dir.path().join("solve.json")).unwrap();
    assert!(json.contains("\"kind\": \"sweep\""));
}

#[test]
fn sweep_from_toml_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("res");
    std::fs::write(
        &cfg,
        format!(
            r#"
acceleration = "both"
[source.generator]
kind = "poisson_jump"
m = 6
[[factorizations]]
variant = "milu0"
omega = [0.0, 0.5, 1.0]
[output]
path = "{}"
format = "csv"
"#,
            out.display()
        ),
    )
    .unwrap();
    run_ok(bench().arg("sweep").arg("--config").arg(&cfg));
    let csv = std::fs::read_to_string(dir.path().join("res.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(!Path::new(&dir.path().join("res.json")).exists());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"source": {"generator": {"kind": "poisson_jump", "m": 7}},
            "factorizations": [{"variant": "shifted_ilu0", "alpha": [0.0, 0.1, 0.2, 0.3]},
                               {"variant": "crout_ilu", "tol": [0.01, 0.05], "m": [2.0]}]}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let prefix = dir.path().join(format!("t{threads}"));
        run_ok(
            bench()
                .env("A2ILU_THREADS", threads)
                .arg("sweep")
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&prefix)
                .args(["--format", "csv"]),
        );
        outputs.push(std::fs::read(dir.path().join(format!("t{threads}.csv"))).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn collection_on_empty_directory_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_ok(bench().arg("collection").arg("--dir").arg(dir.path()));
    assert!(stdout.starts_with("0 matrices, 0 skipped"));
}

#[test]
fn internal_errors_exit_nonzero() {
    let out = bench()
        .args(["sweep", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bench()
        .args(["solve", "--matrix", "/nonexistent.mtx"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bench()
        .args(["generate", "--m", "1", "--out", "/tmp/never.mtx"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn nonconvergence_is_not_an_error() {
    let out = bench()
        .args([
            "solve",
            "--m",
            "6",
            "--max-iters",
            "2",
            "--accelerate",
            "off",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("not_convergent"));
}
