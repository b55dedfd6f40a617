use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fliess"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_table_row() {
    let o = run(&["run", config("lc_constant.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), fliess::harness::REPORT_HEADER);
    assert_eq!(
        lines.next().unwrap(),
        "1,0.5,50,0.01,10,0.01,0.5,0.5,2,2.0412,0.041196,0.0354688,0.000976562,statement"
    );
}

#[test]
fn tables_pass() {
    for which in ["lc", "gc"] {
        let o = run(&["table", which]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains(&format!("{which}: 6/6 rows pass")));
    }
}

#[test]
fn trajectory_is_deterministic() {
    let cfg = config("gc_constant.json");
    let a = run(&["trajectory", cfg.to_str().unwrap(), "--resolution", "25"]);
    let b = run(&["trajectory", cfg.to_str().unwrap(), "--resolution", "25"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("t,y,N,y_hat_J,realization\n"));
    assert_eq!(text.lines().count(), 27);
}

#[test]
fn bounds_summary() {
    let o = run(&["bounds", config("lc_constant.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("e_hat[statement]: 0.0354688"));
    assert!(text.contains("e_hat[exact_sum]: 0.0386914"));
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["run", missing.to_str().unwrap()]).status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(run(&["run", broken.to_str().unwrap()]).status.code(), Some(2));

    // ∫u = 2 is outside the factorial series' convergence region
    let domain = dir.path().join("domain.json");
    std::fs::write(
        &domain,
        r#"{"system": {"builtin": "lc_factorial"}, "input": {"channels": [{"type": "constant", "value": 1.0}]},
            "T": 2.0, "L": 50, "J": 10}"#,
    )
    .unwrap();
    let o = run(&["run", domain.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("y_T"));
}

#[test]
fn unknown_table_is_a_usage_error() {
    let o = run(&["table", "xx"]);
    assert!(!o.status.success());
}
