use std::path::Path;
use std::process::{Command, Output};

fn hris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hris")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_one_row_per_value_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eta.csv");
    let res = hris(&[
        "simulate",
        "--values",
        "5,10",
        "--trials",
        "3",
        "--methods",
        "proposed,no_ris",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "variable,value,method,mean_se,min_se,max_se,mean_gamma_db,trials"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("eta_db,5,proposed,"));
    assert!(lines[4].ends_with(",3"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "N = 12\nL = 3\nsweep = \"L\"\nvalues = [1, 2]\ntrials = 50\n").unwrap();
    let out = dir.path().join("l.csv");
    let res = hris(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--methods",
        "proposed",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\nL,1,proposed,"));
    assert!(text.contains("\nL,2,proposed,"));
    assert!(text.trim_end().ends_with(",2"));
}

#[test]
fn bad_inputs_exit_with_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = out.to_str().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["simulate", "--values", "10,5", "--out", o], "increasing"),
        (&["simulate", "--methods", "proposed,bogus", "--out", o], "bogus"),
        (&["simulate", "--sweep", "L", "--values", "200", "--out", o], "L"),
        (
            &["simulate", "--methods", "oracle", "--values", "10", "--out", o],
            "oracle",
        ),
        (&["gap-audit", "--delta", "1.5"], "delta"),
    ];
    for (args, needle) in cases {
        let res = hris(args);
        assert_eq!(res.status.code(), Some(1), "{args:?}: {}", stderr(&res));
        assert!(stderr(&res).contains(needle), "{args:?}: {}", stderr(&res));
    }
    assert!(!Path::new(o).exists());
}

#[test]
fn missing_config_file_is_reported() {
    let res = hris(&[
        "simulate",
        "--config",
        "/nonexistent/run.toml",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("/nonexistent/run.toml"));
}

#[test]
fn gap_audit_passes_at_eta_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "N = 8\nL = 2\n").unwrap();
    let res = hris(&[
        "gap-audit",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "5",
        "--delta",
        "0.1",
        "--eta-at-bound",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(stdout.lines().count(), 6);
    assert!(!stdout.contains("NO"));
}

#[test]
fn gap_audit_refuses_oversized_oracle() {
    let res = hris(&["gap-audit", "--trials", "1", "--delta", "0.1"]);
    assert_eq!(res.status.code(), Some(1));
}
