use std::fs;
use std::process::{Command, Output};

fn sad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sad"))
        .args(args)
        .env_remove("SAD_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = sad(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn lorenz_pattern_and_jacobian() {
    assert_eq!(stdout(&["pattern"]), "A = [1 1 0;\n 1 1 1;\n 1 1 1];\n");
    assert_eq!(stdout(&["jacobian"]), "J = [-10 10 0;\n 2 -1 -8;\n 20 8 -28];\n");
}

#[test]
fn swapped_roles() {
    assert_eq!(stdout(&["pattern", "--swap-roles"]), "A = [1 0 0;\n 0 1 0;\n 0 0 1];\n");
    assert_eq!(
        stdout(&["jacobian", "--swap-roles", "--digits", "3"]),
        "J = [12 0 0;\n 0 8 0;\n 0 0 -0.667];\n"
    );
}

#[test]
fn config_overrides_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lorenz.cfg");
    fs::write(&cfg, "# stronger forcing\nrho = 30\n").unwrap();
    let j = stdout(&["jacobian", "--config", cfg.to_str().unwrap()]);
    assert!(j.contains("\n 29.333333333333332 -1 -8;"), "{j}");

    fs::write(&cfg, "rho 30\n").unwrap();
    assert_eq!(sad(&["jacobian", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn microgrid_matrix_market_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.mtx");
    stdout(&["pattern", "--model", "microgrid", "-N", "30", "--out", &format!("mm:{}", path.display())]);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("%%MatrixMarket matrix coordinate"));
    assert_eq!(lines.next(), Some("222 222 935"));
    assert_eq!(lines.count(), 935);
}

#[test]
fn seeded_output_is_reproducible() {
    let args = ["jacobian", "--model", "microgrid", "-N", "3", "--seed", "7"];
    assert_eq!(stdout(&args), stdout(&args));
    assert_ne!(stdout(&args), stdout(&["jacobian", "--model", "microgrid", "-N", "3", "--seed", "8"]));
}

#[test]
fn solve_lorenz() {
    let out = stdout(&["solve"]);
    assert!(out.starts_with("x = [8.48528137423857"), "{out}");
}

#[test]
fn simulate_decay_one_step() {
    let out = stdout(&["simulate", "--model", "decay", "--h", "0.1", "--t-end", "0.1"]);
    assert_eq!(out.lines().collect::<Vec<_>>(), ["t,v", "0,1", "0.1,0.9090909090909091"]);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["pattern", "--model", "nope"][..],
        &["simulate", "--model", "decay", "--h", "0"],
        &["simulate", "--model", "lorenz"],
        &["bench-scaling"],
    ] {
        assert_eq!(sad(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bench_outputs() {
    let out = sad(&["bench-scaling", "-N", "2", "--reps", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit skipped"));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("model,N,dim,mode,calls,total_eval_s,per_call_us"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dense.csv");
    stdout(&["bench-dense", "-N", "2,4", "--reps", "2", "--out", path.to_str().unwrap()]);
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r.contains(",dense,")));
}
