use std::path::Path;
use std::process::{Command, Output};

fn fsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsphere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_values(text: &str, experiment: &str, kind: &str) -> Vec<(Option<usize>, f64)> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[0] == experiment && c[7] == kind)
        .map(|c| (c[3].parse().ok(), c[8].parse().unwrap()))
        .collect()
}

#[test]
fn norms_vp_plateau_and_step_growth() {
    let out = fsphere(&["norms", "--filter", "vp", "--L", "8,16,32,64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("experiment,filter,d,L,N,p,s,value_kind,value\n"));
    let vp = csv_values(&text, "norms", "operator_norm");
    assert_eq!(vp.iter().map(|r| r.0.unwrap()).collect::<Vec<_>>(), vec![8, 16, 32, 64]);
    assert!(vp.iter().all(|r| r.1 > 1.0 && r.1 < 3.0));
    assert!(vp[3].1 / vp[0].1 < 1.15);

    let out = fsphere(&["norms", "--filter", "step", "--L", "16,32,64,128"]);
    let slope = csv_values(&stdout(&out), "norms", "slope")[0].1;
    assert!((0.4..=0.6).contains(&slope), "{slope}");
}

#[test]
fn norms_counterexample_increases() {
    let out = fsphere(&["norms", "--filter", "counterexample", "--L", "8,16,32,64"]);
    let v = csv_values(&stdout(&out), "norms", "operator_norm");
    assert!(v.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn norms_with_discrete_lower_bounds() {
    let out = fsphere(&["norms", "--filter", "vp", "--L", "4,8", "--probes", "20", "--seed", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let semi = csv_values(&text, "norms", "operator_norm");
    let disc = csv_values(&text, "norms_discrete", "operator_norm");
    assert_eq!(disc.len(), 2);
    for (a, b) in semi.iter().zip(&disc) {
        assert!(b.1 >= 1.0 && b.1 <= 1.2 * a.1, "{a:?} {b:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["norms", "--filter", "hermite:2", "--L", "4,8", "--probes", "10", "--seed", "3"];
    assert_eq!(fsphere(&args).stdout, fsphere(&args).stdout);
    let args = ["identities", "--seed", "42"];
    assert_eq!(fsphere(&args).stdout, fsphere(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fsphere(&["norms", "--filter", "nonsense"]).status.code(), Some(2));
    assert_eq!(fsphere(&["norms", "--L", "8,x"]).status.code(), Some(2));
    assert_eq!(fsphere(&["converge", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(fsphere(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fsphere(&["norms", "--L", "0"]).status.code(), Some(2));
}

#[test]
fn cubature_gen_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r23.rule");
    let p = path.to_str().unwrap();
    let gen = fsphere(&["cubature", "gen", "--degree", "23", "--out", p]);
    assert!(gen.status.success());
    let ok = fsphere(&["cubature", "check", "--file", p, "--degree", "23"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).trim_end().ends_with("pass"));
    let bad = fsphere(&["cubature", "check", "--file", p, "--degree", "25"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).trim_end().ends_with("fail"));
}

#[test]
fn malformed_rule_file_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rule");
    std::fs::write(&path, "2 2 3\n0 0 1 0.5\n").unwrap();
    let out = fsphere(&["cubature", "check", "--file", path.to_str().unwrap(), "--degree", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stderr.is_empty());
    let missing = dir.path().join("missing.rule");
    let out = fsphere(&["cubature", "check", "--file", missing.to_str().unwrap(), "--degree", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn identities_pass() {
    let out = fsphere(&["identities"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines().filter(|l| l.contains(' ')) {
        let v: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(v < 1e-10, "{line}");
    }
    assert!(fsphere(&["identities", "--L", "16", "--r", "2"]).status.success());
}

#[test]
fn converge_reproduction_row() {
    let out = fsphere(&["converge", "--L", "4", "--max-degree", "4", "--discrete", "--p", "inf", "--sup-points", "2000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for exp in ["converge", "converge_discrete"] {
        let rows = csv_values(&text, exp, "lp_error");
        assert_eq!(rows.len(), 1);
        assert!(rows[0].1 <= 1e-9);
    }
}

#[test]
fn converge_l2_slope() {
    let out = fsphere(&["converge", "--s", "2", "--p", "2", "--L", "8,16,32,64,128"]);
    let slope = csv_values(&stdout(&out), "converge", "slope")[0].1;
    assert!(slope <= -2.0, "{slope}");
}

#[test]
fn converge_uses_rule_dir() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let rule = dir.path().join("t11.rule");
    assert!(fsphere(&["cubature", "gen", "--degree", "11", "--out", rule.to_str().unwrap()]).status.success());
    let out = fsphere(&["converge", "--L", "4", "--max-degree", "32", "--rule-dir", d]);
    assert!(out.status.success());
    assert_eq!(csv_values(&stdout(&out), "converge_discrete", "lp_error").len(), 1);
    // No t23.rule in the directory.
    let out = fsphere(&["converge", "--L", "8", "--rule-dir", d]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, format!("# sweep\nfilter=step\nL=1,2\nout={}\n", csv.display())).unwrap();
    let c = cfg.to_str().unwrap();
    assert!(fsphere(&["--config", c, "norms"]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("norms,step,2,1,,,,operator_norm,1.6666666666666667e0"));

    // Command-line flags win over the file.
    assert!(fsphere(&["norms", "--config", c, "--filter", "vp"]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("norms,vp,")));

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    assert_eq!(fsphere(&["--config", c, "norms"]).status.code(), Some(2));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        fsphere(&["--config", missing.to_str().unwrap(), "norms"]).status.code(),
        Some(4)
    );
}

#[test]
fn plot_script_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("n.csv");
    let gp = dir.path().join("n.gp");
    let out = fsphere(&[
        "norms",
        "--L",
        "2,4",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        gp.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(&*csv.to_string_lossy()));
    assert!(Path::new(&csv).exists());
    assert_eq!(fsphere(&["norms", "--L", "2", "--plot", gp.to_str().unwrap()]).status.code(), Some(2));
}
