use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofdm-cvqkd"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn moments_table() {
    let o = run(&["moments", "--protocol", "qpsk"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("sigma1_sq"), "{text}");
    assert!(text.contains("qpsk"));
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "sweep",
            "--protocol",
            "256qam",
            "--study",
            "gain",
            "--n",
            "1,8,32,64",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn json_output() {
    let o = run(&[
        "optimize",
        "--protocol",
        "gaussian",
        "--format",
        "json",
        "--n-max",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"schema_version\": 1"), "{text}");
    assert!(text.contains("\"n_opt\""));
}

#[test]
fn oracle_table() {
    let o = run(&[
        "oracle",
        "--protocol",
        "qpsk",
        "--n",
        "4",
        "--mu",
        "0.01",
        "--symbols",
        "5000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(text.starts_with("protocol,n,mu,k,analytic,measured"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("subcarriers within tolerance"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[channel]\nv_aa = 5.0\n").unwrap();
    assert_eq!(
        run(&["noise", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["noise", "--config", "/nonexistent/x.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["skr", "--beta", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--symbols", "10"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let o = run(&[
        "optimize",
        "--protocol",
        "qpsk",
        "--l",
        "2000",
        "--n-max",
        "16",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = Path::new(&blocker).join("out.csv");
    let o = run(&["noise", "--n", "1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
