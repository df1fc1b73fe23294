use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scarforge"));
    c.env_remove("SCARFORGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scarforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    let _ = std::fs::remove_file(&p);
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rules_counts_qmbs_c() {
    let o = run(&["rules", "--model", "qmbs-c", "--type", "I"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("type I: 350/350"), "{}", stdout(&o));
}

#[test]
fn unknown_model_exits_4_without_output() {
    let out = scratch("unknown.csv");
    let o = run(&["rules", "--model", "qmbs-z", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(run(&["orbit", "--model", "pxp", "-L", "7"]).status.code(), Some(2));
    assert_eq!(run(&["orbit", "--model", "pxp", "--no-such-flag"]).status.code(), Some(2));
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let o = run(&["orbit", "--model", "pxp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["orbit", "--model", "pxp", "--config", "/no/such/file.cfg"]).status.code(), Some(2));
}

#[test]
fn guard_exits_3() {
    assert_eq!(run(&["sga-check", "-L", "18"]).status.code(), Some(3));
}

#[test]
fn config_file_is_honoured_and_flags_win() {
    let cfg = scratch("len.cfg");
    std::fs::write(&cfg, "# chain length\nlen = 10\n").unwrap();
    let o = run(&["orbit", "--model", "pxp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1010101010\n"));
    let o = run(&["orbit", "--model", "pxp", "--config", cfg.to_str().unwrap(), "-L", "6"]);
    assert!(stdout(&o).contains("101010\n") && !stdout(&o).contains("1010101010"));
}

#[test]
fn sga_holds_at_pi() {
    let o = run(&["sga-check", "-L", "8"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn revivals_csv_is_deterministic_across_threads() {
    let a = scratch("rev1.csv");
    let b = scratch("rev2.csv");
    for (p, t) in [(&a, "1"), (&b, "3")] {
        let o = run(&["revivals", "--model", "pxp", "-L", "10", "--tmax", "15", "--threads", t, "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("# scarforge "));
    assert!(text.contains("# model: pxp\n# L: 10\n# config: "));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,pr,fidelity");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 301);
}

#[test]
fn pxp_pr_floor_tracks_krylov_dimension() {
    let o = run(&["revivals", "--model", "pxp", "-L", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("N_eff = 322,"), "{s}");
    let min: f64 = s.split("min ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    let ratio = min * 322.0;
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "{ratio}");
}

#[test]
fn json_outputs_carry_meta() {
    let out = scratch("orbit.json");
    let o = run(&["orbit", "--model", "qmbs-a", "-L", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["meta"]["command"], "orbit");
    assert_eq!(v["meta"]["L"], 8);
    assert_eq!(v["result"]["length"], 2);
    assert_eq!(v["result"]["cycle"][0], "10101010");
}
