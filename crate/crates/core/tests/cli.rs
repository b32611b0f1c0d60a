use std::process::{Command, Output};

fn tricf(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tricf"));
    cmd.args(args).env_remove("TRICF_PRECISION").env_remove("TRICF_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let cases: [(&[&str], i32); 6] = [
        (&["tri-seq", "--pair", "3/4,1/2", "--depth", "10"], 0),
        (&["tri-seq", "--pair", "2,1"], 2),
        (&["tri-seq", "--pair", "0.6823278,0.4655712", "--input-bits", "24", "--depth", "60"], 3),
        (&["partition", "--pair", "1/2,1/2", "--n", "2", "--s", "2"], 4),
        (&["partition", "--pair", "3/4,1/2", "--n", "40"], 5),
        (&["diophantine", "--pair", "1/2,1/3", "--b-max", "4"], 1),
    ];
    for (args, code) in cases {
        assert_eq!(tricf(args, &[]).status.code(), Some(code), "{args:?}");
    }
}

#[test]
fn diagnostics_stay_off_stdout() {
    let o = tricf(&["diophantine", "--pair", "1/2,1/3", "--b-max", "4"], &[]);
    assert!(o.stdout.is_empty());
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "exact_zero");
    assert_eq!(diag["schema_version"], 1);
}

#[test]
fn tri_seq_output() {
    let o = tricf(&["tri-seq", "--pair", "3/4,1/2", "--depth", "10"], &[]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["digits"], serde_json::json!(["0", "1"]));
    assert_eq!(v["terminated"], true);
}

#[test]
fn partition_csv_columns() {
    let o = tricf(&["partition", "--pair", "cubic-fixed-point", "--n", "1..12", "--s", "3", "--k", "2"], &[]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,s,k,value,log_value,normalized,min_denom,pole,precision_bits,pole_word"
    );
    assert_eq!(lines.count(), 12);
}

#[test]
fn environment_overrides() {
    let args = ["partition", "--pair", "cubic-fixed-point", "--n", "8", "--s", "3"];
    let env = tricf(&args, &[("TRICF_PRECISION", "128"), ("TRICF_THREADS", "3")]);
    let flags = tricf(&[&args[..], &["--precision", "128", "--threads", "1"]].concat(), &[]);
    assert_eq!(env.stdout, flags.stdout);
    assert!(stdout(&env).contains(",128,"));
    let bad = tricf(&args, &[("TRICF_PRECISION", "16")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_and_construct() {
    let o = tricf(&["verify", "--seed", "42"], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("all invariants passed\n"));

    let o = tricf(&["construct", "--digits", "0,0,0", "--format", "json"], &[]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 3);
    assert!(v["vertices"][0][0].as_str().unwrap().contains('/'));
}

#[test]
fn theorem1_table() {
    let o = tricf(&["theorem1", "--k", "1", "--f", "linear", "--s", "1", "--levels", "2"], &[]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], true);
    assert_eq!(v["levels"][0]["a_next"]["value"], "2981");
    assert_eq!(v["levels"][1]["n_m"], "2986");
}
