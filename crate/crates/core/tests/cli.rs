use std::process::{Command, Output};

fn lcq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcq")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_the_mean() {
    let o = lcq(&["eval", "--mean", "Lk", "--k", "2", "--point", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("value: 2.386852807234541"), "{}", stdout(&o));
    let o = lcq(&["eval", "--mean", "Ext", "--k", "2", "--point", "0.5,2"]);
    assert!(stdout(&o).contains("value: 1\n"));
}

#[test]
fn iterate_reaches_sqrt_six() {
    let o = lcq(&["--format", "json", "iterate", "--m1", "comp-L2", "--m2", "L2", "--start", "2,3", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-12);
}

#[test]
fn exit_codes_follow_the_table() {
    let usage = lcq(&["eval", "--point"]);
    assert_eq!(usage.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));

    let domain = lcq(&["eval", "--mean", "Lk", "--point", "0.25,3"]);
    assert_eq!(domain.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("0.25"));

    let failed = lcq(&["check", "--suite", "krull", "--gen", "powerlog:c=1,alpha=1", "--k", "3"]);
    assert_eq!(failed.status.code(), Some(2));

    // f underflows to zero at the product 1e600
    let eval = lcq(&["quotient", "--gen", "canonical:c=1,k=2", "--k", "2", "--point", "1e300,1e300"]);
    assert_eq!(eval.status.code(), Some(70), "{}", String::from_utf8_lossy(&eval.stderr));
}
