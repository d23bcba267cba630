use std::process::Command;

use cyclic_zeta::curve::CurveSpec;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclic-zeta"))
        .args(args)
        .env_remove("ZETA_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn fermat_quintic_json() {
    let (code, out, _) = run(&["--p", "10007", "--r", "5", "--poly", "1,0,0,0,0,1", "--output", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let fp: Vec<String> = v["frobenius_polynomial"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.to_string())
        .collect();
    assert_eq!(fp[0], "1004207356863602508537649");
    assert_eq!(fp[4], "30084088241167203");
    assert_eq!(fp[8], "300420147");
    assert_eq!(fp[12], "1");
    assert_eq!(v["N"], 4);
    assert_eq!(v["U"].to_string(), "[-1,0,0,0,1]");
}

#[test]
fn verify_small_elliptic_curve() {
    let (code, out, _) = run(&["--p", "13", "--r", "2", "--poly", "1,1,0,1", "--verify", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("#C(F_p^1): 18 (verified)"));
    assert!(out.contains("#C(F_p^2): 180 (verified)"));
}

#[test]
fn p_too_small_exits_two() {
    let (code, _, err) = run(&["--p", "7", "--r", "5", "--poly", "1,0,0,0,0,1"]);
    assert_eq!(code, 2);
    assert!(err.contains("PTooSmall"));
    assert!(err.contains("125"));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(run(&["--p", "13"]).0, 2);
    assert_eq!(run(&["--p", "12", "--r", "2", "--poly", "1,1,0,1"]).0, 2);
    assert_eq!(run(&["--p", "13", "--r", "2", "--poly", "1,2,1"]).0, 2);
}

#[test]
fn json_round_trips() {
    let (code, out, _) = run(&[
        "--p", "1009", "--r", "3", "--poly", "2,-1,3,1,5", "--output", "json", "--timing", "--threads", "2",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let f: Vec<i64> = serde_json::from_value(v["F"].clone()).unwrap();
    let c = CurveSpec::new(v["p"].as_u64().unwrap(), v["r"].as_u64().unwrap(), &f, None).unwrap();
    assert_eq!(c.coeffs, vec![2, -1, 3, 1, 5]);
    assert_eq!(v["N"].as_u64().unwrap(), c.n as u64);
    let again: serde_json::Value = serde_json::from_str(&v.to_string()).unwrap();
    assert_eq!(again, v);
    for phase in ["expansion", "horizontal", "vertical", "lift"] {
        assert!(v["timings_ms"][phase].as_f64().is_some());
    }
    let l = v["L"].as_array().unwrap();
    assert_eq!(l.len() as u64, 2 * c.g + 1);
}

#[test]
fn plain_and_json_agree() {
    let args = ["--p", "211", "--r", "3", "--poly", "2,0,1,0,0,3,1"];
    let (_, plain, _) = run(&args);
    let mut j = args.to_vec();
    j.extend(["--output", "json"]);
    let (_, json, _) = run(&j);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let l: Vec<String> = v["L"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    assert!(plain.contains(&format!("L: [{}]", l.join(", "))));
    assert!(plain.contains(&format!("#C(F_p^1): {}", v["counts"]["1"])));
}

#[test]
fn strategies_give_the_same_l() {
    let base = ["--p", "1009", "--r", "3", "--poly", "2,-1,3,1,5", "--output", "json"];
    let get = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        let v: serde_json::Value = serde_json::from_str(&run(&a).1).unwrap();
        v["L"].clone()
    };
    let l = get(&["--strategy", "bsgs"]);
    assert_eq!(l, get(&["--strategy", "naive"]));
    assert_eq!(l, get(&["--strategy", "bsgs", "--interpolation", "off"]));
}
