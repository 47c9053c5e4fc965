use std::process::{Command, Output};

use serde_json::Value;

use sdiv_core::divergences::RenyiProfile;
use sdiv_core::oneshot::Frontier;
use sdiv_core::states::random_state;
use sdiv_core::{DensityMatrix, NumericPolicy};

const CHERNOFF: f64 = 0.112_377_446_352_836_84;

fn sdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdiv"))
        .args(args)
        .env_remove("SDIV_DIM_CAP")
        .output()
        .expect("sdiv runs")
}

fn record(args: &[&str]) -> Value {
    let out = sdiv(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json record")
}

fn value(args: &[&str]) -> f64 {
    record(args)["value"].as_f64().expect("finite value")
}

fn error(args: &[&str]) -> Value {
    let out = sdiv(args);
    assert!(!out.status.success(), "{args:?} should fail");
    assert!(out.stdout.is_empty());
    serde_json::from_slice(&out.stderr).expect("json error record")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-11 * b.abs().max(1.0)
}

fn csv_rows(text: &[u8]) -> Vec<Vec<String>> {
    String::from_utf8(text.to_vec())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn xi_one_is_the_chernoff_divergence() {
    let v = value(&["divergence", "--kind", "xi_s", "--s", "1", "--rho", "diag:0.9,0.1", "--sigma", "diag:0.5,0.5"]);
    assert!(close(v, CHERNOFF), "{v}");
    let chernoff = value(&["divergence", "--kind", "chernoff", "--rho", "diag:0.9,0.1", "--sigma", "diag:0.5,0.5"]);
    assert_eq!(v, chernoff);
}

#[test]
fn q_s_on_equal_states_is_one_half() {
    let r = record(&["oneshot", "--kind", "q_s", "--s", "1", "--C", "1", "--rho", "random:2", "--sigma", "diag:0.5,0.5"]);
    assert!(r["value"].as_f64().unwrap() > 0.0);
    let v = value(&["oneshot", "--kind", "q_s", "--s", "1", "--C", "1", "--rho", "diag:0.5,0.5", "--sigma", "diag:0.5,0.5"]);
    assert_eq!(v, 0.5);
}

#[test]
fn oneshot_records_echo_inputs_and_certificates() {
    let r = record(&["oneshot", "--kind", "q_s", "--s", "1", "--rho", "diag:0.9,0.1", "--sigma", "diag:0.5,0.5"]);
    assert!(close(r["value"].as_f64().unwrap(), 5.0 / 14.0));
    assert_eq!(r["inputs"]["rho"], "diag:0.9,0.1");
    assert_eq!(r["inputs"]["C"], 1.0);
    let cert = &r["certificate"];
    assert!(close(cert["alpha"].as_f64().unwrap(), cert["beta"].as_f64().unwrap()));
    assert!(cert["lagrangian_gap"].as_f64().unwrap().abs() <= 1e-7);
}

#[test]
fn witness_pair_beta_epsilon() {
    let base = ["oneshot", "--kind", "beta_eps", "--rho", "diag:0.3,0.7", "--sigma", "diag:1,0", "--eps"];
    assert_eq!(value(&[&base[..], &["0.3"]].concat()), 0.0);
    assert!(close(value(&[&base[..], &["0.1"]].concat()), 2.0 / 3.0));
}

#[test]
fn fig2_s_one_row_equals_chernoff_query() {
    let out = sdiv(&["fig2", "--s-grid", "0.05:1:0.05", "--seed", "4"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let last = rows.iter().find(|r| r[0] == "1").expect("s = 1 row");
    let chernoff = value(&["divergence", "--kind", "chernoff", "--seed", "4"]);
    assert!(close(last[1].parse().unwrap(), chernoff));
    assert_eq!(last[2], "chernoff");
    let xs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn generate_is_deterministic_and_round_trips() {
    let a = sdiv(&["generate", "random:2", "--seed", "9"]);
    let b = sdiv(&["generate", "random:2", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rho = sdiv_core::io::state_from_json(&text, &NumericPolicy::default()).unwrap();
    assert_eq!(rho, random_state(2, None, 9).unwrap());

    let maximally_mixed = sdiv(&["generate", "diag:0.5,0.5"]);
    let rho = sdiv_core::io::state_from_json(std::str::from_utf8(&maximally_mixed.stdout).unwrap(), &NumericPolicy::default());
    assert_eq!(rho.unwrap(), DensityMatrix::maximally_mixed(2).unwrap());
}

#[test]
fn results_equal_library_calls() {
    for seed in [0u64, 5, 17] {
        let rho = random_state(3, None, seed).unwrap();
        let sigma = random_state(3, None, seed + 1).unwrap();
        let profile = RenyiProfile::new(&rho, &sigma).unwrap();
        let frontier = Frontier::new(&rho, &sigma).unwrap();
        let seed_arg = seed.to_string();
        let states = ["--rho", "random:3", "--sigma", "random:3", "--seed", seed_arg.as_str()];
        let q = |extra: &[&str]| value(&[extra, &states[..]].concat());

        assert!(close(q(&["divergence", "--kind", "umegaki"]), profile.umegaki().unwrap()));
        assert!(close(q(&["divergence", "--kind", "d_min"]), profile.d_min().unwrap()));
        assert!(close(q(&["divergence", "--kind", "petz", "--alpha", "0.3"]), profile.petz_renyi(0.3).unwrap().unwrap()));
        assert!(close(q(&["divergence", "--kind", "q", "--alpha", "0.7"]), profile.q_alpha(0.7).unwrap()));
        assert!(close(q(&["divergence", "--kind", "xi_s", "--s", "2.5"]), profile.xi_s(2.5).unwrap().unwrap()));
        assert!(close(q(&["divergence", "--kind", "fixed_point", "--s", "0.5"]), profile.solve_fixed_point(0.5).unwrap().unwrap()));
        assert!(close(q(&["divergence", "--kind", "lipschitz", "--c", "0.5"]), profile.lipschitz_constant(0.5).unwrap().unwrap()));
        let r = 0.5 * profile.umegaki().unwrap();
        let r_arg = r.to_string();
        assert!(close(q(&["divergence", "--kind", "hoeffding", "--r", r_arg.as_str()]), profile.hoeffding_b(r).unwrap().unwrap()));

        assert!(close(q(&["oneshot", "--kind", "q_s", "--s", "2", "--C", "0.5"]), frontier.q_s_c(2.0, 0.5).unwrap().value));
        assert!(close(q(&["oneshot", "--kind", "q_min"]), frontier.q_s_c(1.0, 1.0).unwrap().value));
        assert!(close(q(&["oneshot", "--kind", "beta_eps", "--eps", "0.05"]), frontier.beta_epsilon(0.05).unwrap().value));
        assert!(close(q(&["oneshot", "--kind", "p_err", "--p", "0.3"]), frontier.p_err_bayes(0.3).unwrap().value));
        assert!(close(q(&["oneshot", "--kind", "p_err_s", "--s", "0.5", "--C", "2"]), frontier.p_err_s_c(0.5, 2.0).unwrap().value));
    }
}

#[test]
fn infinite_values_are_serialized_as_inf() {
    let r = record(&["divergence", "--kind", "umegaki", "--rho", "pure:0", "--sigma", "pure:1"]);
    assert_eq!(r["value"], "inf");
}

#[test]
fn boundary_csv_matches_likelihood_ratio_sort() {
    let out = sdiv(&["boundary", "--rho", "diag:0.9,0.1", "--sigma", "diag:0.5,0.5"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(points.len(), 3);
    for (got, want) in points.iter().zip([(0.0, 1.0), (0.1, 0.5), (1.0, 0.0)]) {
        assert!((got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12, "{got:?}");
    }
}

#[test]
fn trace_and_fig1_emit_csv() {
    let out = sdiv(&["trace", "--s", "1", "--n-max", "3"]);
    assert!(out.status.success());
    assert_eq!(csv_rows(&out.stdout).len(), 3);

    let out = sdiv(&["fig1", "--s", "0.5", "--r-grid", "0.1:0.5:0.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("r,B,line1,line_s"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = sdiv(&["fig2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("s,xi_s,label"));
}

#[test]
fn validate_reports_states_and_channels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("channel.json");
    let ch = sdiv_core::channels::random_channel(2, 3, 2, 1).unwrap();
    std::fs::write(&path, sdiv_core::io::channel_to_json(&ch)).unwrap();
    let r = record(&["validate", "diag:0.5,0.5", "random:3:1", "--channel", path.to_str().unwrap()]);
    assert_eq!(r["valid"], true);
    assert_eq!(r["states"][1]["rank"], 1);
    assert_eq!(r["channel"]["d_out"], 3);

    let bad = error(&["validate", "diag:0.6,0.6"]);
    assert_eq!(bad["error"]["kind"], "invalid_trace");
    assert_eq!(bad["error"]["module"], "states");
}

#[test]
fn failures_produce_error_records() {
    let e = error(&["divergence", "--kind", "xi_s", "--s=-1"]);
    assert_eq!(e["error"]["module"], "divergences");
    assert_eq!(e["error"]["kind"], "domain");

    let e = error(&["oneshot", "--kind", "q_s"]);
    assert_eq!(e["error"]["kind"], "usage");

    let e = error(&["divergence", "--kind", "umegaki", "--rho", "diag:0.5,0.5", "--sigma", "random:3"]);
    assert_eq!(e["error"]["kind"], "dimension_mismatch");

    let e = error(&["fig2", "--s-grid", "1:0:0.1"]);
    assert_eq!(e["error"]["module"], "asymptotics");

    let e = error(&["nonsense"]);
    assert_eq!(e["error"]["module"], "cli");

    let e = error(&["trace", "--s", "1", "--n-max", "9"]);
    assert_eq!(e["error"]["kind"], "usage");
}

#[test]
fn policy_overrides_come_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sdiv"))
        .args(["trace", "--s", "1", "--n-max", "3"])
        .env("SDIV_DIM_CAP", "4")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "resource");

    let out = Command::new(env!("CARGO_BIN_EXE_sdiv"))
        .args(["divergence", "--kind", "umegaki"])
        .env("SDIV_NOT_A_FIELD", "1")
        .output()
        .unwrap();
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["module"], "policy");
}
