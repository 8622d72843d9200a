//! Exit-code and file contract of the qcots binary: 0 success/accept,
//! 1 reject or attack/analysis failure, 2 malformed input.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcots(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcots"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_params_257(dir: &Path) {
    fs::write(
        dir.join("params.json"),
        r#"{"p": 257, "w_e": 20, "w_y": 20, "w_c": 5, "h_seed": 7}"#,
    )
    .expect("write params");
}

#[test]
fn round_trip_and_rejection_exit_codes() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    write_params_257(d);
    assert_eq!(code(&qcots(d, &["keygen", "--params", "params.json", "--seed", "42", "--out", "demo"])), 0);
    assert_eq!(
        code(&qcots(d, &["sign", "--key", "demo.sk.json", "--message", "hello", "--seed", "1", "--out", "demo.sig.json"])),
        0
    );
    let accept = qcots(d, &["verify", "--key", "demo.vk.json", "--message", "hello", "--sig", "demo.sig.json"]);
    assert_eq!(code(&accept), 0);
    assert!(String::from_utf8_lossy(&accept.stdout).contains("accept"));
    let reject = qcots(d, &["verify", "--key", "demo.vk.json", "--message", "other", "--sig", "demo.sig.json"]);
    assert_eq!(code(&reject), 1);
    assert!(String::from_utf8_lossy(&reject.stdout).contains("reject"));
}

#[test]
fn truncated_signature_file_is_malformed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    write_params_257(d);
    qcots(d, &["keygen", "--params", "params.json", "--seed", "42", "--out", "demo"]);
    qcots(d, &["sign", "--key", "demo.sk.json", "--message", "hello", "--seed", "1", "--out", "demo.sig.json"]);
    let full = fs::read(d.join("demo.sig.json")).expect("read sig");
    fs::write(d.join("trunc.sig.json"), &full[..full.len() / 2]).expect("write truncated");
    assert_eq!(
        code(&qcots(d, &["verify", "--key", "demo.vk.json", "--message", "hello", "--sig", "trunc.sig.json"])),
        2
    );
}

#[test]
fn corrupted_response_bit_rejects() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    write_params_257(d);
    qcots(d, &["keygen", "--params", "params.json", "--seed", "42", "--out", "demo"]);
    qcots(d, &["sign", "--key", "demo.sk.json", "--message", "hello", "--seed", "1", "--out", "demo.sig.json"]);

    // Payload layout is c || z0 || z1 at ceil(p/8) = 33 bytes each; flip one
    // bit of one byte inside z0 by editing its hex.
    let text = fs::read_to_string(d.join("demo.sig.json")).expect("read sig");
    let mut env: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    let payload = env["payload"].as_str().expect("payload").to_owned();
    let idx = 66 + 20;
    let mut chars: Vec<char> = payload.chars().collect();
    let old = chars[idx].to_digit(16).expect("hex digit");
    chars[idx] = char::from_digit(old ^ 1, 16).expect("hex digit");
    env["payload"] = serde_json::Value::String(chars.into_iter().collect());
    fs::write(d.join("bad.sig.json"), serde_json::to_string(&env).expect("serialize")).expect("write");

    assert_eq!(
        code(&qcots(d, &["verify", "--key", "demo.vk.json", "--message", "hello", "--sig", "bad.sig.json"])),
        1
    );
}

#[test]
fn attack_recovers_planted_key_at_p13() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    fs::write(d.join("p13.json"), r#"{"p": 13, "w_e": 2, "w_y": 2, "w_c": 2, "h_seed": 3}"#)
        .expect("write params");
    qcots(d, &["keygen", "--params", "p13.json", "--seed", "1", "--out", "tiny"]);
    qcots(d, &["sign", "--key", "tiny.sk.json", "--message", "probe", "--seed", "7", "--out", "tiny.sig.json"]);
    let out = qcots(
        d,
        &["attack", "--vk", "tiny.vk.json", "--sig", "tiny.sig.json", "--sk", "tiny.sk.json",
          "--b", "2", "--seed", "11", "--out", "outcome.json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("outcome.json")).expect("read outcome"))
            .expect("valid json");
    assert_eq!(record["success"], serde_json::Value::Bool(true));
    assert_eq!(record["matches_planted"], serde_json::Value::Bool(true));
    assert_eq!(record["recovered_key"]["kind"], "signing-key");
}

#[test]
fn attack_with_vacuous_threshold_exhausts_and_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    write_params_257(d);
    qcots(d, &["keygen", "--params", "params.json", "--seed", "42", "--out", "demo"]);
    qcots(d, &["sign", "--key", "demo.sk.json", "--message", "hello", "--seed", "1", "--out", "demo.sig.json"]);
    let out = qcots(
        d,
        &["attack", "--vk", "demo.vk.json", "--sig", "demo.sig.json", "--b", "6",
          "--max-iterations", "3", "--seed", "9", "--out", "outcome.json"],
    );
    assert_eq!(code(&out), 1);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("outcome.json")).expect("read outcome"))
            .expect("valid json");
    assert_eq!(record["success"], serde_json::Value::Bool(false));
    assert_eq!(record["estimate_weight"], 0, "b = w_c + 1 must give an empty estimate");
    assert_eq!(record["used_isd"], serde_json::Value::Bool(true));
    assert_eq!(record["isd_iterations"], 3);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    write_params_257(d);
    for (records, summary, threads) in
        [("r1.csv", "s1.csv", "1"), ("r2.csv", "s2.csv", "2")]
    {
        let out = qcots(
            d,
            &["simulate", "--params", "params.json", "--trials", "60", "--b", "4",
              "--seed", "5", "--out", records, "--summary-out", summary, "--threads", threads],
        );
        assert_eq!(code(&out), 0);
    }
    let r1 = fs::read(d.join("r1.csv")).expect("read");
    let r2 = fs::read(d.join("r2.csv")).expect("read");
    assert_eq!(r1, r2, "records differ across thread counts");
    assert_eq!(
        fs::read(d.join("s1.csv")).expect("read"),
        fs::read(d.join("s2.csv")).expect("read"),
        "summaries differ across thread counts"
    );
    let text = String::from_utf8(r1).expect("utf8");
    assert!(text.starts_with("trial,residual_weight,estimator_exact\n"));
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn analyze_reports_row_errors_and_exits_nonzero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    fs::write(
        d.join("sets.json"),
        r#"[{"p": 257, "w_e": 20, "w_y": 20, "w_c": 5, "h_seed": 7, "b": 3},
            {"p": 31, "w_e": 20, "w_y": 3, "w_c": 2, "h_seed": 1}]"#,
    )
    .expect("write sets");
    let out = qcots(d, &["analyze", "--params", "sets.json", "--out", "reports.csv"]);
    assert_eq!(code(&out), 1);
    let csv = fs::read_to_string(d.join("reports.csv")).expect("read csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("257,"));
    assert!(lines[2].starts_with("# error:"));

    fs::write(d.join("empty.json"), "[]").expect("write empty");
    let out = qcots(d, &["analyze", "--params", "empty.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn unknown_params_spec_is_malformed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    let out = qcots(d, &["keygen", "--params", "no-such-preset", "--seed", "1", "--out", "x"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a preset name"));
}
