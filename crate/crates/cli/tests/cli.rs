//! End-to-end tests against the built binary: every documented exit code is
//! exercised, and seeded commands are byte-for-byte deterministic.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::sync::atomic::{AtomicU32, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ulmforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

static FILE_ID: AtomicU32 = AtomicU32::new(0);

fn temp_file(content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ulmforge-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(format!("input-{}.txt", FILE_ID.fetch_add(1, Ordering::SeqCst)));
    fs::write(&path, content).expect("write temp file");
    path
}

/// A parseable structure that is not a model: the non-zero point has no
/// self-addition, no label chain, and no inverse.
const DAMAGED: &str = "p=2; N=2; zero=0\nR0 = {0}\nR1 = {1}\nP[0,0->0] = {(0,0,0)}";

#[test]
fn encode_then_check_round_trips_with_exit_zero() {
    let enc = run(&["encode", "p=2; cyclic=[2]; divisible=0", "--free", "1"]);
    assert_eq!(code(&enc), 0, "{}", stderr(&enc));
    let out = stdout(&enc);
    assert!(out.starts_with("p=2; N=5; zero="), "unexpected encoding: {out}");

    let path = temp_file(&out);
    let chk = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&chk), 0, "{}", stdout(&chk));
    let text = stdout(&chk);
    assert!(text.contains("A1: PASS") && text.contains("A8: PASS"), "{text}");
}

#[test]
fn check_reads_stdin() {
    let enc = stdout(&run(&["encode", "p=3; cyclic=[1]; divisible=0"]));
    let mut child = bin()
        .args(["check", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("spawn");
    child.stdin.as_mut().unwrap().write_all(enc.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn damaged_structure_fails_check_with_exit_one() {
    let path = temp_file(DAMAGED);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"), "{}", stdout(&out));
}

#[test]
fn garbage_input_exits_two() {
    let path = temp_file("this is not a structure");
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error"), "{}", stderr(&out));

    let missing = run(&["check", "/nonexistent/ulmforge-input.txt"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn iso_distinguishes_equal_and_different_groups() {
    let a = temp_file(&stdout(&run(&["encode", "p=2; cyclic=[2]; divisible=0"])));
    let b = temp_file(&stdout(&run(&["encode", "p=2; cyclic=[2]; divisible=0"])));
    let same = run(&["iso", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&same), 0);
    assert!(stdout(&same).starts_with("isomorphic: ["), "{}", stdout(&same));

    let c = temp_file(&stdout(&run(&["encode", "p=2; cyclic=[1,1]; divisible=0"])));
    let diff = run(&["iso", a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(code(&diff), 1);
    assert_eq!(stdout(&diff).trim(), "not isomorphic");
}

#[test]
fn decode_recovers_group_and_free_count() {
    let enc = stdout(&run(&["encode", "p=2; cyclic=[2,1]; divisible=0", "--free", "2"]));
    let path = temp_file(&enc);
    let out = run(&["decode", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("group: p=2; cyclic=[2,1]; divisible=0"), "{text}");
    assert!(text.contains("free: 2"), "{text}");
}

#[test]
fn decode_refuses_non_models_with_exit_one() {
    let path = temp_file(DAMAGED);
    let out = run(&["decode", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not a model"), "{}", stdout(&out));
}

#[test]
fn reduce_prints_the_lifted_group() {
    let enc = stdout(&run(&["encode", "p=2; cyclic=[1]; divisible=0"]));
    let path = temp_file(&enc);
    let out = run(&["reduce", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // Order-2 group, domain of two points: the exponent lifts and two new
    // order-2 summands join.
    assert_eq!(stdout(&out).trim(), "p=2; cyclic=[2,1,1]; divisible=0");
}

#[test]
fn ulm_prints_the_full_profile() {
    let out = run(&["ulm", "p=2; cyclic=[2,1]; divisible=0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "p=2; u={0:1,1:1}; div=0; len=2");

    let infinite = run(&["ulm", "p=3; cyclic=[2]; divisible=1"]);
    assert_eq!(code(&infinite), 0);
    assert_eq!(stdout(&infinite).trim(), "p=3; u={1:1}; div=1; len=2");
}

#[test]
fn eval_exit_codes_follow_verdicts() {
    let t = run(&["eval", "p=2; cyclic=[2]; divisible=0", "phi[1,>=1]"]);
    assert_eq!(code(&t), 0, "{}", stderr(&t));
    assert!(stdout(&t).contains("verdict: true"), "{}", stdout(&t));

    let f = run(&["eval", "p=2; cyclic=[2]; divisible=0", "phi[0,>=1]"]);
    assert_eq!(code(&f), 1);
    assert!(stdout(&f).contains("verdict: false"), "{}", stdout(&f));

    let psi = run(&[
        "eval",
        "p=2; cyclic=[3]; divisible=0",
        "psi[2]",
        "--element",
        "cyclic=(4); prufer=()",
    ]);
    assert_eq!(code(&psi), 0, "{}", stderr(&psi));

    let needs_element = run(&["eval", "p=2; cyclic=[3]; divisible=0", "psi[2]"]);
    assert_eq!(code(&needs_element), 2);

    let rank = run(&["eval", "p=2; cyclic=[]; divisible=2", "divrank[=2]", "--denom-bound", "2"]);
    assert_eq!(code(&rank), 0, "{}", stderr(&rank));
}

#[test]
fn selftest_is_deterministic_and_passes() {
    let one = run(&["selftest", "--p", "2", "--seed", "5"]);
    let two = run(&["selftest", "--p", "2", "--seed", "5"]);
    assert_eq!(code(&one), 0, "{}", stdout(&one));
    assert_eq!(stdout(&one), stdout(&two), "selftest output must be reproducible");
    let text = stdout(&one);
    assert!(text.contains("PASS model"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("passed "), "{text}");
}

#[test]
fn injected_defects_flip_the_selftest_exit_code() {
    let out = run(&["selftest", "--p", "2", "--inject-defects"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL injected"), "{text}");
}

#[test]
fn non_prime_corpus_is_a_usage_error() {
    let out = run(&["selftest", "--p", "6"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error"), "{}", stderr(&out));
}

#[test]
fn gen_is_deterministic_and_yields_models() {
    let a = run(&["gen", "--seed", "4", "--samples", "3"]);
    let b = run(&["gen", "--seed", "4", "--samples", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));

    let via_env = bin()
        .args(["gen", "--samples", "3"])
        .env("ULMFORGE_SEED", "4")
        .output()
        .expect("binary runs");
    assert_eq!(stdout(&a), stdout(&via_env), "env seed must match --seed");

    let first_block = stdout(&a).split("\n---\n").next().unwrap().to_string();
    let path = temp_file(&first_block);
    let chk = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&chk), 0, "generated sample must be a model:\n{first_block}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["check"])), 2);
    assert_eq!(code(&run(&["--format", "json", "ulm", "p=2; cyclic=[]; divisible=0"])), 2);
    let ok = run(&["--format", "text", "ulm", "p=2; cyclic=[]; divisible=0"]);
    assert_eq!(code(&ok), 0);
}
