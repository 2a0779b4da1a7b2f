use std::path::PathBuf;
use std::process::{Command, Output};

fn data_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polysphere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polysphere")).args(args).output().unwrap()
}

fn last_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().last().unwrap_or("").to_string()
}

#[test]
fn check_reports_the_flag_vector() {
    let out = run(&["check", &data_file("w12_40.facets")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(last_line(&out), "RESULT: flag=(12,40,40,12;120) 2s2s=yes eulerian=yes");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["enumerate"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "9", "--jobs", "0"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "11"]).status.code(), Some(2));
    assert_eq!(run(&["prove-nonpolytopal", &data_file("w12_40.facets"), "--sign", "x"]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_with_one() {
    assert_eq!(run(&["check", "/nonexistent/sphere.facets"]).status.code(), Some(1));
}

#[test]
fn enumeration_output_does_not_depend_on_jobs() {
    let a = run(&["enumerate", "--n", "9", "--jobs", "1"]);
    let b = run(&["enumerate", "--n", "9", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(last_line(&a).starts_with("RESULT: n=9 spheres=1"));
}

#[test]
fn exhausted_budget_saves_a_frontier() {
    let frontier = scratch("n11.frontier");
    let out = run(&["enumerate", "--n", "11", "--long-running", "--budget", "1", "--frontier", frontier.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(last_line(&out).ends_with("status=budget-exhausted"));
    assert!(std::fs::metadata(&frontier).unwrap().len() > 0);
}

#[test]
fn proof_replays_and_a_tampered_copy_fails() {
    let facets = data_file("w12_40.facets");
    let cert = scratch("w12.proof");
    let out = run(&["prove-nonpolytopal", &facets, "--seed", "7,8,10,2,9", "-o", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(last_line(&out).starts_with("RESULT: "));

    let ok = run(&["replay", cert.to_str().unwrap(), "--facets", &facets]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    // Flip the sign of the first step derived from the seed.
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| l.contains(" = + BY P2 ")).unwrap();
    let flipped = lines[i].replacen(" = + ", " = - ", 1);
    lines[i] = flipped;
    let bad = scratch("w12_bad.proof");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();

    let out = run(&["replay", bad.to_str().unwrap(), "--facets", &facets]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&format!("invalid at line {}", i + 1)), "{stderr}");
    assert!(last_line(&out).starts_with("RESULT: "));
}
