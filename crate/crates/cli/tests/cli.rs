//! End-to-end runs of the `nframes` binary.

use nframes_cli::{fixtures_dir, run, Options, ProblemFile, Task};
use proptest::prelude::*;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

fn nframes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nframes")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_temp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nframes-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn ma_source() -> String {
    std::fs::read_to_string(fixture("sl2_linear_monge_ampere.toml")).unwrap()
}

#[test]
fn fixtures_pass() {
    for name in ["sl2_linear_monge_ampere.toml", "sl2_projective.toml", "shallow_water.toml"] {
        let o = nframes(&["run", fixture(name).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn empty_task_list() {
    let o = nframes(&["run", fixture("sl2_projective.toml").to_str().unwrap(), "--tasks", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("\n## "));
}

#[test]
fn frame_text() {
    let p = fixture("sl2_linear_monge_ampere.toml");
    let o = nframes(&["run", p.to_str().unwrap(), "--tasks", "frame,invariants 2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("a = u_x/(x*u_x + y*u_y)"), "{out}");
    assert!(out.contains("I(u_yy)"), "{out}");
}

#[test]
fn shallow_water_verify() {
    let p = fixture("shallow_water.toml");
    let o = nframes(&["run", p.to_str().unwrap(), "--tasks", "laws,structured,verify", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn unknown_key_is_input_error() {
    let p = write_temp("unknown.toml", &format!("{}\nbogus = 1\n", ma_source().replacen("[variables]", "colour = 1\n[variables]", 1)));
    let o = nframes(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_invariant_lagrangian_fails_verify() {
    let src = ma_source().replace("u*(u_xx*u_yy - u_xy^2)", "u*u_xx");
    let p = write_temp("noninvariant.toml", &src);
    let o = nframes(&["run", p.to_str().unwrap(), "--tasks", "verify"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn order_above_limit() {
    let p = fixture("sl2_projective.toml");
    let o = nframes(&["run", p.to_str().unwrap(), "--tasks", "invariants 3", "--max-order", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_is_deterministic() {
    let p = fixture("sl2_linear_monge_ampere.toml");
    let args = ["run", p.to_str().unwrap(), "--format", "json"];
    assert_eq!(nframes(&args).stdout, nframes(&args).stdout);
}

#[test]
fn latex_output() {
    let p = fixture("sl2_projective.toml");
    let o = nframes(&["run", p.to_str().unwrap(), "--tasks", "frame,el", "--format", "latex"]);
    let out = stdout(&o);
    assert!(out.starts_with("\\documentclass"));
    assert!(out.trim_end().ends_with("\\end{document}"));
}

#[test]
fn json_expressions_round_trip() {
    let file = ProblemFile::read(&fixture("sl2_linear_monge_ampere.toml")).unwrap();
    let problem = file.problem().unwrap();
    let frame = problem.frame().unwrap();
    let extra: Vec<_> = frame.radicals().iter().map(|r| r.symbol).collect();
    let report = run(&file, &Options::default()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report.json()).unwrap();
    let mut n = 0;
    for (sec, js) in report.sections.iter().zip(v["sections"].as_array().unwrap()) {
        for (item, ji) in sec.items.iter().zip(js["items"].as_array().unwrap()) {
            let back = problem.parse_with(ji["expr"].as_str().unwrap(), &extra).unwrap();
            assert!(back.sub(&item.expr).is_zero(), "{}: {}", item.label, ji["expr"]);
            n += 1;
        }
    }
    assert!(n > 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn task_lists_normalize(picks in proptest::collection::vec(0usize..9, 0..12)) {
        let names = ["verify", "structured", "laws", "el", "syzygies", "forms", "operators", "invariants 2", "frame"];
        let chosen: Vec<&str> = picks.iter().map(|&i| names[i]).collect();
        let tasks = Task::parse_list(&chosen).unwrap();
        prop_assert!(tasks.windows(2).all(|w| w[0].rank() < w[1].rank()));
        let mut rev = chosen.clone();
        rev.reverse();
        prop_assert_eq!(Task::parse_list(&rev).unwrap(), tasks);
    }
}
