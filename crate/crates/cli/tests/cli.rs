use std::process::{Command, Output};

use clap::Parser;
use nlqc_cli::grid::parse_grid;
use nlqc_cli::report::without_timing;
use nlqc_cli::{execute, Cli, Command as Sub};
use proptest::prelude::*;

fn nlqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlqc")).args(args).env_remove("NLQC_THREADS").output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    nlqc(args).status.code().unwrap()
}

#[test]
fn parses_global_and_subcommand_flags() {
    let cli = Cli::try_parse_from(["nlqc", "--seed", "5", "inst", "--mode", "unitary", "--N", "3", "--target", "swap"])
        .unwrap();
    assert_eq!(cli.seed, 5);
    match &cli.command {
        Sub::Inst(a) => {
            assert_eq!(a.ports, 3);
            assert_eq!(a.target.as_deref(), Some("swap"));
        }
        other => panic!("{other:?}"),
    }
    let cli = Cli::try_parse_from(["nlqc", "pbt", "--grid", "d=2:N=1..3", "--seed", "9"]).unwrap();
    assert_eq!(cli.seed, 9);
    assert!(Cli::try_parse_from(["nlqc", "inst", "--mode", "teleport"]).is_err());
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(code(&["pbt", "--d", "-1"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["pbt", "--d", "1"]), 2);
    assert_eq!(code(&["pbt", "--grid", "d=2:N=x"]), 2);
    assert_eq!(code(&["inst", "--target", "cnot"]), 2);
    assert_eq!(code(&["inst", "--target", "file:/nonexistent.json"]), 2);
    assert_eq!(code(&["posverify", "--positions", "0,-1,1"]), 2);
    assert_eq!(code(&["mub", "--d", "6"]), 2);
}

#[test]
fn size_limits_exit_with_3() {
    assert_eq!(code(&["--max-dim", "64", "pbt", "--d", "4", "--N", "4"]), 3);
    assert_eq!(code(&["mub", "--d", "64", "--check"]), 3);
}

#[test]
fn thread_override_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_nlqc")).args(["cost"]).env("NLQC_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = nlqc(&["--out", path.to_str().unwrap(), "--seed", "3", "pbt", "--d", "2", "--N", "2"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["tool"], "nlqc");
    assert_eq!(v["subcommand"], "pbt");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["config"]["command"]["pbt"]["N"], 2);
    assert_eq!(v["pass"], true);
    assert!(v["versions"].as_object().unwrap().contains_key("nlqc-core"));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let f = rows[0]["data"]["fidelity"].as_f64().unwrap();
    assert!((f - 0.5).abs() > 1e-3 && f > 0.25);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn file_targets_load_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let swap = nlqc_core::instprotocols::targets::swap(1);
    let upath = dir.path().join("swap.json");
    std::fs::write(&upath, serde_json::to_string(&swap).unwrap()).unwrap();
    let target = format!("file:{}", upath.display());
    let from_file = nlqc(&["inst", "--mode", "unitary", "--trials", "200", "--target", &target]);
    let named = nlqc(&["inst", "--mode", "unitary", "--trials", "200", "--target", "swap"]);
    assert!(from_file.status.success() && named.status.success());
    let rows = |o: &Output| without_timing(std::str::from_utf8(&o.stdout).unwrap()).unwrap()["rows"].clone();
    assert_eq!(rows(&from_file), rows(&named));

    let comp = nlqc_core::instprotocols::targets::comp_povm(1);
    let ppath = dir.path().join("comp.json");
    std::fs::write(&ppath, serde_json::to_string(comp.elements()).unwrap()).unwrap();
    let out =
        nlqc(&["inst", "--trials", "500", "--state", "basis:2", "--target", &format!("file:{}", ppath.display())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_subcommand_passes_its_checks() {
    let runs: [&[&str]; 7] = [
        &["nlqc", "pbt", "--grid", "d=2:N=1..3"],
        &["nlqc", "pgm", "--d", "3", "--N", "2", "--pairs", "10", "--ensembles", "10"],
        &["nlqc", "inst", "--N", "1", "--trials", "2000", "--order", "bob-first"],
        &["nlqc", "mub", "--d", "5", "--check"],
        &["nlqc", "bound", "--d", "4", "--dimb", "1", "--restarts", "2", "--sweeps", "5"],
        &["nlqc", "posverify", "--mode", "bounds", "--trials", "500"],
        &["nlqc", "cost", "--n", "3", "--eps", "0.05"],
    ];
    for args in runs {
        let report = execute(&Cli::try_parse_from(args).unwrap()).unwrap();
        assert!(report.pass, "{args:?}");
        assert_eq!(report.checks_failed, 0);
        assert!(!report.rows.is_empty());
    }
}

#[test]
fn honest_posverify_transcript_is_exported() {
    let cli = Cli::try_parse_from(["nlqc", "posverify", "--n", "2", "--trials", "50", "--transcript"]).unwrap();
    let report = execute(&cli).unwrap();
    assert!(report.pass);
    let events = report.extras["transcript"]["events"].as_array().unwrap();
    assert!(events.len() >= 4);
}

#[test]
fn violated_check_is_recorded_as_failing() {
    let row = nlqc_cli::Row::new("cell", serde_json::json!({})).check(nlqc_cli::Check::le("x", 2.0, 1.0, 0.0));
    assert!(!row.pass());
    let row =
        nlqc_cli::Row::new("cell", serde_json::json!({})).check(nlqc_cli::Check::eq("y", 1.0, 1.0 + 1e-13, 1e-12));
    assert!(row.pass());
}

#[test]
fn documented_examples() {
    let run = |args: &[&str]| execute(&Cli::try_parse_from(args).unwrap()).unwrap();
    let r = run(&["nlqc", "pbt", "--grid", "d=2:N=1..10"]);
    assert!(r.pass);
    assert_eq!(r.rows_of("cell").count(), 10);
    let r = run(&["nlqc", "posverify", "--mode", "bounds", "--n", "4", "--m", "0", "--trials", "200"]);
    let row = r.rows_of("limited_entanglement").next().unwrap();
    assert_eq!(row.data["bound"], 0.5);
    assert!(Cli::try_parse_from(["nlqc", "inst", "--mode", "measure", "--n", "1", "--N", "2", "--trials", "100000", "--seed", "7"]).is_ok());
}

proptest! {
    #[test]
    fn grid_ranges_expand(d0 in 2usize..6, d1 in 2usize..6, lo in 1usize..5, len in 0usize..5) {
        let hi = lo + len;
        let cells = parse_grid(&format!("d={d0},{d1}:N={lo}..{hi}")).unwrap();
        prop_assert_eq!(cells.len(), 2 * (len + 1));
        prop_assert!(cells.iter().all(|&(d, n)| (d == d0 || d == d1) && (lo..=hi).contains(&n)));
    }
}
