use std::fs;

use kginv::cli::{self, EXIT_ERROR, EXIT_NOT_VALID, EXIT_VALID};

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("kginv").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn prove_exit_codes() {
    assert_eq!(run(&["prove", "p -> p"]).0, EXIT_VALID);
    let (code, out, _) = run(&["prove", "[]p -> ~<>~p"]);
    assert_eq!(code, EXIT_NOT_VALID);
    assert!(out.starts_with("NOT VALID\nrule applications: "), "{out}");
    assert!(out.contains("peak live constraints: "));
    let (code, out, _) = run(&["prove", "--crisp", "([]p -> ~<>~p) & (~<>~p -> []p)"]);
    assert_eq!(code, EXIT_VALID);
    assert!(out.starts_with(cli::CRISP_BANNER));
}

#[test]
fn budget_and_parse_errors_exit_one() {
    let (code, _, err) = run(&["prove", "--budget-nodes", "3", "[]p <-> ~<>~p"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("resource limit"), "{err}");
    let (code, _, err) = run(&["prove", "p &"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("syntax error at position 3"), "{err}");
    assert_eq!(run(&["prove", "--budget-nodes", "0", "p"]).0, EXIT_ERROR);
}

#[test]
fn eval_prints_exact_rationals() {
    assert_eq!(run(&["eval", &data("three_worlds.json"), "w", "[]p"]).1, "1/5\n");
    assert_eq!(run(&["eval", &data("duality.json"), "w", "[]p -> ~<>~p"]).1, "1/2\n");
    let (code, _, err) = run(&["eval", &data("nat.json"), "w0", "[]p & <>~p"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("1/2 ∉ T(w0)"), "{err}");
    assert_eq!(
        run(&["eval", "--override-validation", &data("nat.json"), "w0", "[]p & <>~p"]).1,
        "1\n"
    );
    let (code, _, err) = run(&["eval", &data("duality.json"), "nowhere", "p"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("unknown world"), "{err}");
}

#[test]
fn check_model_lists_violations() {
    let (code, out, _) = run(&["check-model", &data("nat_prime.json")]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.contains("2/3 ∉ T(w'0)"), "{out}");
    assert_eq!(run(&["check-model", &data("duality.json")]).0, EXIT_VALID);
}

#[test]
fn formula_files_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let formula = dir.path().join("phi.txt");
    fs::write(&formula, "[]p -> ~<>~p\n").unwrap();
    let model = dir.path().join("m.json");
    let dot = dir.path().join("m.dot");
    let lp = dir.path().join("m.lp");
    let at = format!("@{}", formula.display());
    let (code, _, _) = run(&[
        "prove",
        &at,
        "--emit-model",
        model.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--dump-lp",
        lp.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NOT_VALID);
    let (code, out, _) = run(&["eval", model.to_str().unwrap(), "w", &at]);
    assert_eq!((code, out.as_str()), (EXIT_VALID, "1/2\n"));
    assert!(fs::read_to_string(&dot)
        .unwrap()
        .contains("\"w\" -> \"w'\" [label=\"1/2\"]"));
    assert!(fs::read_to_string(&lp).unwrap().starts_with("# x0 = w: []p -> ~<>~p\n"));
}

#[test]
fn trace_and_strategies() {
    let (_, out, _) = run(&["prove", "--trace", "[]p -> ~<>~p"]);
    assert!(out.starts_with("1. w: []p -> ~<>~p < 1\n2. "), "{out}");
    for s in ["full", "on-the-fly"] {
        assert_eq!(run(&["prove", "--strategy", s, "[](p & q) -> []p"]).0, EXIT_VALID);
    }
}

#[test]
fn oracle_commands() {
    assert_eq!(run(&["oracle", "prop", "(p -> q) | (q -> p)"]).0, EXIT_VALID);
    assert_eq!(run(&["oracle", "prop", "p | ~p"]).0, EXIT_NOT_VALID);
    assert_eq!(run(&["oracle", "prop", "[]p"]).0, EXIT_ERROR);
    assert_eq!(run(&["oracle", "refute", "[]p -> ~<>~p"]).0, EXIT_NOT_VALID);
    assert_eq!(run(&["oracle", "refute", "--crisp", "[]p <-> ~<>~p"]).0, EXIT_VALID);
}

#[test]
fn parse_reports_metrics() {
    let (_, out, _) = run(&["parse", "[]p <-> ~<>~p"]);
    assert!(out.contains("modal depth: 1\natoms: 1"), "{out}");
}

#[test]
fn fuzz_report_is_reproducible() {
    let args = ["fuzz", "--seed", "9", "--prop-count", "60", "--modal-count", "30"];
    let (code, first, _) = run(&args);
    assert_eq!(code, EXIT_VALID, "{first}");
    assert!(first.contains("60/60 propositional agreements"), "{first}");
    let threaded: Vec<&str> = args.iter().copied().chain(["--threads", "3"]).collect();
    assert_eq!(run(&threaded).1, first);
}
