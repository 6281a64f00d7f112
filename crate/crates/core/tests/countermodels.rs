use std::path::Path;

use kginv::constraints::{Branch, Constraint, Label, Rel, Term, ValueTerm};
use kginv::formula::{parse, Formula};
use kginv::models::{load_model, LoadedModel};
use kginv::rational::{ratio, zero};
use kginv::solver::{close_check, Betweenness, CloseOptions, CloseResult};
use kginv::tableau::{
    check_realisation, extract_countermodel, prove, to_dot, Countermodel, ProveConfig, RealisationViolation,
};

fn countermodel(src: &str) -> (Formula, Countermodel) {
    let phi = parse(src).unwrap();
    let report = prove(&phi, &ProveConfig::default()).unwrap();
    let cm = report.verdict.countermodel().expect("not valid").clone();
    (phi, cm)
}

fn items(v: &[RealisationViolation]) -> Vec<u8> {
    v.iter()
        .filter_map(|x| match x {
            RealisationViolation::Item { item, .. } => Some(*item),
            RealisationViolation::Constraint { .. } => None,
        })
        .collect()
}

#[test]
fn duality_countermodel_matches_reference_model() {
    let (phi, cm) = countermodel("[]p -> ~<>~p");
    assert!(check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive).is_empty());
    assert_eq!(cm.model.eval(&cm.witness, &phi).unwrap(), ratio(1, 2));
    let LoadedModel::F(reference) =
        load_model(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/duality.json"))).unwrap()
    else {
        panic!("reference file is an F-model");
    };
    let ours: Vec<_> = cm.model.eval_everywhere(&phi).unwrap();
    let theirs: Vec<_> = reference.eval_everywhere(&phi).unwrap();
    assert_eq!(ours, theirs);
}

#[test]
fn tampered_accessibility_is_reported() {
    let (_, mut cm) = countermodel("[]p -> ~<>~p");
    let (from, to) = (cm.model.worlds()[0].clone(), cm.model.worlds()[1].clone());
    cm.model.frame_mut().set_access(&from, &to, ratio(1, 3)).unwrap();
    let v = check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive);
    assert!(items(&v).contains(&2), "{v:?}");
    assert!(v.iter().any(|x| x.to_string().contains("but R = 1/3")), "{v:?}");
}

#[test]
fn tampered_valuation_breaks_a_constraint() {
    let (_, mut cm) = countermodel("[]p -> ~<>~p");
    let to = cm.model.worlds()[1].clone();
    cm.model.frame_mut().set_value("p", &to, ratio(1, 3)).unwrap();
    let v = check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive);
    assert!(
        v.iter().any(|x| matches!(x, RealisationViolation::Constraint { .. })),
        "{v:?}"
    );
}

#[test]
fn shrunken_t_set_is_reported() {
    let (_, mut cm) = countermodel("[]p -> ~<>~p");
    let w = cm.witness.clone();
    cm.model.set_t(&w, [zero(), ratio(1, 2)]).unwrap();
    let v = check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive);
    assert!(items(&v).contains(&4), "{v:?}");
}

#[test]
fn propositional_branch_gives_a_single_world() {
    let b = Branch::from_constraints([
        Constraint::labelled(Label::ROOT, Formula::atom("p"), Rel::Lt, ValueTerm::ONE),
        Constraint::labelled(Label::ROOT, Formula::atom("p"), Rel::Gt, ValueTerm::ZERO),
    ]);
    let opts = CloseOptions {
        crisp: false,
        betweenness: Betweenness::Consecutive,
    };
    let CloseResult::Open(sol) = close_check(&b, opts) else {
        panic!("satisfiable branch");
    };
    let (model, rl) = extract_countermodel(&b, &sol, false);
    assert_eq!(model.worlds(), ["w"]);
    assert!(model.frame().edges().is_empty());
    let p = model.frame().value("p", 0);
    assert!(zero() < p && p < ratio(1, 1));
    assert_eq!(model.frame().value("q", 0), zero());
    assert!(check_realisation(&model, &rl, &b, Betweenness::Consecutive).is_empty());
}

#[test]
fn zero_symbol_must_realise_as_zero() {
    let (_, mut cm) = countermodel("[]p -> ~<>~p");
    cm.realisation.terms.insert(Term::ZeroSym, ratio(1, 2));
    let v = check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive);
    assert_eq!(items(&v), [1], "{v:?}");
}

#[test]
fn dot_lists_worlds_and_edges() {
    let (_, cm) = countermodel("[]p -> ~<>~p");
    let dot = to_dot(&cm.model);
    assert!(dot.starts_with("digraph countermodel {\n"));
    assert!(dot.contains("\"w\" [label=\"w\\nT = {0, 1/2, 1}"), "{dot}");
    assert!(dot.contains("\"w\" -> \"w'\" [label=\"1/2\"];"), "{dot}");
}

#[test]
fn crisp_countermodels_have_crisp_frames() {
    for src in ["[]p -> p", "<>p -> []p", "[](p | q) -> []p | <>q"] {
        let phi = parse(src).unwrap();
        let report = prove(&phi, &ProveConfig::crisp()).unwrap();
        if let Some(cm) = report.verdict.countermodel() {
            assert!(cm.model.frame().has_crisp_frame(), "{src}");
            assert!(cm.model.eval(&cm.witness, &phi).unwrap() < ratio(1, 1));
        }
    }
}
