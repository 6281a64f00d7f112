use kginv::constraints::{Branch, Constraint, Label, Rel, Term, ValueTerm};
use kginv::formula::{parse, Formula};
use kginv::models::{lift_standard, model_from_json, model_to_json, LoadedModel};
use kginv::oracle::{closed_by_enumeration, random_formula, random_standard_model, FormulaShape};
use kginv::solver::{close_check, feasible, translate, Betweenness, CloseOptions, CloseResult, SolveResult};
use kginv::tableau::{applicable, apply};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64, shape: &FormulaShape) -> Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

/// A branch reached by applying up to `steps` random rule instances to
/// the initial branch of a random modal formula, with one extra ordering
/// constraint between two of its terms.
fn random_branch(seed: u64, steps: usize) -> Branch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_formula(&mut rng, &FormulaShape::modal(8, 2));
    let mut b = Branch::initial(phi.desugar());
    for _ in 0..steps {
        let insts = applicable(&b);
        if insts.is_empty() {
            break;
        }
        let inst = &insts[rng.gen_range(0..insts.len())];
        let mut children = apply(&b, inst);
        b = children.swap_remove(rng.gen_range(0..children.len()));
    }
    let mut terms: Vec<Term> = b
        .constraints()
        .flat_map(|c| c.value_terms().map(|vt| vt.term).collect::<Vec<_>>())
        .filter(|t| !matches!(t, Term::Const0 | Term::Const1))
        .collect();
    terms.sort();
    terms.dedup();
    if terms.len() >= 2 {
        let a = terms[rng.gen_range(0..terms.len())];
        let c = terms[rng.gen_range(0..terms.len())];
        let rel = [Rel::Le, Rel::Lt, Rel::Eq, Rel::Gt][rng.gen_range(0..4)];
        let right = if rng.gen_bool(0.3) {
            ValueTerm::from(c).complement()
        } else {
            c.into()
        };
        b.add(Constraint::terms(a, rel, right), None);
    }
    b
}

/// A branch with populated T-registries: one or two worlds, up to two
/// matched pairs each, optional `[0]`/`[1]` entries, and random ordering
/// constraints between its terms.
fn registry_branch(seed: u64) -> Branch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Branch::empty();
    let mut labels = vec![Label::ROOT];
    if rng.gen_bool(0.5) {
        let u = b.fresh_label(Label::ROOT);
        b.add(
            Constraint::terms(Term::Rel(Label::ROOT, u), Rel::Ge, ValueTerm::ZERO),
            None,
        );
        labels.push(u);
    }
    let mut terms = vec![Term::Const0, Term::Const1];
    for &w in &labels {
        for _ in 0..rng.gen_range(1..=2) {
            let (t, ts) = b.fresh_tpair(w);
            terms.extend([t.term, ts.term]);
        }
        for sym in [Term::ZeroSym, Term::OneSym] {
            if rng.gen_bool(0.3) {
                b.add(Constraint::labelled(w, Formula::atom("p"), Rel::Eq, sym), None);
                terms.push(sym);
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        terms.push(b.fresh_var().term);
    }
    terms.extend(b.rel_terms().iter().map(|&(a, u)| Term::Rel(a, u)));
    for _ in 0..rng.gen_range(1..=5) {
        let a = terms[rng.gen_range(0..terms.len())];
        let c = terms[rng.gen_range(0..terms.len())];
        let rel = [Rel::Le, Rel::Lt, Rel::Eq, Rel::Ge, Rel::Gt][rng.gen_range(0..5)];
        let right = if rng.gen_bool(0.3) {
            ValueTerm::from(c).complement()
        } else {
            c.into()
        };
        b.add(Constraint::terms(a, rel, right), None);
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parses_back(seed in any::<u64>()) {
        let f = formula(seed, &FormulaShape::modal(16, 3));
        prop_assert_eq!(parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn desugaring_preserves_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &FormulaShape::modal(12, 2));
        let m = random_standard_model(&mut rng, 3, 6, &["p", "q", "r"]);
        prop_assert_eq!(m.eval_everywhere(&f), m.eval_everywhere(&f.desugar()));
        let lifted = lift_standard(&m, &f);
        let core = f.desugar();
        prop_assert_eq!(lifted.eval_everywhere(&f).unwrap(), lifted.eval_everywhere(&core).unwrap());
    }

    #[test]
    fn model_json_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_standard_model(&mut rng, 4, 10, &["p", "q"]);
        let f = random_formula(&mut rng, &FormulaShape::modal(8, 2));
        for model in [LoadedModel::Standard(m.clone()), LoadedModel::F(lift_standard(&m, &f))] {
            let text = model_to_json(&model);
            let back = model_from_json(&text).unwrap();
            prop_assert_eq!(model_to_json(&back), text);
            for atom in ["p", "q"] {
                let a = Formula::atom(atom);
                prop_assert_eq!(back.frame().eval_everywhere(&a), model.frame().eval_everywhere(&a));
            }
            if let (LoadedModel::F(x), LoadedModel::F(y)) = (&model, &back) {
                prop_assert_eq!(x.eval_everywhere(&f).unwrap(), y.eval_everywhere(&f).unwrap());
            }
        }
    }

    #[test]
    fn solver_witness_satisfies_every_atom(seed in any::<u64>(), steps in 0usize..12) {
        let b = random_branch(seed, steps);
        let sys = translate(&b);
        if let SolveResult::Sat(values) = feasible(sys.num_vars(), &sys.atoms) {
            for atom in &sys.atoms {
                prop_assert!(atom.holds(&values), "{:?}\n{}", atom, sys.dump());
            }
        }
    }

    #[test]
    fn closure_witness_satisfies_raw_system_and_resolution(seed in any::<u64>(), steps in 0usize..12) {
        let b = random_branch(seed, steps);
        for betweenness in [Betweenness::Consecutive, Betweenness::Literal] {
            let opts = CloseOptions { crisp: false, betweenness };
            if let CloseResult::Open(sol) = close_check(&b, opts) {
                for atom in sol.system.atoms.iter().chain(&sol.resolution) {
                    prop_assert!(atom.holds(&sol.values));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn side_conditions_agree_with_enumeration(seed in any::<u64>(), steps in 0usize..16, crisp in any::<bool>()) {
        let b = random_branch(seed, steps);
        for betweenness in [Betweenness::Consecutive, Betweenness::Literal] {
            let opts = CloseOptions { crisp, betweenness };
            if let Ok(expected) = closed_by_enumeration(&b, opts) {
                prop_assert_eq!(close_check(&b, opts).is_closed(), expected, "{}", b.dump());
            }
        }
    }

    #[test]
    fn registry_side_conditions_agree_with_enumeration(seed in any::<u64>(), crisp in any::<bool>()) {
        let b = registry_branch(seed);
        for betweenness in [Betweenness::Consecutive, Betweenness::Literal] {
            let opts = CloseOptions { crisp, betweenness };
            let expected = closed_by_enumeration(&b, opts).unwrap();
            prop_assert_eq!(close_check(&b, opts).is_closed(), expected, "{}", b.dump());
        }
    }
}

#[test]
fn registry_branches_are_a_mix() {
    let closed = (0..300u64)
        .filter(|&s| {
            let opts = CloseOptions {
                crisp: false,
                betweenness: Betweenness::Consecutive,
            };
            close_check(&registry_branch(s), opts).is_closed()
        })
        .count();
    assert!((30..=270).contains(&closed), "{closed} of 300 closed");
}

#[test]
fn backjumping_keeps_verdicts() {
    use kginv::tableau::{prove, ProveConfig, Strategy};
    let mut skipped = 0;
    let fixed = [
        "[](p -> q) -> ([]p -> []q)",
        "<>(p | q) -> (<>p | <>q)",
        "[](p & q) <-> ([]p & []q)",
    ];
    let mut inputs: Vec<Formula> = fixed.iter().map(|s| parse(s).unwrap()).collect();
    inputs.extend((0..150).map(|seed| formula(seed, &FormulaShape::modal(12, 2))));
    for phi in inputs {
        for strategy in [Strategy::Full, Strategy::OnTheFly] {
            let on = ProveConfig {
                strategy,
                budget: 20_000,
                ..ProveConfig::default()
            };
            let off = ProveConfig {
                backjumping: false,
                ..on.clone()
            };
            let (Ok(a), Ok(b)) = (prove(&phi, &on), prove(&phi, &off)) else {
                continue;
            };
            assert_eq!(a.verdict.is_valid(), b.verdict.is_valid(), "{}", phi.render());
            assert!(a.stats.applications <= b.stats.applications, "{}", phi.render());
            skipped += a.stats.skipped_branches;
        }
    }
    assert!(skipped > 0);
}
