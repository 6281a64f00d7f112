//! Rule-local soundness by sampling: random F-models and realisations of a
//! single premise, checked against every child of the rule by searching
//! for an extension of the realisation to the child's fresh symbols.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{Branch, Constraint, Label, Rel, Term, ValueTerm};
use crate::formula::Formula;
use crate::models::FModel;
use crate::oracle::{random_formula, random_standard_model, FormulaShape};
use crate::rational::{complement, half, one, ratio, zero, Rational};
use crate::solver::Betweenness;
use crate::tableau::{applicable, apply, check_realisation, Realisation, RealisationViolation, RuleKind};

/// Items 6 and 7 of a realisation constrain the symbols of a world as a
/// whole; a premise realised in an arbitrary model need not meet them.
fn structural(v: &RealisationViolation) -> bool {
    !matches!(v, RealisationViolation::Item { item: 6 | 7, .. })
}

fn realises(model: &FModel, rl: &Realisation, b: &Branch) -> bool {
    !check_realisation(model, rl, b, Betweenness::Consecutive)
        .iter()
        .any(structural)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSample {
    pub rule: Option<RuleKind>,
    /// Premise-realising pairs checked.
    pub samples: usize,
    /// Draws including rejected ones.
    pub attempts: usize,
    pub failures: Vec<String>,
}

const GRID: i64 = 6;

fn random_model<R: Rng>(rng: &mut R) -> FModel {
    let frame = random_standard_model(rng, 3, GRID as u32, &["p", "q"]);
    let names = frame.worlds().to_vec();
    let mut model = FModel::from_standard(frame);
    for name in &names {
        let mut t: BTreeSet<Rational> = [zero(), half(), one()].into_iter().collect();
        for k in 1..GRID / 2 {
            if rng.gen_bool(0.4) {
                t.insert(ratio(k, GRID));
                t.insert(ratio(GRID - k, GRID));
            }
        }
        model.set_t(name, t).expect("known world");
    }
    model
}

fn operand<R: Rng>(rng: &mut R) -> Formula {
    let shape = FormulaShape {
        max_length: 5,
        max_modal_depth: 1,
        atom_pool: 2,
        modal: true,
    };
    random_formula(rng, &shape).desugar()
}

/// A premise formula for `rule`, and the relations that select it.
fn premise_shape<R: Rng>(rng: &mut R, rule: RuleKind) -> (Formula, &'static [Rel]) {
    let (a, b) = (operand(rng), operand(rng));
    match rule {
        RuleKind::Inv => (Formula::inv(a), &[Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt]),
        RuleKind::AndGe => (Formula::and(a, b), &[Rel::Ge, Rel::Gt]),
        RuleKind::AndLe => (Formula::and(a, b), &[Rel::Le, Rel::Lt]),
        RuleKind::ImpGe => (Formula::imp(a, b), &[Rel::Ge, Rel::Gt]),
        RuleKind::ImpLe => (Formula::imp(a, b), &[Rel::Le]),
        RuleKind::ImpLt => (Formula::imp(a, b), &[Rel::Lt]),
        RuleKind::BoxGe => (Formula::boxed(a), &[Rel::Ge, Rel::Gt]),
        RuleKind::BoxLe => (Formula::boxed(a), &[Rel::Le]),
        RuleKind::BoxLt => (Formula::boxed(a), &[Rel::Lt]),
        RuleKind::DiaLe => (Formula::dia(a), &[Rel::Le, Rel::Lt]),
        RuleKind::DiaGe => (Formula::dia(a), &[Rel::Ge]),
        RuleKind::DiaGt => (Formula::dia(a), &[Rel::Gt]),
        RuleKind::BoxEq => (Formula::boxed(a), &[Rel::Eq]),
        RuleKind::DiaEq => (Formula::dia(a), &[Rel::Eq]),
    }
}

/// Values worth trying for a fresh variable: every subformula value of
/// `phi` anywhere, their complements, and the grid.
fn candidates(model: &FModel, phi: &Formula) -> Vec<Rational> {
    let mut set: BTreeSet<Rational> = (0..=2 * GRID).map(|k| ratio(k, 2 * GRID)).collect();
    for sub in phi.subformulas() {
        if let Ok(values) = model.eval_everywhere(&sub) {
            for x in values {
                set.insert(complement(&x));
                set.insert(x);
            }
        }
    }
    set.into_iter().collect()
}

struct Draw {
    model: FModel,
    branch: Branch,
    rl: Realisation,
    phi: Formula,
}

fn draw<R: Rng>(rng: &mut R, rule: RuleKind) -> Draw {
    let model = random_model(rng);
    let (phi, rels) = premise_shape(rng, rule);
    let rel = *rels.choose(rng).expect("nonempty");
    let w = Label::ROOT;
    let mut b = Branch::empty();
    let mut rl = Realisation {
        worlds: Default::default(),
        terms: Default::default(),
    };
    let n = model.worlds().len();
    rl.worlds.insert(w, model.worlds()[rng.gen_range(0..n)].clone());
    let here = model.frame().world_index(&rl.worlds[&w]).expect("known world");
    let value = model.eval_everywhere(&phi).expect("sampled model")[here].clone();
    let t_here: Vec<Rational> = model.t_set(here).iter().cloned().collect();

    let right = match rng.gen_range(0..5) {
        0 if rule.is_equality() => {
            let sym = if rng.gen_bool(0.5) { Term::OneSym } else { Term::ZeroSym };
            ValueTerm::plain(sym)
        }
        0 => {
            if rng.gen_bool(0.5) {
                ValueTerm::ONE
            } else {
                ValueTerm::ZERO
            }
        }
        1 | 2 => {
            let (t, ts) = b.fresh_tpair(w);
            let k = rng.gen_range(0..t_here.len() - 1);
            rl.terms.insert(t.term, t_here[k].clone());
            rl.terms.insert(ts.term, t_here[k + 1].clone());
            if rng.gen_bool(0.5) {
                t
            } else {
                ts
            }
        }
        _ => {
            let c = b.fresh_var();
            let complemented = rng.gen_bool(0.3);
            let x = if rng.gen_bool(0.5) {
                value.clone()
            } else {
                candidates(&model, &phi).choose(rng).expect("nonempty").clone()
            };
            rl.terms.insert(c.term, if complemented { complement(&x) } else { x });
            if complemented {
                c.complement()
            } else {
                c
            }
        }
    };
    b.add(Constraint::labelled(w, phi.clone(), rel, right), None);
    if rule.is_equality() {
        let u = b.fresh_label(w);
        let j = rng.gen_range(0..n);
        rl.worlds.insert(u, model.worlds()[j].clone());
        rl.terms.insert(Term::Rel(w, u), model.frame().access(here, j).clone());
        b.add(Constraint::terms(Term::Rel(w, u), Rel::Ge, ValueTerm::ZERO), None);
    }
    Draw {
        model,
        branch: b,
        rl,
        phi,
    }
}

/// Tries every extension of `rl` to the fresh labels, variables and
/// T-pairs of `child`.
fn child_realisable(d: &Draw, child: &Branch) -> bool {
    let model = &d.model;
    let fresh_labels: Vec<Label> = child
        .labels()
        .iter()
        .copied()
        .filter(|w| !d.rl.worlds.contains_key(w))
        .collect();
    let mut fresh_vars = BTreeSet::new();
    let mut fresh_pairs = BTreeSet::new();
    for c in child.constraints() {
        for vt in c.value_terms() {
            match vt.term {
                Term::Var(_) if !d.rl.terms.contains_key(&vt.term) => {
                    fresh_vars.insert(vt.term);
                }
                Term::Lower(w, i) | Term::Upper(w, i) if !d.rl.terms.contains_key(&vt.term) => {
                    fresh_pairs.insert((w, i));
                }
                _ => {}
            }
        }
    }
    assert!(fresh_labels.len() <= 1 && fresh_vars.len() <= 1 && fresh_pairs.len() <= 1);
    let worlds: Vec<Option<String>> = if fresh_labels.is_empty() {
        vec![None]
    } else {
        model.worlds().iter().cloned().map(Some).collect()
    };
    let values: Vec<Option<Rational>> = if fresh_vars.is_empty() {
        vec![None]
    } else {
        candidates(model, &d.phi).into_iter().map(Some).collect()
    };
    let pairs: Vec<Option<(Rational, Rational)>> = match fresh_pairs.first() {
        None => vec![None],
        Some(&(w, _)) => {
            let i = model.frame().world_index(&d.rl.worlds[&w]).expect("known world");
            let t: Vec<&Rational> = model.t_set(i).iter().collect();
            let mut out = Vec::new();
            for a in 0..t.len() {
                for b in a + 1..t.len() {
                    out.push(Some((t[a].clone(), t[b].clone())));
                }
            }
            out
        }
    };
    for world in &worlds {
        for value in &values {
            for pair in &pairs {
                let mut rl = d.rl.clone();
                if let (Some(name), Some(&u)) = (world, fresh_labels.first()) {
                    rl.worlds.insert(u, name.clone());
                }
                if let (Some(x), Some(&v)) = (value, fresh_vars.first()) {
                    rl.terms.insert(v, x.clone());
                }
                if let (Some((lo, hi)), Some(&(w, i))) = (pair, fresh_pairs.first()) {
                    rl.terms.insert(Term::Lower(w, i), lo.clone());
                    rl.terms.insert(Term::Upper(w, i), hi.clone());
                }
                for &(a, u) in child.rel_terms() {
                    let (Some(i), Some(j)) = (
                        model.frame().world_index(&rl.worlds[&a]),
                        model.frame().world_index(&rl.worlds[&u]),
                    ) else {
                        continue;
                    };
                    rl.terms.insert(Term::Rel(a, u), model.frame().access(i, j).clone());
                }
                if realises(model, &rl, child) {
                    return true;
                }
            }
        }
    }
    false
}

/// Draws until `samples` premise-realising pairs have been checked (or
/// `50 * samples` draws were made).
pub fn sample_rule(rule: RuleKind, samples: usize, seed: u64) -> RuleSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (rule as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut report = RuleSample {
        rule: Some(rule),
        ..RuleSample::default()
    };
    while report.samples < samples && report.attempts < 50 * samples {
        report.attempts += 1;
        let d = draw(&mut rng, rule);
        if !realises(&d.model, &d.rl, &d.branch) {
            continue;
        }
        report.samples += 1;
        let inst = applicable(&d.branch).into_iter().find(|i| i.rule == rule);
        let Some(inst) = inst else {
            report.failures.push(format!(
                "not applicable: {}",
                d.branch.constraints().next().expect("premise")
            ));
            continue;
        };
        if !apply(&d.branch, &inst).iter().any(|child| child_realisable(&d, child)) {
            report
                .failures
                .push(format!("{inst} with premise realised at {}", d.rl.worlds[&Label::ROOT]));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_rule_samples_cleanly() {
        for rule in RuleKind::ALL {
            let r = sample_rule(rule, 40, 3);
            assert_eq!(
                r.samples, 40,
                "{rule}: only {} of {} draws realised",
                r.samples, r.attempts
            );
            assert!(r.failures.is_empty(), "{rule}: {:?}", r.failures);
        }
    }
}
