use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::constraints::{Branch, Label, Structure, TSym, Term, ValueTerm};
use crate::formula::Formula;
use crate::models::{FModel, StandardModel};
use crate::rational::{complement, format_rational, half, in_unit_interval, one, zero, Rational};
use crate::solver::{Betweenness, Solution, SolverVar};

/// Where labels and value terms land in a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realisation {
    pub worlds: BTreeMap<Label, String>,
    /// Values of uncomplemented terms; complements are derived.
    pub terms: BTreeMap<Term, Rational>,
}

impl Realisation {
    pub fn value(&self, vt: ValueTerm) -> Option<Rational> {
        let base = match vt.term {
            Term::Const0 | Term::ZeroSym => Some(zero()),
            Term::Const1 | Term::OneSym => Some(one()),
            t => self.terms.get(&t).cloned(),
        }?;
        Some(if vt.complemented { complement(&base) } else { base })
    }

    pub fn world(&self, w: Label) -> Option<&str> {
        self.worlds.get(&w).map(String::as_str)
    }
}

/// Builds the model of an open branch from its witness: worlds are the
/// labels, `wRu` and `v(p, w)` are read off the solution (unconstrained
/// atoms are 0), and `T(w)` collects the values of `w`'s T-symbols with
/// `0`, `1/2`, `1`, closed under `1 - x`.
pub fn extract_countermodel(b: &Branch, sol: &Solution, crisp: bool) -> (FModel, Realisation) {
    let names: BTreeMap<Label, String> = b.labels().iter().map(|&w| (w, w.name())).collect();
    let mut frame = StandardModel::new(names.values().cloned()).expect("labels are distinct");
    let mut terms = BTreeMap::new();
    for (i, v) in sol.system.vars().iter().enumerate() {
        let x = sol.values[i].clone();
        match v {
            SolverVar::Term(t) => {
                terms.insert(*t, x);
            }
            SolverVar::Labelled(w, Formula::Atom(p)) => {
                frame.set_value(p, &names[w], x).expect("label names are worlds");
            }
            SolverVar::Labelled(..) => {}
        }
    }
    for &(a, u) in b.rel_terms() {
        let r = terms.get(&Term::Rel(a, u)).cloned().unwrap_or_else(zero);
        frame
            .set_access(&names[&a], &names[&u], r)
            .expect("label names are worlds");
    }
    frame.set_crisp(crisp);
    let mut model = FModel::from_standard(frame);
    for (&w, name) in &names {
        let mut set: BTreeSet<Rational> = [zero(), half(), one()].into_iter().collect();
        for s in b.t_registry(w) {
            let x = match s.term(w) {
                Term::ZeroSym => zero(),
                Term::OneSym => one(),
                t => terms.get(&t).cloned().unwrap_or_else(zero),
            };
            set.insert(complement(&x));
            set.insert(x);
        }
        model.set_t(name, set).expect("label names are worlds");
    }
    (model, Realisation { worlds: names, terms })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealisationViolation {
    /// One of the seven structural conditions on a realisation.
    Item { item: u8, detail: String },
    Constraint {
        constraint: String,
        left: Option<Rational>,
        right: Option<Rational>,
    },
}

impl fmt::Display for RealisationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: &Option<Rational>| x.as_ref().map_or("undefined".to_string(), format_rational);
        match self {
            RealisationViolation::Item { item, detail } => write!(f, "item {item}: {detail}"),
            RealisationViolation::Constraint {
                constraint,
                left,
                right,
            } => {
                write!(
                    f,
                    "not realised: {constraint} (left {}, right {})",
                    show(left),
                    show(right)
                )
            }
        }
    }
}

/// Memoised `v(φ, world)` in one model.
pub(crate) struct Evaluator<'m> {
    model: &'m FModel,
    cache: HashMap<Formula, Vec<Rational>>,
}

impl<'m> Evaluator<'m> {
    pub(crate) fn new(model: &'m FModel) -> Self {
        Evaluator {
            model,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn eval(&mut self, phi: &Formula, world: &str) -> Option<Rational> {
        let i = self.model.frame().world_index(world)?;
        if !self.cache.contains_key(phi) {
            let values = self.model.eval_everywhere(phi).ok()?;
            self.cache.insert(phi.clone(), values);
        }
        Some(self.cache[phi][i].clone())
    }
}

/// Checks the seven conditions on a realisation and that every live
/// constraint of the branch is realised.
pub fn check_realisation(
    model: &FModel,
    rl: &Realisation,
    b: &Branch,
    betweenness: Betweenness,
) -> Vec<RealisationViolation> {
    let mut out = Vec::new();
    let mut item = |n: u8, detail: String| out.push(RealisationViolation::Item { item: n, detail });

    for (s, expected) in [(Term::ZeroSym, zero()), (Term::OneSym, one())] {
        if let Some(x) = rl.terms.get(&s) {
            if *x != expected {
                item(1, format!("{s} realised as {}", format_rational(x)));
            }
        }
    }

    let world_index = |w: Label| rl.world(w).and_then(|name| model.frame().world_index(name));
    for &(a, u) in b.rel_terms() {
        let (Some(i), Some(j)) = (world_index(a), world_index(u)) else {
            item(2, format!("{a}R{u}: label without a world"));
            continue;
        };
        let r = rl.value(Term::Rel(a, u).into());
        if r.as_ref() != Some(model.frame().access(i, j)) {
            let shown = r.as_ref().map_or("nothing".to_string(), format_rational);
            item(
                2,
                format!(
                    "{a}R{u} realised as {shown} but R = {}",
                    format_rational(model.frame().access(i, j))
                ),
            );
        }
    }

    for (t, x) in &rl.terms {
        if !in_unit_interval(x) {
            item(3, format!("{t} realised outside [0,1] so 1 - {t} is too"));
        }
    }

    for (&w, reg) in b.registries() {
        let Some(i) = world_index(w) else {
            item(4, format!("{w}: label without a world"));
            continue;
        };
        let tset = model.t_set(i);
        let val = |s: TSym| rl.value(s.term(w).into());
        for anchor in [zero(), half(), one()] {
            if !tset.contains(&anchor) {
                item(4, format!("{} not in T({w})", format_rational(&anchor)));
            }
        }
        for &s in reg {
            match val(s) {
                Some(x) if tset.contains(&x) => {}
                Some(x) => item(4, format!("{} = {} not in T({w})", s.term(w), format_rational(&x))),
                None => item(4, format!("{} unrealised", s.term(w))),
            }
        }
        let pairs: Vec<u32> = b.pairs(w).collect();
        for &p in &pairs {
            let (lo, hi) = (val(TSym::Lower(p)), val(TSym::Upper(p)));
            let (Some(lo), Some(hi)) = (lo, hi) else {
                item(4, format!("pair {p} of {w} unrealised"));
                continue;
            };
            if lo >= hi {
                item(
                    4,
                    format!(
                        "t{p}({w}) = {} is not below ts{p}({w}) = {}",
                        format_rational(&lo),
                        format_rational(&hi)
                    ),
                );
            }
            for &s in reg {
                let considered = match s {
                    TSym::Lower(j) | TSym::Upper(j) if j == p => false,
                    TSym::Lower(_) => true,
                    _ => betweenness == Betweenness::Consecutive,
                };
                if let (true, Some(x)) = (considered, val(s)) {
                    if lo < x && x < hi {
                        item(
                            5,
                            format!("{} = {} inside (t{p}({w}), ts{p}({w}))", s.term(w), format_rational(&x)),
                        );
                    }
                }
            }
        }
        if reg.len() == 2 && pairs.len() == 1 {
            let p = pairs[0];
            let h = Some(half());
            if val(TSym::Lower(p)) != h && val(TSym::Upper(p)) != h {
                item(6, format!("neither t{p}({w}) nor ts{p}({w}) is 1/2"));
            }
        }
        if reg.len() >= 3 {
            let values: Vec<Option<Rational>> = reg.iter().map(|&s| val(s)).collect();
            for (&s, x) in reg.iter().zip(&values) {
                let partnered = x
                    .as_ref()
                    .is_some_and(|x| values.iter().flatten().any(|y| *y == complement(x)));
                if !partnered {
                    item(7, format!("{} has no partner in T({w})", s.term(w)));
                }
            }
            for anchor in [zero(), half(), one()] {
                if !values.iter().flatten().any(|x| *x == anchor) {
                    item(7, format!("no symbol of T({w}) is {}", format_rational(&anchor)));
                }
            }
        }
    }

    let mut ev = Evaluator::new(model);
    for c in b.constraints() {
        let left = match &c.left {
            Structure::Labelled(w, phi) => rl.world(*w).and_then(|name| ev.eval(phi, name)),
            Structure::Term(t) => rl.value(*t),
        };
        let right = rl.value(c.right);
        let ok = match (&left, &right) {
            (Some(l), Some(r)) => c.rel.holds(l, r),
            _ => false,
        };
        if !ok {
            out.push(RealisationViolation::Constraint {
                constraint: c.to_string(),
                left,
                right,
            });
        }
    }
    out
}

/// Graphviz rendering: worlds as nodes carrying `T(w)` and atom values,
/// accessibility degrees on the edges.
pub fn to_dot(model: &FModel) -> String {
    let frame = model.frame();
    let mut out = String::from("digraph countermodel {\n  node [shape=box];\n");
    let atoms: Vec<String> = frame.atoms().map(str::to_string).collect();
    for (i, w) in frame.worlds().iter().enumerate() {
        let t: Vec<String> = model.t_set(i).iter().map(format_rational).collect();
        let mut label = format!("{w}\\nT = {{{}}}", t.join(", "));
        for p in &atoms {
            label.push_str(&format!("\\n{p} = {}", format_rational(&frame.value(p, i))));
        }
        out.push_str(&format!("  \"{w}\" [label=\"{label}\"];\n"));
    }
    for (i, j, r) in frame.edges() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            frame.worlds()[i],
            frame.worlds()[j],
            format_rational(r)
        ));
    }
    out.push_str("}\n");
    out
}
