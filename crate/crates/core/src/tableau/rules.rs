use std::fmt;

use crate::constraints::{Branch, Constraint, InstanceKey, Label, Origin, Rel, Structure, Term, ValueTerm};
use crate::formula::Formula;

/// The fourteen rules. `Ge`/`Le` in a name stand for the ▷/◁ classes where
/// the rule covers both the strict and the non-strict relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Inv,
    AndGe,
    AndLe,
    ImpGe,
    ImpLe,
    ImpLt,
    BoxGe,
    BoxLe,
    BoxLt,
    DiaLe,
    DiaGe,
    DiaGt,
    BoxEq,
    DiaEq,
}

impl RuleKind {
    pub const ALL: [RuleKind; 14] = [
        RuleKind::Inv,
        RuleKind::AndGe,
        RuleKind::AndLe,
        RuleKind::ImpGe,
        RuleKind::ImpLe,
        RuleKind::ImpLt,
        RuleKind::BoxGe,
        RuleKind::BoxLe,
        RuleKind::BoxLt,
        RuleKind::DiaLe,
        RuleKind::DiaGe,
        RuleKind::DiaGt,
        RuleKind::BoxEq,
        RuleKind::DiaEq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Inv => "~",
            RuleKind::AndGe => "&_>",
            RuleKind::AndLe => "&_<",
            RuleKind::ImpGe => "->_>",
            RuleKind::ImpLe => "->_<=",
            RuleKind::ImpLt => "->_<",
            RuleKind::BoxGe => "[]_>",
            RuleKind::BoxLe => "[]_<=",
            RuleKind::BoxLt => "[]_<",
            RuleKind::DiaLe => "<>_<",
            RuleKind::DiaGe => "<>_>=",
            RuleKind::DiaGt => "<>_>",
            RuleKind::BoxEq => "[]_=",
            RuleKind::DiaEq => "<>_=",
        }
    }

    pub fn is_branching(self) -> bool {
        !matches!(
            self,
            RuleKind::Inv | RuleKind::AndGe | RuleKind::ImpLt | RuleKind::BoxLt | RuleKind::DiaGt
        )
    }

    pub fn is_modal(self) -> bool {
        self >= RuleKind::BoxGe
    }

    /// `[]_=` and `<>_=`, which saturate over relational terms.
    pub fn is_equality(self) -> bool {
        matches!(self, RuleKind::BoxEq | RuleKind::DiaEq)
    }

    /// Rules that introduce a fresh variable, label or T-pair.
    pub fn introduces_fresh(self) -> bool {
        matches!(
            self,
            RuleKind::ImpGe
                | RuleKind::ImpLe
                | RuleKind::ImpLt
                | RuleKind::BoxGe
                | RuleKind::BoxLe
                | RuleKind::BoxLt
                | RuleKind::DiaLe
                | RuleKind::DiaGe
                | RuleKind::DiaGt
        )
    }

    pub fn arity(self) -> usize {
        if self.is_branching() {
            2
        } else {
            1
        }
    }

    /// Rule for a constraint, by main connective and relation.
    pub fn for_constraint(c: &Constraint) -> Option<RuleKind> {
        let Structure::Labelled(_, phi) = &c.left else {
            return None;
        };
        let ge = matches!(c.rel, Rel::Ge | Rel::Gt);
        let le = matches!(c.rel, Rel::Le | Rel::Lt);
        Some(match phi {
            Formula::Inv(_) if c.rel != Rel::Eq => RuleKind::Inv,
            Formula::And(..) if ge => RuleKind::AndGe,
            Formula::And(..) if le => RuleKind::AndLe,
            Formula::Imp(..) if ge => RuleKind::ImpGe,
            Formula::Imp(..) if c.rel == Rel::Le => RuleKind::ImpLe,
            Formula::Imp(..) if c.rel == Rel::Lt => RuleKind::ImpLt,
            Formula::Box(_) if ge => RuleKind::BoxGe,
            Formula::Box(_) if c.rel == Rel::Le => RuleKind::BoxLe,
            Formula::Box(_) if c.rel == Rel::Lt => RuleKind::BoxLt,
            Formula::Box(_) if c.rel == Rel::Eq => RuleKind::BoxEq,
            Formula::Dia(_) if le => RuleKind::DiaLe,
            Formula::Dia(_) if c.rel == Rel::Ge => RuleKind::DiaGe,
            Formula::Dia(_) if c.rel == Rel::Gt => RuleKind::DiaGt,
            Formula::Dia(_) if c.rel == Rel::Eq => RuleKind::DiaEq,
            _ => return None,
        })
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: RuleKind,
    pub premise: Constraint,
    /// Trace step of the premise (0 if unstamped).
    pub premise_step: u32,
    /// The relational term `wRu` an equality rule is applied over.
    pub rel_term: Option<(Label, Label)>,
}

impl RuleInstance {
    pub fn key(&self) -> InstanceKey {
        (self.rule, self.premise.clone(), self.rel_term)
    }

    pub fn label(&self) -> Label {
        self.premise.label().expect("rule premises are labelled")
    }

    /// The world whose content the application builds: `u` for equality
    /// rules over `wRu`, the premise label otherwise.
    pub fn site(&self) -> Label {
        match self.rel_term {
            Some((_, u)) => u,
            None => self.label(),
        }
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.rule, self.premise)?;
        if let Some((a, b)) = self.rel_term {
            write!(f, " over {a}R{b}")?;
        }
        Ok(())
    }
}

/// `w: φ < 1` is left alone when some `w: φ < T` with another `T` is on
/// the branch; likewise `w: φ > 0` against `w: φ > T`.
fn suppressed(b: &Branch, c: &Constraint) -> bool {
    let bound = match (c.rel, c.right) {
        (Rel::Lt, ValueTerm::ONE) => ValueTerm::ONE,
        (Rel::Gt, ValueTerm::ZERO) => ValueTerm::ZERO,
        _ => return false,
    };
    b.constraints()
        .any(|other| other.left == c.left && other.rel == c.rel && other.right != bound)
}

/// Every rule instance whose premise is live on the branch and whose
/// conclusions are not yet there.
pub fn applicable(b: &Branch) -> Vec<RuleInstance> {
    let mut out = Vec::new();
    for e in b.entries() {
        let Some(rule) = RuleKind::for_constraint(&e.constraint) else {
            continue;
        };
        if suppressed(b, &e.constraint) {
            continue;
        }
        let mut push = |rel_term| {
            let inst = RuleInstance {
                rule,
                premise: e.constraint.clone(),
                premise_step: e.step,
                rel_term,
            };
            if !b.is_applied(&inst.key()) && !already_concluded(b, &inst) {
                out.push(inst);
            }
        };
        if rule.is_equality() {
            let w = e.constraint.label().expect("labelled");
            for &(from, to) in b.rel_terms() {
                if from == w {
                    push(Some((from, to)));
                }
            }
        } else {
            push(None);
        }
    }
    out
}

/// For rules without fresh symbols: some child is already contained in
/// the branch.
fn already_concluded(b: &Branch, inst: &RuleInstance) -> bool {
    if inst.rule.introduces_fresh() {
        return false;
    }
    let mut scratch = b.clone();
    (0..inst.rule.arity()).any(|alt| conclusions(&mut scratch, inst, alt).iter().all(|c| b.contains(c)))
}

pub fn is_complete(b: &Branch) -> bool {
    applicable(b).is_empty()
}

fn sub(phi: &Formula) -> Formula {
    match phi {
        Formula::Inv(a) | Formula::Box(a) | Formula::Dia(a) => (**a).clone(),
        _ => unreachable!("unary connective expected"),
    }
}

fn parts(phi: &Formula) -> (Formula, Formula) {
    match phi {
        Formula::And(a, b) | Formula::Imp(a, b) => ((**a).clone(), (**b).clone()),
        _ => unreachable!("binary connective expected"),
    }
}

/// The constraints of child `alt`, creating fresh symbols in `b`.
pub fn conclusions(b: &mut Branch, inst: &RuleInstance, alt: usize) -> Vec<Constraint> {
    let Structure::Labelled(w, phi) = &inst.premise.left else {
        unreachable!("rule premises are labelled")
    };
    let (w, rel, t) = (*w, inst.premise.rel, inst.premise.right);
    let lab = |label: Label, f: Formula, r: Rel, v: ValueTerm| Constraint::labelled(label, f, r, v);
    let terms = |a: ValueTerm, r: Rel, v: ValueTerm| Constraint::terms(a, r, v);
    let one = ValueTerm::ONE;
    let zero = ValueTerm::ZERO;
    match (inst.rule, alt) {
        (RuleKind::Inv, _) => vec![lab(w, sub(phi), rel.dual(), t.complement())],
        (RuleKind::AndGe, _) => {
            let (a, c) = parts(phi);
            vec![lab(w, a, rel, t), lab(w, c, rel, t)]
        }
        (RuleKind::AndLe, k) => {
            let (a, c) = parts(phi);
            vec![lab(w, if k == 0 { a } else { c }, rel, t)]
        }
        (RuleKind::ImpGe, 0) => vec![lab(w, parts(phi).1, rel, t)],
        (RuleKind::ImpGe, _) => {
            let (a, c) = parts(phi);
            let v = b.fresh_var();
            vec![terms(one, rel, t), lab(w, c, Rel::Ge, v), lab(w, a, Rel::Le, v)]
        }
        (RuleKind::ImpLe, 0) => vec![terms(one, Rel::Le, t)],
        (RuleKind::ImpLe, _) | (RuleKind::ImpLt, _) => {
            let (a, c) = parts(phi);
            let v = b.fresh_var();
            vec![lab(w, c.clone(), rel, t), lab(w, a, Rel::Ge, v), lab(w, c, Rel::Lt, v)]
        }
        (RuleKind::BoxGe, 0) => vec![lab(w, phi.clone(), Rel::Eq, Term::OneSym.into()), terms(one, rel, t)],
        (RuleKind::BoxLe, 0) => vec![terms(one, Rel::Le, t)],
        (RuleKind::BoxGe | RuleKind::BoxLe | RuleKind::BoxLt, _) => {
            let psi = sub(phi);
            let (lo, hi) = b.fresh_tpair(w);
            let u = b.fresh_label(w);
            let r: ValueTerm = Term::Rel(w, u).into();
            let mut out = Vec::with_capacity(4);
            match inst.rule {
                RuleKind::BoxGe => {
                    out.push(lab(w, phi.clone(), Rel::Eq, lo));
                    out.push(terms(t, rel.dual(), lo));
                }
                RuleKind::BoxLe => out.push(terms(t, Rel::Ge, lo)),
                _ => out.push(terms(t, Rel::Gt, lo)),
            }
            out.push(lab(u, psi.clone(), Rel::Lt, r));
            out.push(lab(u, psi, Rel::Lt, hi));
            out
        }
        (RuleKind::DiaLe, 0) => vec![
            lab(w, phi.clone(), Rel::Eq, Term::ZeroSym.into()),
            terms(t, rel.dual(), zero),
        ],
        (RuleKind::DiaGe, 0) => vec![terms(t, Rel::Le, zero)],
        (RuleKind::DiaLe | RuleKind::DiaGe | RuleKind::DiaGt, _) => {
            let psi = sub(phi);
            let (lo, hi) = b.fresh_tpair(w);
            let u = b.fresh_label(w);
            let r: ValueTerm = Term::Rel(w, u).into();
            let mut out = Vec::with_capacity(4);
            match inst.rule {
                RuleKind::DiaLe => {
                    out.push(lab(w, phi.clone(), Rel::Eq, hi));
                    out.push(terms(hi, rel, t));
                }
                RuleKind::DiaGe => out.push(terms(t, Rel::Le, hi)),
                _ => out.push(terms(t, Rel::Lt, hi)),
            }
            out.push(terms(r, Rel::Gt, lo));
            out.push(lab(u, psi, Rel::Gt, lo));
            out
        }
        (RuleKind::BoxEq, k) => {
            let (_, u) = inst.rel_term.expect("equality rules carry a relational term");
            let psi = sub(phi);
            if k == 0 {
                vec![lab(u, psi, Rel::Ge, t)]
            } else {
                vec![
                    lab(u, psi.clone(), Rel::Lt, t),
                    lab(u, psi, Rel::Ge, Term::Rel(w, u).into()),
                ]
            }
        }
        (RuleKind::DiaEq, k) => {
            let (_, u) = inst.rel_term.expect("equality rules carry a relational term");
            let r: ValueTerm = Term::Rel(w, u).into();
            if k == 0 {
                vec![terms(r, Rel::Le, t)]
            } else {
                vec![lab(u, sub(phi), Rel::Le, t), terms(r, Rel::Gt, t)]
            }
        }
    }
}

/// Applies the instance: one child branch per conclusion set.
pub fn apply(b: &Branch, inst: &RuleInstance) -> Vec<Branch> {
    apply_at(b, inst, None)
}

/// [`apply`], recording in the conclusions' dependencies the premise's,
/// the relational term's for the equality rules, and `point` when the
/// rule branches.
pub fn apply_at(b: &Branch, inst: &RuleInstance, point: Option<u32>) -> Vec<Branch> {
    let mut deps = b.deps_of(&inst.premise);
    if let Some((a, u)) = inst.rel_term {
        deps = deps.union(&b.rel_deps(a, u));
    }
    if let (true, Some(p)) = (inst.rule.is_branching(), point) {
        deps = deps.with(p);
    }
    (0..inst.rule.arity())
        .map(|alt| {
            let mut child = b.clone();
            child.mark_applied(inst.key());
            let origin = Origin {
                rule: inst.rule,
                premise: inst.premise_step,
            };
            let concl = conclusions(&mut child, inst, alt);
            debug_assert!(decreases(inst, &concl), "rule {inst} does not decompose its premise");
            for c in concl {
                child.add_derived(c, Some(origin), deps.clone());
            }
            child
        })
        .collect()
}

/// Progress measure: conclusions carry strictly smaller formulas, except
/// the equalities that `[]_>` and `<>_<` hand over to the equality rules.
fn decreases(inst: &RuleInstance, concl: &[Constraint]) -> bool {
    let Structure::Labelled(_, phi) = &inst.premise.left else {
        return false;
    };
    concl.iter().all(|c| match &c.left {
        Structure::Labelled(_, psi) => {
            psi.size() < phi.size() || (matches!(inst.rule, RuleKind::BoxGe | RuleKind::DiaLe) && c.rel == Rel::Eq)
        }
        Structure::Term(_) => true,
    })
}
