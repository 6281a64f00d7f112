//! Labelled constraints and the branch state they live in.
//!
//! A constraint relates a *structure* (a labelled formula `w: φ` or a value
//! term) to a value term. Value terms are variables `c`, T-symbols
//! `t_i(w)` / `ts_i(w)` / `[0]` / `[1]`, relational terms `wRu`, the
//! constants `0` and `1`, and complements `1 - T`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::formula::Formula;
use crate::tableau::RuleKind;

/// A world label on a branch. Label 0 is the root `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    pub const ROOT: Label = Label(0);

    /// `w`, `w'`, `w''`, `w'''`, then `w4`, `w5`, ...
    pub fn name(self) -> String {
        match self.0 {
            0..=3 => format!("w{}", "'".repeat(self.0 as usize)),
            n => format!("w{n}"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A value term without its complement flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    /// `t_i(w)`
    Lower(Label, u32),
    /// `ts_i(w)`, the successor of `t_i(w)` in `T(w)`.
    Upper(Label, u32),
    /// The T-symbol `[0]`.
    ZeroSym,
    /// The T-symbol `[1]`.
    OneSym,
    /// `wRu`
    Rel(Label, Label),
    Const0,
    Const1,
}

impl Term {
    pub fn is_tsym(self) -> bool {
        matches!(self, Term::Lower(..) | Term::Upper(..) | Term::ZeroSym | Term::OneSym)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "c{i}"),
            Term::Lower(w, i) => write!(f, "t{i}({w})"),
            Term::Upper(w, i) => write!(f, "ts{i}({w})"),
            Term::ZeroSym => f.write_str("[0]"),
            Term::OneSym => f.write_str("[1]"),
            Term::Rel(a, b) => write!(f, "{a}R{b}"),
            Term::Const0 => f.write_str("0"),
            Term::Const1 => f.write_str("1"),
        }
    }
}

/// A value term, possibly complemented. `1 - (1 - T)` is `T` by
/// construction, and `1 - 0` / `1 - 1` fold to the other constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueTerm {
    pub term: Term,
    pub complemented: bool,
}

impl ValueTerm {
    pub const ZERO: ValueTerm = ValueTerm::plain(Term::Const0);
    pub const ONE: ValueTerm = ValueTerm::plain(Term::Const1);

    pub const fn plain(term: Term) -> Self {
        ValueTerm {
            term,
            complemented: false,
        }
    }

    /// `1 - self`
    pub fn complement(self) -> Self {
        match (self.term, self.complemented) {
            (Term::Const0, false) => ValueTerm::ONE,
            (Term::Const1, false) => ValueTerm::ZERO,
            (term, c) => ValueTerm { term, complemented: !c },
        }
    }
}

impl From<Term> for ValueTerm {
    fn from(term: Term) -> Self {
        ValueTerm::plain(term)
    }
}

impl fmt::Display for ValueTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complemented {
            write!(f, "1 - {}", self.term)
        } else {
            write!(f, "{}", self.term)
        }
    }
}

/// Entries of a registry `T(w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TSym {
    Lower(u32),
    Upper(u32),
    Zero,
    One,
}

impl TSym {
    pub fn term(self, label: Label) -> Term {
        match self {
            TSym::Lower(i) => Term::Lower(label, i),
            TSym::Upper(i) => Term::Upper(label, i),
            TSym::Zero => Term::ZeroSym,
            TSym::One => Term::OneSym,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Rel {
    /// Mirror image used when the sides of a constraint swap sign:
    /// `<=` and `>=` trade places, as do `<` and `>`.
    pub fn dual(self) -> Rel {
        match self {
            Rel::Le => Rel::Ge,
            Rel::Ge => Rel::Le,
            Rel::Lt => Rel::Gt,
            Rel::Gt => Rel::Lt,
            Rel::Eq => Rel::Eq,
        }
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            Rel::Le => a <= b,
            Rel::Lt => a < b,
            Rel::Ge => a >= b,
            Rel::Gt => a > b,
            Rel::Eq => a == b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    Labelled(Label, Formula),
    Term(ValueTerm),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub left: Structure,
    pub rel: Rel,
    pub right: ValueTerm,
}

impl Constraint {
    pub fn labelled(label: Label, formula: Formula, rel: Rel, right: impl Into<ValueTerm>) -> Self {
        Constraint {
            left: Structure::Labelled(label, formula),
            rel,
            right: right.into(),
        }
    }

    pub fn terms(left: impl Into<ValueTerm>, rel: Rel, right: impl Into<ValueTerm>) -> Self {
        Constraint {
            left: Structure::Term(left.into()),
            rel,
            right: right.into(),
        }
    }

    /// The value terms mentioned by the constraint.
    pub fn value_terms(&self) -> impl Iterator<Item = ValueTerm> {
        let left = match self.left {
            Structure::Term(t) => Some(t),
            Structure::Labelled(..) => None,
        };
        left.into_iter().chain(std::iter::once(self.right))
    }

    pub fn label(&self) -> Option<Label> {
        match self.left {
            Structure::Labelled(w, _) => Some(w),
            Structure::Term(_) => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.left {
            Structure::Labelled(w, phi) => write!(f, "{w}: {phi} {} {}", self.rel, self.right),
            Structure::Term(t) => write!(f, "{t} {} {}", self.rel, self.right),
        }
    }
}

/// Where a constraint on a branch came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Origin {
    pub rule: RuleKind,
    /// Step number of the premise.
    pub premise: u32,
}

/// The branching points (rule applications that split the branch) a
/// constraint was derived under, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Deps(Arc<[u32]>);

impl Deps {
    pub fn contains(&self, point: u32) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    pub fn points(&self) -> &[u32] {
        &self.0
    }

    pub fn union(&self, other: &Deps) -> Deps {
        if other.0.is_empty() {
            return self.clone();
        }
        if self.0.is_empty() {
            return other.clone();
        }
        let mut all: Vec<u32> = self.0.iter().chain(other.0.iter()).copied().collect();
        all.sort_unstable();
        all.dedup();
        Deps(all.into())
    }

    pub fn with(&self, point: u32) -> Deps {
        self.union(&Deps(Arc::from([point])))
    }
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub constraint: Constraint,
    /// Step number for traces; 0 until stamped.
    pub step: u32,
    pub origin: Option<Origin>,
    pub deps: Deps,
}

/// Identity of a rule application: rule, premise, and (for the equality
/// rules) the relational term it was applied over.
pub type InstanceKey = (RuleKind, Constraint, Option<(Label, Label)>);

/// A tableau branch: an ordered, duplicate-free set of constraints plus
/// the bookkeeping needed to extend it.
#[derive(Clone, Debug)]
pub struct Branch {
    entries: Vec<Entry>,
    seen: HashSet<Constraint>,
    applied: HashSet<InstanceKey>,
    next_label: u32,
    next_var: u32,
    pair_count: BTreeMap<Label, u32>,
    parents: BTreeMap<Label, Label>,
    labels: Vec<Label>,
    rel_terms: Vec<(Label, Label)>,
    /// Dependencies of the constraint that introduced each relational term.
    rel_deps: BTreeMap<(Label, Label), Deps>,
    registry: BTreeMap<Label, BTreeSet<TSym>>,
    retired: usize,
}

impl Branch {
    pub fn empty() -> Self {
        Branch {
            entries: Vec::new(),
            seen: HashSet::new(),
            applied: HashSet::new(),
            next_label: 1,
            next_var: 0,
            pair_count: BTreeMap::new(),
            parents: BTreeMap::new(),
            labels: vec![Label::ROOT],
            rel_terms: Vec::new(),
            rel_deps: BTreeMap::new(),
            registry: BTreeMap::new(),
            retired: 0,
        }
    }

    /// The branch `{w: φ < 1}` a proof attempt starts from.
    pub fn initial(formula: Formula) -> Self {
        let mut b = Branch::empty();
        b.add(
            Constraint::labelled(Label::ROOT, formula, Rel::Lt, ValueTerm::ONE),
            None,
        );
        b
    }

    pub fn from_constraints(constraints: impl IntoIterator<Item = Constraint>) -> Self {
        let mut b = Branch::empty();
        for c in constraints {
            b.add(c, None);
        }
        b
    }

    /// Adds a constraint unless it was already on the branch. Returns true
    /// if it was new.
    pub fn add(&mut self, constraint: Constraint, origin: Option<Origin>) -> bool {
        self.add_derived(constraint, origin, Deps::default())
    }

    /// [`add`](Self::add) for a constraint derived under `deps`.
    pub fn add_derived(&mut self, constraint: Constraint, origin: Option<Origin>, deps: Deps) -> bool {
        if self.seen.contains(&constraint) {
            return false;
        }
        for vt in constraint.value_terms() {
            self.register_term(vt.term, &deps);
        }
        if let (Structure::Labelled(w, _), Rel::Eq) = (&constraint.left, constraint.rel) {
            if !constraint.right.complemented {
                match constraint.right.term {
                    Term::ZeroSym => {
                        self.registry.entry(*w).or_default().insert(TSym::Zero);
                    }
                    Term::OneSym => {
                        self.registry.entry(*w).or_default().insert(TSym::One);
                    }
                    _ => {}
                }
            }
        }
        if let Some(w) = constraint.label() {
            self.note_label(w);
        }
        self.seen.insert(constraint.clone());
        self.entries.push(Entry {
            constraint,
            step: 0,
            origin,
            deps,
        });
        true
    }

    fn register_term(&mut self, term: Term, deps: &Deps) {
        match term {
            Term::Lower(w, i) => {
                self.registry.entry(w).or_default().insert(TSym::Lower(i));
                self.note_label(w);
            }
            Term::Upper(w, i) => {
                self.registry.entry(w).or_default().insert(TSym::Upper(i));
                self.note_label(w);
            }
            Term::Rel(a, b) => {
                if !self.rel_terms.contains(&(a, b)) {
                    self.rel_terms.push((a, b));
                    self.rel_deps.insert((a, b), deps.clone());
                }
                self.note_label(a);
                self.note_label(b);
            }
            Term::Var(i) => self.next_var = self.next_var.max(i + 1),
            _ => {}
        }
    }

    fn note_label(&mut self, w: Label) {
        if !self.labels.contains(&w) {
            self.labels.push(w);
        }
        self.next_label = self.next_label.max(w.0 + 1);
    }

    pub fn fresh_label(&mut self, parent: Label) -> Label {
        let w = Label(self.next_label);
        self.next_label += 1;
        self.labels.push(w);
        self.parents.insert(w, parent);
        w
    }

    pub fn fresh_var(&mut self) -> ValueTerm {
        let c = Term::Var(self.next_var);
        self.next_var += 1;
        c.into()
    }

    /// A matched pair `(t_i(w), ts_i(w))` with a fresh index `i`.
    pub fn fresh_tpair(&mut self, w: Label) -> (ValueTerm, ValueTerm) {
        let count = self.pair_count.entry(w).or_insert(0);
        let i = *count;
        *count += 1;
        let set = self.registry.entry(w).or_default();
        set.insert(TSym::Lower(i));
        set.insert(TSym::Upper(i));
        (Term::Lower(w, i).into(), Term::Upper(w, i).into())
    }

    /// `T(w)`: the T-symbols labelled `w`, plus `[0]` / `[1]` when some
    /// `w: φ = [0]` / `w: φ = [1]` is on the branch.
    pub fn t_registry(&self, w: Label) -> BTreeSet<TSym> {
        self.registry.get(&w).cloned().unwrap_or_default()
    }

    pub fn registries(&self) -> &BTreeMap<Label, BTreeSet<TSym>> {
        &self.registry
    }

    /// Indices of matched pairs labelled `w`.
    pub fn pairs(&self, w: Label) -> impl Iterator<Item = u32> + '_ {
        self.registry.get(&w).into_iter().flatten().filter_map(|s| match s {
            TSym::Lower(i) => Some(*i),
            _ => None,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn parent(&self, w: Label) -> Option<Label> {
        self.parents.get(&w).copied()
    }

    pub fn rel_deps(&self, a: Label, u: Label) -> Deps {
        self.rel_deps.get(&(a, u)).cloned().unwrap_or_default()
    }

    /// Dependencies of a live constraint (empty if it is not live).
    pub fn deps_of(&self, c: &Constraint) -> Deps {
        self.entries
            .iter()
            .find(|e| e.constraint == *c)
            .map(|e| e.deps.clone())
            .unwrap_or_default()
    }

    pub fn rel_terms(&self) -> &[(Label, Label)] {
        &self.rel_terms
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Entry] {
        &mut self.entries
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.entries.iter().map(|e| &e.constraint)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True if the constraint is, or ever was, on the branch.
    pub fn contains(&self, c: &Constraint) -> bool {
        self.seen.contains(c)
    }

    pub fn is_applied(&self, key: &InstanceKey) -> bool {
        self.applied.contains(key)
    }

    pub fn mark_applied(&mut self, key: InstanceKey) -> bool {
        self.applied.insert(key)
    }

    pub fn applied_count(&self) -> usize {
        self.applied.len()
    }

    /// Drops constraints from the live list. They still count as seen, so
    /// they are never re-added and rules already applied to them stay
    /// applied.
    pub fn retire(&mut self, mut drop: impl FnMut(&Entry) -> bool) -> usize {
        let before = self.entries.len();
        self.entries.retain(|e| !drop(e));
        let n = before - self.entries.len();
        self.retired += n;
        n
    }

    pub fn retired(&self) -> usize {
        self.retired
    }

    /// Assigns step numbers to entries that do not have one yet.
    pub fn stamp_steps(&mut self, counter: &mut u32) -> Vec<usize> {
        let mut fresh = Vec::new();
        for (i, e) in self.entries.iter_mut().enumerate() {
            if e.step == 0 {
                *counter += 1;
                e.step = *counter;
                fresh.push(i);
            }
        }
        fresh
    }

    /// One constraint per line, for traces.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.constraint.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn fresh_symbols_never_repeat() {
        let mut b = Branch::initial(parse("[]p -> ~<>~p").unwrap());
        assert_eq!(b.fresh_label(Label::ROOT), Label(1));
        assert_eq!(Label(1).name(), "w'");
        let (t0, ts0) = b.fresh_tpair(Label::ROOT);
        let (t1, _) = b.fresh_tpair(Label::ROOT);
        assert_eq!(t0.term, Term::Lower(Label::ROOT, 0));
        assert_eq!(ts0.term, Term::Upper(Label::ROOT, 0));
        assert_eq!(t1.term, Term::Lower(Label::ROOT, 1));
        assert_ne!(b.fresh_var(), b.fresh_var());
    }

    #[test]
    fn complement_is_normalised() {
        let c: ValueTerm = Term::Var(3).into();
        assert_eq!(c.complement().complement(), c);
        assert_eq!(ValueTerm::ONE.complement(), ValueTerm::ZERO);
        assert_eq!(c.complement().to_string(), "1 - c3");
    }

    #[test]
    fn registry_collects_symbols_and_constants() {
        let w = Label::ROOT;
        let w1 = Label(1);
        let p = parse("p").unwrap();
        let boxed = parse("[]p").unwrap();
        let mut b = Branch::empty();
        assert!(b.t_registry(w).is_empty());
        b.add(Constraint::labelled(w, boxed.clone(), Rel::Eq, Term::OneSym), None);
        b.add(Constraint::terms(Term::Lower(w, 0), Rel::Lt, Term::Rel(w, w1)), None);
        b.add(
            Constraint::labelled(w1, p.clone(), Rel::Lt, ValueTerm::from(Term::Upper(w, 0)).complement()),
            None,
        );
        // [1] on the right of a non-equality does not register
        b.add(Constraint::labelled(w1, p, Rel::Ge, Term::OneSym), None);
        let reg: Vec<_> = b.t_registry(w).into_iter().collect();
        assert_eq!(reg, vec![TSym::Lower(0), TSym::Upper(0), TSym::One]);
        assert!(b.t_registry(w1).is_empty());
        assert_eq!(b.rel_terms(), &[(w, w1)]);
    }

    #[test]
    fn duplicates_are_suppressed() {
        let c = Constraint::labelled(Label::ROOT, parse("p").unwrap(), Rel::Lt, ValueTerm::ONE);
        let mut b = Branch::empty();
        assert!(b.add(c.clone(), None));
        assert!(!b.add(c.clone(), None));
        assert_eq!(b.len(), 1);
        b.retire(|_| true);
        assert!(!b.add(c, None));
        assert_eq!(b.len(), 0);
    }

    #[test]
    fn dump_format() {
        let b = Branch::from_constraints([
            Constraint::labelled(Label::ROOT, parse("[]p -> ~<>~p").unwrap(), Rel::Lt, ValueTerm::ONE),
            Constraint::terms(Term::Rel(Label::ROOT, Label(1)), Rel::Gt, Term::Lower(Label::ROOT, 0)),
        ]);
        assert_eq!(b.dump(), "w: []p -> ~<>~p < 1\nwRw' > t0(w)\n");
    }
}
