//! Branch closure: the raw system plus the per-world conditions on the
//! T-symbols, searched DPLL-style over their disjunctions.

use std::fmt;

use super::engine::{feasible_ordered, Edges, Incremental, SolveResult};
use super::{translate, LinTerm, LinearAtom, SolverVar, System};
use crate::constraints::{Branch, Label, Rel, TSym, Term};
use crate::rational::{half, one, zero, Rational};

/// Which symbols may not sit strictly inside a matched pair's interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Betweenness {
    /// No registered symbol of the same world, lower or upper. The pair
    /// then brackets two consecutive members of `T(w)`, which is what
    /// countermodel extraction needs.
    #[default]
    Consecutive,
    /// Only lower symbols `t_j(w)`.
    Literal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CloseOptions {
    /// Adds `wRu = 0 or wRu = 1` for every relational term.
    pub crisp: bool,
    pub betweenness: Betweenness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseKind {
    /// `T(w)` is a single matched pair: `{0, 1/2}` or `{1/2, 1}`.
    TwoCase(Label),
    /// Some symbol of `T(w)` takes the given anchor value.
    Anchor(Label, Rational),
    /// The symbol has a partner in `T(w)` with complementary value.
    Partner(Label, TSym),
    /// The symbol is outside the open interval of pair `i`.
    Between(Label, u32, TSym),
    Crisp(Label, Label),
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseKind::TwoCase(w) => write!(f, "two-case rule at {w}"),
            ClauseKind::Anchor(w, q) => write!(f, "anchor {q} in T({w})"),
            ClauseKind::Partner(w, s) => write!(f, "partner of {} in T({w})", s.term(*w)),
            ClauseKind::Between(w, i, s) => write!(f, "{} outside (t{i}({w}), ts{i}({w}))", s.term(*w)),
            ClauseKind::Crisp(a, b) => write!(f, "{a}R{b} crisp"),
        }
    }
}

/// A disjunction of conjunctions of atoms.
#[derive(Clone, Debug)]
pub struct Clause {
    pub kind: ClauseKind,
    pub alternatives: Vec<Vec<LinearAtom>>,
}

#[derive(Clone, Debug, Default)]
pub struct SideConditions {
    pub clauses: Vec<Clause>,
}

fn sym(sys: &mut System, w: Label, s: TSym) -> LinTerm {
    sys.value_term(s.term(w).into())
}

fn eq_const(t: LinTerm, q: Rational) -> LinearAtom {
    LinearAtom::eq(t, LinTerm::Const(q))
}

/// The closure conditions on every registry of the branch, over the
/// variables of `sys` (which must be the branch's translation).
pub fn side_conditions(branch: &Branch, sys: &mut System, opts: CloseOptions) -> SideConditions {
    let mut clauses = Vec::new();
    for (&w, reg) in branch.registries() {
        let symbols: Vec<TSym> = reg.iter().copied().collect();
        let pairs: Vec<u32> = branch.pairs(w).collect();
        if symbols.len() == 2 && pairs.len() == 1 {
            let i = pairs[0];
            let t = sym(sys, w, TSym::Lower(i));
            let ts = sym(sys, w, TSym::Upper(i));
            clauses.push(Clause {
                kind: ClauseKind::TwoCase(w),
                alternatives: vec![
                    vec![eq_const(t.clone(), zero()), eq_const(ts.clone(), half())],
                    vec![eq_const(t, half()), eq_const(ts, one())],
                ],
            });
        } else if symbols.len() >= 3 {
            for anchor in [zero(), one(), half()] {
                let mut order = symbols.clone();
                // lower symbols and [0] are the likely zeros, uppers and [1] the likely ones
                order.sort_by_key(|s| {
                    let low = matches!(s, TSym::Zero | TSym::Lower(_));
                    if anchor == one() {
                        low
                    } else {
                        !low
                    }
                });
                let alternatives = order
                    .iter()
                    .map(|&s| vec![eq_const(sym(sys, w, s), anchor.clone())])
                    .collect();
                clauses.push(Clause {
                    kind: ClauseKind::Anchor(w, anchor),
                    alternatives,
                });
            }
        }
        for &i in &pairs {
            let t = sym(sys, w, TSym::Lower(i));
            let ts = sym(sys, w, TSym::Upper(i));
            for &s in &symbols {
                let inside_candidate = match (s, opts.betweenness) {
                    (TSym::Zero | TSym::One, _) => false,
                    (TSym::Lower(j) | TSym::Upper(j), _) if j == i => false,
                    (TSym::Upper(_), Betweenness::Literal) => false,
                    _ => true,
                };
                if !inside_candidate {
                    continue;
                }
                let x = sym(sys, w, s);
                clauses.push(Clause {
                    kind: ClauseKind::Between(w, i, s),
                    alternatives: vec![
                        vec![LinearAtom::new(x.clone(), Rel::Le, t.clone())],
                        vec![LinearAtom::new(x, Rel::Ge, ts.clone())],
                    ],
                });
            }
        }
        if symbols.len() >= 3 {
            for &s in &symbols {
                let x = sym(sys, w, s);
                let alternatives = symbols
                    .iter()
                    .map(|&s2| {
                        let y = sym(sys, w, s2);
                        let complement = match y {
                            LinTerm::Var(i) => LinTerm::OneMinus(i),
                            LinTerm::OneMinus(i) => LinTerm::Var(i),
                            LinTerm::Const(q) => LinTerm::Const(one() - q),
                        };
                        vec![LinearAtom::eq(x.clone(), complement)]
                    })
                    .collect();
                clauses.push(Clause {
                    kind: ClauseKind::Partner(w, s),
                    alternatives,
                });
            }
        }
    }
    if opts.crisp {
        clauses.extend(crisp_conditions(branch, sys));
    }
    SideConditions { clauses }
}

/// `wRu = 0 or wRu = 1` for every relational term on the branch.
pub fn crisp_conditions(branch: &Branch, sys: &mut System) -> Vec<Clause> {
    branch
        .rel_terms()
        .iter()
        .map(|&(a, b)| {
            let r = sys.value_term(Term::Rel(a, b).into());
            Clause {
                kind: ClauseKind::Crisp(a, b),
                alternatives: vec![vec![eq_const(r.clone(), zero())], vec![eq_const(r, one())]],
            }
        })
        .collect()
}

/// An open branch's witness.
#[derive(Clone, Debug)]
pub struct Solution {
    pub system: System,
    pub values: Vec<Rational>,
    /// The side-condition disjuncts the witness satisfies.
    pub resolution: Vec<LinearAtom>,
}

impl Solution {
    pub fn value(&self, v: &SolverVar) -> Option<&Rational> {
        self.system.lookup(v).map(|i| &self.values[i])
    }
}

#[derive(Clone, Debug)]
pub enum CloseResult {
    Closed,
    Open(Box<Solution>),
}

impl CloseResult {
    pub fn is_closed(&self) -> bool {
        matches!(self, CloseResult::Closed)
    }
}

/// Decides whether the branch is closed: its raw system has no solution
/// satisfying one disjunct of every side-condition clause.
pub fn close_check(branch: &Branch, opts: CloseOptions) -> CloseResult {
    let mut sys = translate(branch);
    let side = side_conditions(branch, &mut sys, opts);
    let n = sys.num_vars();
    let vocabulary: Vec<LinearAtom> = side.clauses.iter().flat_map(|c| c.alternatives.concat()).collect();
    let Some(mut state) = Incremental::new(n, &sys.atoms, &vocabulary) else {
        return CloseResult::Closed;
    };
    // `None` marks a disjunct that is false outright
    let compiled: Vec<Vec<Option<Edges>>> = side
        .clauses
        .iter()
        .map(|c| c.alternatives.iter().map(|a| state.compile(a)).collect())
        .collect();
    let mut picks = Vec::new();
    let remaining: Vec<usize> = (0..side.clauses.len()).collect();
    if !resolve(&mut state, &mut picks, &compiled, remaining) {
        return CloseResult::Closed;
    }
    let resolution: Vec<LinearAtom> = picks
        .iter()
        .flat_map(|&(c, a)| side.clauses[c].alternatives[a].iter().cloned())
        .collect();
    let mut atoms = sys.atoms.clone();
    atoms.extend_from_slice(&resolution);
    match feasible_ordered(n, &atoms, &sys.fixing_order()) {
        SolveResult::Sat(values) => CloseResult::Open(Box::new(Solution {
            system: sys,
            values,
            resolution,
        })),
        SolveResult::Unsat => unreachable!("resolved system was checked feasible"),
    }
}

/// Commits one disjunct per remaining clause to `state`, recording the
/// `(clause, disjunct)` picks. Forced choices go first; otherwise the
/// clause with the fewest live disjuncts is split.
fn resolve(
    state: &mut Incremental,
    picks: &mut Vec<(usize, usize)>,
    clauses: &[Vec<Option<Edges>>],
    mut remaining: Vec<usize>,
) -> bool {
    loop {
        let mut progress = false;
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut k = 0;
        while k < remaining.len() {
            let c = remaining[k];
            let live: Vec<usize> = (0..clauses[c].len())
                .filter(|&a| clauses[c][a].as_ref().is_some_and(|e| state.admits(e)))
                .collect();
            match live.len() {
                0 => return false,
                1 => {
                    let edges = clauses[c][live[0]].as_ref().expect("live disjunct");
                    if !state.add(edges) {
                        return false;
                    }
                    picks.push((c, live[0]));
                    remaining.swap_remove(k);
                    progress = true;
                }
                _ => {
                    if best.as_ref().is_none_or(|(_, b)| live.len() < b.len()) {
                        best = Some((k, live));
                    }
                    k += 1;
                }
            }
        }
        if progress {
            continue;
        }
        let Some((k, live)) = best else {
            return true;
        };
        let c = remaining.swap_remove(k);
        for a in live {
            let edges = clauses[c][a].as_ref().expect("live disjunct");
            let mut next = state.clone();
            let mut tried = picks.clone();
            tried.push((c, a));
            if next.add(edges) && resolve(&mut next, &mut tried, clauses, remaining.clone()) {
                *state = next;
                *picks = tried;
                return true;
            }
        }
        return false;
    }
}
