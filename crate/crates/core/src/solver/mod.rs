//! Exact feasibility of the inequality systems that decide branch closure.
//!
//! Every constraint on a branch relates at most two unknowns with unit
//! coefficients (`x ▽ y`, `x ▽ 1 - y`, `x ▽ q`), so the systems are
//! two-variable-per-inequality systems and are decided by negative-cycle
//! detection on a doubled difference graph.

mod closure;
mod engine;

use std::collections::HashMap;
use std::fmt;

use crate::constraints::{Branch, Constraint, Label, Rel, Structure, Term, ValueTerm};
use crate::formula::Formula;
use crate::rational::{format_rational, one, zero, Rational};

pub use closure::{
    close_check, crisp_conditions, side_conditions, Betweenness, Clause, ClauseKind, CloseOptions, CloseResult,
    SideConditions, Solution,
};
pub use engine::{feasible, infeasible_core, is_feasible, SolveResult};

/// What a solver variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverVar {
    Term(Term),
    Labelled(Label, Formula),
}

impl SolverVar {
    /// Extraction fixes T-symbols first, then relational terms, then atoms.
    fn fixing_rank(&self) -> u8 {
        match self {
            SolverVar::Term(t) if t.is_tsym() => 0,
            SolverVar::Term(Term::Rel(..)) => 1,
            SolverVar::Labelled(_, Formula::Atom(_)) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for SolverVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverVar::Term(t) => write!(f, "{t}"),
            SolverVar::Labelled(w, phi) => write!(f, "{w}: {phi}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinTerm {
    Var(usize),
    /// `1 - x`
    OneMinus(usize),
    Const(Rational),
}

impl LinTerm {
    pub fn eval(&self, values: &[Rational]) -> Rational {
        match self {
            LinTerm::Var(i) => values[*i].clone(),
            LinTerm::OneMinus(i) => one() - &values[*i],
            LinTerm::Const(q) => q.clone(),
        }
    }

    /// `(variable, coefficient)` and constant offset.
    fn linear(&self) -> (Option<(usize, i8)>, Rational) {
        match self {
            LinTerm::Var(i) => (Some((*i, 1)), zero()),
            LinTerm::OneMinus(i) => (Some((*i, -1)), one()),
            LinTerm::Const(q) => (None, q.clone()),
        }
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinTerm::Var(i) => write!(f, "x{i}"),
            LinTerm::OneMinus(i) => write!(f, "1 - x{i}"),
            LinTerm::Const(q) => f.write_str(&format_rational(q)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "=",
        }
    }
}

/// `left cmp right`, normalised so that only `<=`, `<` and `=` occur.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub left: LinTerm,
    pub cmp: Cmp,
    pub right: LinTerm,
}

impl LinearAtom {
    pub fn new(left: LinTerm, rel: Rel, right: LinTerm) -> Self {
        let (left, cmp, right) = match rel {
            Rel::Le => (left, Cmp::Le, right),
            Rel::Lt => (left, Cmp::Lt, right),
            Rel::Eq => (left, Cmp::Eq, right),
            Rel::Ge => (right, Cmp::Le, left),
            Rel::Gt => (right, Cmp::Lt, left),
        };
        LinearAtom { left, cmp, right }
    }

    pub fn eq(left: LinTerm, right: LinTerm) -> Self {
        LinearAtom::new(left, Rel::Eq, right)
    }

    pub fn holds(&self, values: &[Rational]) -> bool {
        let (a, b) = (self.left.eval(values), self.right.eval(values));
        match self.cmp {
            Cmp::Le => a <= b,
            Cmp::Lt => a < b,
            Cmp::Eq => a == b,
        }
    }

    /// The atom as `Σ coef·x ≤ bound` pieces (two for equalities).
    fn pieces(&self) -> Vec<Piece> {
        let (lv, lc) = self.left.linear();
        let (rv, rc) = self.right.linear();
        let mut coefs: Vec<(usize, i8)> = Vec::with_capacity(2);
        let mut push = |v: usize, c: i8| {
            if let Some(slot) = coefs.iter_mut().find(|(x, _)| *x == v) {
                slot.1 += c;
            } else {
                coefs.push((v, c));
            }
        };
        if let Some((v, c)) = lv {
            push(v, c);
        }
        if let Some((v, c)) = rv {
            push(v, -c);
        }
        coefs.retain(|(_, c)| *c != 0);
        // left - right cmp 0  <=>  Σ coef·x cmp rc - lc
        let bound = rc - lc;
        let le = Piece {
            coefs: coefs.clone(),
            bound: bound.clone(),
            strict: self.cmp == Cmp::Lt,
        };
        if self.cmp != Cmp::Eq {
            return vec![le];
        }
        let ge = Piece {
            coefs: coefs.iter().map(|(v, c)| (*v, -c)).collect(),
            bound: -bound,
            strict: false,
        };
        vec![le, ge]
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.cmp.symbol(), self.right)
    }
}

/// `Σ coef·x ≤ bound` (or `<`) with at most two variables.
#[derive(Clone, Debug)]
struct Piece {
    coefs: Vec<(usize, i8)>,
    bound: Rational,
    strict: bool,
}

/// A translated branch: solver variables and the atoms over them.
#[derive(Clone, Debug, Default)]
pub struct System {
    vars: Vec<SolverVar>,
    index: HashMap<SolverVar, usize>,
    pub atoms: Vec<LinearAtom>,
}

impl System {
    pub fn new() -> Self {
        System::default()
    }

    pub fn var(&mut self, v: SolverVar) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push(v.clone());
        self.index.insert(v, i);
        i
    }

    pub fn lookup(&self, v: &SolverVar) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn vars(&self) -> &[SolverVar] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn value_term(&mut self, vt: ValueTerm) -> LinTerm {
        let base = match vt.term {
            Term::Const0 | Term::ZeroSym => LinTerm::Const(zero()),
            Term::Const1 | Term::OneSym => LinTerm::Const(one()),
            t => LinTerm::Var(self.var(SolverVar::Term(t))),
        };
        if !vt.complemented {
            return base;
        }
        match base {
            LinTerm::Var(i) => LinTerm::OneMinus(i),
            LinTerm::Const(q) => LinTerm::Const(one() - q),
            LinTerm::OneMinus(i) => LinTerm::Var(i),
        }
    }

    pub fn structure(&mut self, s: &Structure) -> LinTerm {
        match s {
            Structure::Labelled(w, phi) => LinTerm::Var(self.var(SolverVar::Labelled(*w, phi.clone()))),
            Structure::Term(vt) => self.value_term(*vt),
        }
    }

    pub fn push_constraint(&mut self, c: &Constraint) {
        let left = self.structure(&c.left);
        let right = self.value_term(c.right);
        self.atoms.push(LinearAtom::new(left, c.rel, right));
    }

    /// Variable order used when fixing a witness.
    fn fixing_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by_key(|&i| (self.vars[i].fixing_rank(), i));
        order
    }

    /// One atom per line, preceded by a legend of the variables.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.vars.iter().enumerate() {
            out.push_str(&format!("# x{i} = {v}\n"));
        }
        for a in &self.atoms {
            out.push_str(&format!("{a}\n"));
        }
        out
    }
}

/// The raw system of a branch: its constraints with every T-symbol, value
/// term and labelled formula replaced by a variable, `[0]`/`[1]` by their
/// constants, plus `t_i(w) < ts_i(w)` for every matched pair.
pub fn translate(branch: &Branch) -> System {
    let mut sys = System::new();
    for c in branch.constraints() {
        sys.push_constraint(c);
    }
    for &w in branch.registries().keys() {
        for i in branch.pairs(w).collect::<Vec<_>>() {
            let t = sys.value_term(Term::Lower(w, i).into());
            let ts = sys.value_term(Term::Upper(w, i).into());
            sys.atoms.push(LinearAtom::new(t, Rel::Lt, ts));
        }
    }
    sys
}

/// `x = q`
pub fn fix(var: usize, q: Rational) -> LinearAtom {
    LinearAtom::eq(LinTerm::Var(var), LinTerm::Const(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::half;

    #[test]
    fn translation_shapes() {
        let w = Label::ROOT;
        let p = parse("p").unwrap();
        let mut b = Branch::empty();
        let c = b.fresh_var();
        b.add(Constraint::labelled(w, p.clone(), Rel::Lt, ValueTerm::ONE), None);
        b.add(Constraint::labelled(w, p.clone(), Rel::Ge, c), None);
        b.add(
            Constraint::labelled(w, parse("q").unwrap(), Rel::Lt, c.complement()),
            None,
        );
        let sys = translate(&b);
        let text: Vec<String> = sys.atoms.iter().map(|a| a.to_string()).collect();
        assert_eq!(text, vec!["x0 < 1", "x1 <= x0", "x2 < 1 - x1"]);
        assert_eq!(sys.vars()[0], SolverVar::Labelled(w, p));
    }

    #[test]
    fn pair_order_is_added() {
        let mut b = Branch::empty();
        let (t, ts) = b.fresh_tpair(Label::ROOT);
        b.add(Constraint::terms(t, Rel::Le, ts), None);
        let sys = translate(&b);
        assert_eq!(sys.atoms.last().unwrap().to_string(), "x0 < x1");
    }

    #[test]
    fn small_systems() {
        let x = LinTerm::Var(0);
        let y = LinTerm::Var(1);
        let unsat = [
            LinearAtom::new(x.clone(), Rel::Lt, y.clone()),
            LinearAtom::new(y.clone(), Rel::Lt, x.clone()),
        ];
        assert!(!is_feasible(2, &unsat));
        let half_bound = [LinearAtom::new(x.clone(), Rel::Le, LinTerm::OneMinus(0))];
        match feasible(1, &half_bound) {
            SolveResult::Sat(v) => assert!(v[0] <= half()),
            SolveResult::Unsat => panic!("x <= 1 - x is satisfiable"),
        }
        let squeezed = [
            LinearAtom::new(x.clone(), Rel::Lt, y.clone()),
            LinearAtom::new(y.clone(), Rel::Le, LinTerm::OneMinus(1)),
            LinearAtom::new(LinTerm::Const(half()), Rel::Le, x.clone()),
        ];
        assert!(!is_feasible(2, &squeezed));
    }
}
