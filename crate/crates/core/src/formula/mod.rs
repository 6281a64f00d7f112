//! Object-language syntax.
//!
//! The core language has atoms, involutive negation `~`, conjunction `&`,
//! implication `->`, and the modalities `[]` and `<>`. Everything else
//! (`|`, `-<`, `<->`, `!`, `#`, `1`, `0`) is sugar that [`Formula::desugar`]
//! rewrites into the core language.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use parser::{parse, ParseError};

/// Atom used to expand the constant `1` as `p -> p`.
///
/// The leading underscore keeps it out of the concrete grammar, so a
/// desugared formula can never capture a user atom.
pub const RESERVED_ATOM: &str = "_top";

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Arc<str>),
    /// Involutive negation `~`.
    Inv(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
    Box(Arc<Formula>),
    Dia(Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    /// Coimplication `-<`.
    Coimp(Arc<Formula>, Arc<Formula>),
    Iff(Arc<Formula>, Arc<Formula>),
    /// Gödel negation `!`.
    Neg(Arc<Formula>),
    /// Baaz delta `#`.
    Delta(Arc<Formula>),
    Top,
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormulaMetrics {
    /// Atom and connective occurrences in the core form.
    pub length: usize,
    pub modal_depth: usize,
    /// Distinct user atoms.
    pub atom_count: usize,
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Arc::from(name))
    }

    pub fn inv(f: Formula) -> Formula {
        Formula::Inv(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Arc::new(a), Arc::new(b))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Arc::new(f))
    }

    pub fn dia(f: Formula) -> Formula {
        Formula::Dia(Arc::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn coimp(a: Formula, b: Formula) -> Formula {
        Formula::Coimp(Arc::new(a), Arc::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Arc::new(a), Arc::new(b))
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Arc::new(f))
    }

    pub fn delta(f: Formula) -> Formula {
        Formula::Delta(Arc::new(f))
    }

    /// True if the formula uses only the six core constructors.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Inv(a) | Formula::Box(a) | Formula::Dia(a) => a.is_core(),
            Formula::And(a, b) | Formula::Imp(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    pub fn is_modal(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => false,
            Formula::Box(_) | Formula::Dia(_) => true,
            Formula::Inv(a) | Formula::Neg(a) | Formula::Delta(a) => a.is_modal(),
            Formula::And(a, b) | Formula::Imp(a, b) | Formula::Or(a, b) | Formula::Coimp(a, b) | Formula::Iff(a, b) => {
                a.is_modal() || b.is_modal()
            }
        }
    }

    /// Rewrites every derived connective into the core language.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::Inv(a) => Formula::inv(a.desugar()),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Imp(a, b) => Formula::imp(a.desugar(), b.desugar()),
            Formula::Box(a) => Formula::boxed(a.desugar()),
            Formula::Dia(a) => Formula::dia(a.desugar()),
            Formula::Top => top_core(),
            Formula::Bottom => Formula::inv(top_core()),
            Formula::Neg(a) => Formula::imp(a.desugar(), Formula::inv(top_core())),
            Formula::Or(a, b) => Formula::inv(Formula::and(Formula::inv(a.desugar()), Formula::inv(b.desugar()))),
            Formula::Coimp(a, b) => coimp_core(a.desugar(), b.desugar()),
            Formula::Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
            }
            Formula::Delta(a) => coimp_core(top_core(), coimp_core(top_core(), a.desugar())),
        }
    }

    pub fn metrics(&self) -> FormulaMetrics {
        let core = self.desugar();
        let mut atoms = BTreeSet::new();
        core.collect_atoms(&mut atoms);
        atoms.remove(RESERVED_ATOM);
        FormulaMetrics {
            length: core.size(),
            modal_depth: core.modal_depth(),
            atom_count: atoms.len(),
        }
    }

    /// Number of atom and connective occurrences.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => 1,
            Formula::Inv(a) | Formula::Box(a) | Formula::Dia(a) | Formula::Neg(a) | Formula::Delta(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Imp(a, b) | Formula::Or(a, b) | Formula::Coimp(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => 0,
            Formula::Box(a) | Formula::Dia(a) => 1 + a.modal_depth(),
            Formula::Inv(a) | Formula::Neg(a) | Formula::Delta(a) => a.modal_depth(),
            Formula::And(a, b) | Formula::Imp(a, b) | Formula::Or(a, b) | Formula::Coimp(a, b) | Formula::Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
        }
    }

    /// Distinct atom names, sorted.
    pub fn atoms(&self) -> Vec<Arc<str>> {
        let mut set = BTreeSet::new();
        self.collect_atoms(&mut set);
        set.into_iter().map(Arc::from).collect()
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name);
            }
            Formula::Top | Formula::Bottom => {}
            Formula::Inv(a) | Formula::Box(a) | Formula::Dia(a) | Formula::Neg(a) | Formula::Delta(a) => {
                a.collect_atoms(out)
            }
            Formula::And(a, b) | Formula::Imp(a, b) | Formula::Or(a, b) | Formula::Coimp(a, b) | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Subformulas in post-order (children before parents), without
    /// duplicates. The last element is `self`.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        self.push_subformulas(&mut seen, &mut out);
        out
    }

    fn push_subformulas(&self, seen: &mut std::collections::HashSet<Formula>, out: &mut Vec<Formula>) {
        if seen.contains(self) {
            return;
        }
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => {}
            Formula::Inv(a) | Formula::Box(a) | Formula::Dia(a) | Formula::Neg(a) | Formula::Delta(a) => {
                a.push_subformulas(seen, out)
            }
            Formula::And(a, b) | Formula::Imp(a, b) | Formula::Or(a, b) | Formula::Coimp(a, b) | Formula::Iff(a, b) => {
                a.push_subformulas(seen, out);
                b.push_subformulas(seen, out);
            }
        }
        seen.insert(self.clone());
        out.push(self.clone());
    }

    /// Renders in the ASCII grammar accepted by [`parse`], with the
    /// minimum number of parentheses.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s, 0);
        s
    }

    fn render_into(&self, out: &mut String, context: u8) {
        let prec = self.precedence();
        let paren = prec < context;
        if paren {
            out.push('(');
        }
        match self {
            Formula::Atom(name) => out.push_str(name),
            Formula::Top => out.push('1'),
            Formula::Bottom => out.push('0'),
            Formula::Inv(a) => unary(out, "~", a),
            Formula::Neg(a) => unary(out, "!", a),
            Formula::Delta(a) => unary(out, "#", a),
            Formula::Box(a) => unary(out, "[]", a),
            Formula::Dia(a) => unary(out, "<>", a),
            // left-associative operators
            Formula::Iff(a, b) => binary(out, " <-> ", a, b, prec, prec + 1),
            Formula::Or(a, b) => binary(out, " | ", a, b, prec, prec + 1),
            Formula::And(a, b) => binary(out, " & ", a, b, prec, prec + 1),
            // right-associative operators
            Formula::Imp(a, b) => binary(out, " -> ", a, b, prec + 1, prec),
            Formula::Coimp(a, b) => binary(out, " -< ", a, b, prec + 1, prec),
        }
        if paren {
            out.push(')');
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Imp(..) => 2,
            Formula::Coimp(..) => 3,
            Formula::Or(..) => 4,
            Formula::And(..) => 5,
            _ => 6,
        }
    }
}

fn unary(out: &mut String, op: &str, a: &Formula) {
    out.push_str(op);
    a.render_into(out, 6);
}

fn binary(out: &mut String, op: &str, a: &Formula, b: &Formula, left: u8, right: u8) {
    a.render_into(out, left);
    out.push_str(op);
    b.render_into(out, right);
}

fn top_core() -> Formula {
    let p = Formula::atom(RESERVED_ATOM);
    Formula::imp(p.clone(), p)
}

fn coimp_core(a: Formula, b: Formula) -> Formula {
    Formula::inv(Formula::imp(Formula::inv(b), Formula::inv(a)))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }
    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn or_desugars_through_de_morgan() {
        let f = Formula::or(p(), q());
        assert_eq!(
            f.desugar(),
            Formula::inv(Formula::and(Formula::inv(p()), Formula::inv(q())))
        );
    }

    #[test]
    fn top_uses_reserved_atom() {
        let r = Formula::atom(RESERVED_ATOM);
        assert_eq!(Formula::Top.desugar(), Formula::imp(r.clone(), r));
    }

    #[test]
    fn atoms_are_already_core() {
        assert_eq!(p().desugar(), p());
        assert!(p().is_core());
    }

    #[test]
    fn desugar_is_idempotent_on_core() {
        let f = Formula::imp(Formula::boxed(p()), Formula::inv(Formula::dia(Formula::inv(p()))));
        assert_eq!(f.desugar(), f);
        let g = Formula::delta(Formula::iff(p(), Formula::neg(q()))).desugar();
        assert!(g.is_core());
        assert_eq!(g.desugar(), g);
    }

    #[test]
    fn metrics_examples() {
        let m = p().metrics();
        assert_eq!((m.length, m.modal_depth), (1, 0));
        assert_eq!(Formula::boxed(p()).metrics().modal_depth, 1);
        let f = Formula::imp(Formula::boxed(p()), Formula::inv(Formula::dia(Formula::inv(p()))));
        let m = f.metrics();
        assert_eq!((m.modal_depth, m.atom_count), (1, 1));
        assert_eq!(m.length, 7);
        // the reserved atom is not a user atom
        assert_eq!(Formula::Top.metrics().atom_count, 0);
        assert_eq!(Formula::Top.metrics().length, 3);
    }

    #[test]
    fn subformula_examples() {
        assert_eq!(p().subformulas(), vec![p()]);
        assert_eq!(
            Formula::and(p(), q()).subformulas(),
            vec![p(), q(), Formula::and(p(), q())]
        );
        assert_eq!(
            Formula::boxed(Formula::inv(p())).subformulas(),
            vec![p(), Formula::inv(p()), Formula::boxed(Formula::inv(p()))]
        );
        // shared subtrees appear once
        assert_eq!(Formula::imp(p(), p()).subformulas().len(), 2);
    }

    #[test]
    fn render_uses_minimal_parentheses() {
        let f = Formula::imp(Formula::imp(p(), q()), p());
        assert_eq!(f.render(), "(p -> q) -> p");
        let g = Formula::imp(p(), Formula::imp(q(), p()));
        assert_eq!(g.render(), "p -> q -> p");
        let h = Formula::inv(Formula::and(p(), q()));
        assert_eq!(h.render(), "~(p & q)");
        assert_eq!(Formula::boxed(Formula::inv(p())).render(), "[]~p");
    }
}
