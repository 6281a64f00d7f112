//! Independent ground truth for the prover: exhaustive grid validity for
//! propositional formulas, bounded model search for modal ones, and a
//! brute-force enumeration of side-condition resolutions.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::constraints::{Branch, Label, Rel, TSym, Term};
use crate::formula::Formula;
use crate::models::{FModel, StandardModel};
use crate::rational::{complement, half, one, ratio, zero, Rational};
use crate::solver::{is_feasible, translate, Betweenness, CloseOptions, LinTerm, LinearAtom, System};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the grid oracle only accepts modality-free formulas")]
    Modal,
    #[error("T({0}) has {1} symbols; enumeration is limited to 6")]
    RegistryTooLarge(String, usize),
    #[error("{0} side-condition combinations exceed the enumeration limit")]
    TooManyCombinations(u128),
}

/// The points `0, 1/d, ..., 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    denominator: u32,
}

impl Grid {
    /// `d` is rounded up to the next even number so the grid contains 1/2.
    pub fn new(d: u32) -> Self {
        let d = d.max(2);
        Grid { denominator: d + d % 2 }
    }

    /// The grid used for formulas with `n` atoms.
    pub fn for_atoms(n: usize) -> Self {
        Grid::new(2 * (n as u32 + 1))
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    pub fn points(&self) -> Vec<Rational> {
        let d = i64::from(self.denominator);
        (0..=d).map(|k| ratio(k, d)).collect()
    }
}

pub type Valuation = BTreeMap<Arc<str>, Rational>;

/// A propositional evaluator; swapped out by harness self-tests.
pub type PropEvaluator = dyn Fn(&Formula, &Valuation) -> Rational + Sync;

/// Evaluates in a one-world model.
pub fn standard_prop_eval(f: &Formula, valuation: &Valuation) -> Rational {
    let mut m = StandardModel::new(["w"]).expect("one world");
    for (p, x) in valuation {
        m.set_value(p, "w", x.clone()).expect("grid values are in range");
    }
    m.eval("w", f).expect("world exists")
}

pub fn prop_valid_grid(f: &Formula) -> Result<bool, OracleError> {
    prop_valid_grid_with(f, &standard_prop_eval)
}

/// Some valuation into the grid with `d = 2(n + 1)` giving a value below 1.
pub fn prop_counterexample(f: &Formula, eval: &PropEvaluator) -> Result<Option<Valuation>, OracleError> {
    if f.is_modal() {
        return Err(OracleError::Modal);
    }
    let atoms = f.atoms();
    let points = Grid::for_atoms(atoms.len()).points();
    let mut digits = vec![0usize; atoms.len()];
    loop {
        let valuation: Valuation = atoms
            .iter()
            .zip(&digits)
            .map(|(p, &k)| (p.clone(), points[k].clone()))
            .collect();
        if eval(f, &valuation) < one() {
            return Ok(Some(valuation));
        }
        if !odometer(&mut digits, points.len()) {
            return Ok(None);
        }
    }
}

pub fn prop_valid_grid_with(f: &Formula, eval: &PropEvaluator) -> Result<bool, OracleError> {
    prop_counterexample(f, eval).map(|c| c.is_none())
}

/// Advances a little-endian counter; false once it wraps.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefuteBounds {
    pub max_worlds: usize,
    /// Accessibility and atom values range over this grid.
    pub denominator: u32,
    /// Largest `T(w)` tried, counting `0`, `1/2`, `1`.
    pub max_t_size: usize,
    /// Restrict accessibility to `{0, 1}`.
    pub crisp: bool,
}

impl Default for RefuteBounds {
    fn default() -> Self {
        RefuteBounds {
            max_worlds: 2,
            denominator: 2,
            max_t_size: 3,
            crisp: false,
        }
    }
}

/// Searches legal F-models within `bounds`, smallest first, for one where
/// `f` is below 1 at the first world. `None` proves nothing beyond the
/// bounds.
pub fn refute_small(f: &Formula, bounds: &RefuteBounds) -> Option<FModel> {
    let grid = Grid::new(bounds.denominator).points();
    let access: Vec<Rational> = if bounds.crisp {
        vec![zero(), one()]
    } else {
        grid.clone()
    };
    let atoms = f.atoms();
    let t_choices = t_sets(&grid, bounds.max_t_size);
    for n in 1..=bounds.max_worlds.max(1) {
        let names: Vec<String> = (0..n).map(world_name).collect();
        let mut r_digits = vec![0usize; n * n];
        loop {
            let mut v_digits = vec![0usize; n * atoms.len()];
            loop {
                let mut frame = StandardModel::new(names.iter().cloned()).expect("distinct names");
                frame.set_crisp(bounds.crisp);
                for (k, &d) in r_digits.iter().enumerate() {
                    frame
                        .set_access(&names[k / n], &names[k % n], access[d].clone())
                        .expect("grid values are in range");
                }
                for (k, &d) in v_digits.iter().enumerate() {
                    frame
                        .set_value(&atoms[k / n], &names[k % n], grid[d].clone())
                        .expect("grid values are in range");
                }
                let mut t_digits = vec![0usize; n];
                loop {
                    let mut model = FModel::from_standard(frame.clone());
                    for (w, &d) in t_digits.iter().enumerate() {
                        model.set_t(&names[w], t_choices[d].clone()).expect("known world");
                    }
                    if model.eval(&names[0], f).is_ok_and(|x| x < one()) {
                        return Some(model);
                    }
                    if !odometer(&mut t_digits, t_choices.len()) {
                        break;
                    }
                }
                if !odometer(&mut v_digits, grid.len()) {
                    break;
                }
            }
            if !odometer(&mut r_digits, access.len()) {
                break;
            }
        }
    }
    None
}

fn world_name(i: usize) -> String {
    match i {
        0 => "w".to_string(),
        1..=3 => format!("w{}", "'".repeat(i)),
        _ => format!("w{i}"),
    }
}

/// Complement-closed subsets of `grid` containing `0, 1/2, 1`, up to `max`
/// elements.
fn t_sets(grid: &[Rational], max: usize) -> Vec<Vec<Rational>> {
    let lower: Vec<&Rational> = grid.iter().filter(|x| **x > zero() && **x < half()).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << lower.len()) {
        let mut set = vec![zero(), half(), one()];
        for (i, x) in lower.iter().enumerate() {
            if mask & (1 << i) != 0 {
                set.push((*x).clone());
                set.push(complement(x));
            }
        }
        if set.len() <= max.max(3) {
            out.push(set);
        }
    }
    out
}

/// One way of meeting the side conditions of a world: every registered
/// symbol sits on a level of `0 = v_0 < v_1 < ... < v_m = 1`, with
/// `v_{m-k} = 1 - v_k`. An empty map imposes nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub levels: BTreeMap<TSym, usize>,
    pub top: usize,
}

impl Resolution {
    fn vacuous() -> Self {
        Resolution {
            levels: BTreeMap::new(),
            top: 0,
        }
    }

    /// The value a level is pinned to, if any.
    pub fn anchor(&self, level: usize) -> Option<Rational> {
        if level == 0 {
            Some(zero())
        } else if level == self.top {
            Some(one())
        } else if 2 * level == self.top {
            Some(half())
        } else {
            None
        }
    }

    /// Linear atoms over `sys` expressing this resolution at world `w`.
    pub fn atoms(&self, w: Label, sys: &mut System) -> Vec<LinearAtom> {
        let mut by_level: BTreeMap<usize, Vec<LinTerm>> = BTreeMap::new();
        for (&s, &k) in &self.levels {
            by_level.entry(k).or_default().push(sys.value_term(s.term(w).into()));
        }
        let mut out = Vec::new();
        let mut previous: Option<&LinTerm> = None;
        for (&k, terms) in &by_level {
            let rep = &terms[0];
            for other in &terms[1..] {
                out.push(LinearAtom::eq(rep.clone(), other.clone()));
            }
            if let Some(q) = self.anchor(k) {
                out.push(LinearAtom::eq(rep.clone(), LinTerm::Const(q)));
            }
            if let Some(p) = previous {
                out.push(LinearAtom::new(p.clone(), Rel::Lt, rep.clone()));
            }
            if let Some(mirror) = by_level.get(&(self.top - k)).filter(|_| 2 * k < self.top) {
                out.push(LinearAtom::eq(rep.clone(), one_minus(&mirror[0])));
            }
            previous = Some(rep);
        }
        out
    }
}

fn one_minus(t: &LinTerm) -> LinTerm {
    match t {
        LinTerm::Var(i) => LinTerm::OneMinus(*i),
        LinTerm::OneMinus(i) => LinTerm::Var(*i),
        LinTerm::Const(q) => LinTerm::Const(complement(q)),
    }
}

/// Every admissible resolution for one world's registry.
pub fn enumerate_side_conditions(registry: &[TSym], betweenness: Betweenness) -> Result<Vec<Resolution>, OracleError> {
    let n = registry.len();
    if n > 6 {
        return Err(OracleError::RegistryTooLarge(String::new(), n));
    }
    let pairs: Vec<u32> = registry
        .iter()
        .filter_map(|s| match s {
            TSym::Lower(i) if registry.contains(&TSym::Upper(*i)) => Some(*i),
            _ => None,
        })
        .collect();
    if n <= 2 {
        if n == 2 && pairs.len() == 1 {
            let p = pairs[0];
            return Ok([(0, 1), (1, 2)]
                .into_iter()
                .map(|(lo, hi)| Resolution {
                    levels: [(TSym::Lower(p), lo), (TSym::Upper(p), hi)].into_iter().collect(),
                    top: 2,
                })
                .collect());
        }
        return Ok(vec![Resolution::vacuous()]);
    }
    let mut out = Vec::new();
    for top in (2..n).step_by(2) {
        let mut digits = vec![0usize; n];
        loop {
            let level = |s: TSym| digits[registry.iter().position(|&x| x == s).expect("registered")];
            let surjective = (0..=top).all(|k| digits.contains(&k));
            let admissible = surjective
                && registry.iter().all(|&s| match s {
                    TSym::Zero => level(s) == 0,
                    TSym::One => level(s) == top,
                    _ => true,
                })
                && pairs.iter().all(|&p| {
                    let (lo, hi) = (level(TSym::Lower(p)), level(TSym::Upper(p)));
                    lo < hi
                        && match betweenness {
                            Betweenness::Consecutive => hi == lo + 1,
                            Betweenness::Literal => registry.iter().all(|&s| match s {
                                TSym::Lower(j) if j != p => !(lo < level(s) && level(s) < hi),
                                _ => true,
                            }),
                        }
                });
            if admissible {
                out.push(Resolution {
                    levels: registry.iter().copied().zip(digits.iter().copied()).collect(),
                    top,
                });
            }
            if !odometer(&mut digits, top + 1) {
                break;
            }
        }
    }
    Ok(out)
}

const COMBINATION_LIMIT: u128 = 200_000;

/// Decides closure of a complete branch by trying every combination of
/// per-world resolutions (and every crisp assignment of accessibility
/// terms in crisp mode) against the raw system.
pub fn closed_by_enumeration(branch: &Branch, opts: CloseOptions) -> Result<bool, OracleError> {
    let mut per_world: Vec<(Label, Vec<Resolution>)> = Vec::new();
    for (&w, reg) in branch.registries() {
        let reg: Vec<TSym> = reg.iter().copied().collect();
        let rs = enumerate_side_conditions(&reg, opts.betweenness).map_err(|e| match e {
            OracleError::RegistryTooLarge(_, n) => OracleError::RegistryTooLarge(w.name(), n),
            e => e,
        })?;
        per_world.push((w, rs));
    }
    let rels: Vec<Term> = if opts.crisp {
        branch.rel_terms().iter().map(|&(a, u)| Term::Rel(a, u)).collect()
    } else {
        Vec::new()
    };
    let total = per_world
        .iter()
        .map(|(_, rs)| rs.len() as u128)
        .product::<u128>()
        .saturating_mul(1u128 << rels.len().min(100));
    if total > COMBINATION_LIMIT {
        return Err(OracleError::TooManyCombinations(total));
    }
    let base = translate(branch);
    let mut choice = vec![0usize; per_world.len()];
    if per_world.iter().any(|(_, rs)| rs.is_empty()) {
        return Ok(true);
    }
    loop {
        for mask in 0u64..(1u64 << rels.len()) {
            let mut sys = base.clone();
            let mut atoms = Vec::new();
            for ((w, rs), &c) in per_world.iter().zip(&choice) {
                atoms.extend(rs[c].atoms(*w, &mut sys));
            }
            for (i, &r) in rels.iter().enumerate() {
                let x = sys.value_term(r.into());
                let q = if mask & (1 << i) != 0 { one() } else { zero() };
                atoms.push(LinearAtom::eq(x, LinTerm::Const(q)));
            }
            sys.atoms.extend(atoms);
            if is_feasible(sys.num_vars(), &sys.atoms) {
                return Ok(false);
            }
        }
        let mut advanced = false;
        for (d, (_, rs)) in choice.iter_mut().zip(&per_world) {
            *d += 1;
            if *d < rs.len() {
                advanced = true;
                break;
            }
            *d = 0;
        }
        if !advanced {
            return Ok(true);
        }
    }
}

/// A random standard model with 1 to `max_worlds` worlds named `v0`,
/// `v1`, ...; accessibility and atom values on the grid with denominator
/// `d`, about a third of the accessibility entries 0.
pub fn random_standard_model<R: Rng + ?Sized>(rng: &mut R, max_worlds: usize, d: u32, atoms: &[&str]) -> StandardModel {
    let n = rng.gen_range(1..=max_worlds.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut m = StandardModel::new(names.clone()).expect("distinct names");
    let d = i64::from(d.max(1));
    for a in &names {
        for b in &names {
            let r = if rng.gen_bool(0.3) {
                zero()
            } else {
                ratio(rng.gen_range(0..=d), d)
            };
            m.set_access(a, b, r).expect("known worlds");
        }
        for p in atoms {
            m.set_value(p, a, ratio(rng.gen_range(0..=d), d)).expect("known worlds");
        }
    }
    m
}

/// Shape limits for random formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaShape {
    /// Upper bound on the core length.
    pub max_length: usize,
    pub max_modal_depth: usize,
    /// Atoms are drawn from `p`, `q`, `r`, ... up to this many.
    pub atom_pool: usize,
    pub modal: bool,
}

impl FormulaShape {
    pub fn propositional(max_length: usize) -> Self {
        FormulaShape {
            max_length,
            max_modal_depth: 0,
            atom_pool: 3,
            modal: false,
        }
    }

    pub fn modal(max_length: usize, max_modal_depth: usize) -> Self {
        FormulaShape {
            max_length,
            max_modal_depth,
            atom_pool: 3,
            modal: true,
        }
    }
}

const ATOM_NAMES: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

/// A random formula within `shape`. Below a root connective, nodes are
/// binary 40% of the time, unary 30%, atoms 30%. Draws are repeated until
/// the shape fits.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Formula {
    loop {
        let budget = rng.gen_range(2..=shape.max_length.max(2));
        let f = grow(rng, shape, budget, true);
        let m = f.metrics();
        if m.length <= shape.max_length && m.modal_depth <= shape.max_modal_depth {
            return f;
        }
    }
}

fn grow<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape, budget: usize, root: bool) -> Formula {
    let roll: f64 = if root { rng.gen_range(0.0..0.7) } else { rng.gen() };
    if budget <= 1 || roll >= 0.7 {
        let pool = shape.atom_pool.clamp(1, ATOM_NAMES.len());
        return Formula::atom(ATOM_NAMES[rng.gen_range(0..pool)]);
    }
    if roll < 0.4 && budget >= 3 {
        let left = rng.gen_range(1..budget - 1);
        let a = grow(rng, shape, left, false);
        let b = grow(rng, shape, budget - 1 - left, false);
        return match rng.gen_range(0..5) {
            0 => Formula::and(a, b),
            1 => Formula::imp(a, b),
            2 => Formula::or(a, b),
            3 => Formula::iff(a, b),
            _ => Formula::coimp(a, b),
        };
    }
    let a = grow(rng, shape, budget - 1, false);
    let unary = if shape.modal { 5 } else { 3 };
    match rng.gen_range(0..unary) {
        0 => Formula::inv(a),
        1 => Formula::neg(a),
        2 => Formula::delta(a),
        3 => Formula::boxed(a),
        _ => Formula::dia(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Constraint;
    use crate::formula::parse;
    use crate::solver::close_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn grid_validity() {
        assert!(prop_valid_grid(&f("(p -> q) | (q -> p)")).unwrap());
        assert!(!prop_valid_grid(&f("p | ~p")).unwrap());
        assert!(prop_valid_grid(&f("#p | ~#p")).unwrap());
        assert_eq!(prop_valid_grid(&f("[]p")), Err(OracleError::Modal));
        let cex = prop_counterexample(&f("p | ~p"), &standard_prop_eval).unwrap().unwrap();
        assert!(standard_prop_eval(&f("p | ~p"), &cex) < one());
    }

    #[test]
    fn grid_points() {
        assert_eq!(Grid::for_atoms(3).denominator(), 8);
        assert_eq!(Grid::new(3).denominator(), 4);
        assert_eq!(Grid::new(2).points(), vec![zero(), half(), one()]);
    }

    #[test]
    fn refutes_box_dual() {
        let phi = f("[]p -> ~<>~p");
        let m = refute_small(&phi, &RefuteBounds::default()).expect("countermodel");
        assert!(m.validate().is_empty());
        assert_eq!(m.eval("w", &phi).unwrap(), half());
        assert!(refute_small(&f("p -> p"), &RefuteBounds::default()).is_none());
        let crisp = RefuteBounds {
            crisp: true,
            ..RefuteBounds::default()
        };
        assert!(refute_small(&f("[]p <-> ~<>~p"), &crisp).is_none());
    }

    #[test]
    fn resolution_counts() {
        let pair = [TSym::Lower(0), TSym::Upper(0)];
        let rs = enumerate_side_conditions(&pair, Betweenness::Consecutive).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(rs[0].anchor(rs[0].levels[&TSym::Lower(0)]), Some(zero()));
        assert_eq!(rs[1].anchor(rs[1].levels[&TSym::Upper(0)]), Some(one()));
        assert_eq!(
            enumerate_side_conditions(&[], Betweenness::Consecutive).unwrap().len(),
            1
        );
        let with_one = [TSym::Lower(0), TSym::Upper(0), TSym::One];
        let rs = enumerate_side_conditions(&with_one, Betweenness::Consecutive).unwrap();
        assert!(!rs.is_empty());
        for r in &rs {
            assert_eq!(r.levels[&TSym::Lower(0)], 0);
            assert_eq!(2 * r.levels[&TSym::Upper(0)], r.top);
        }
        let seven: Vec<TSym> = (0..7).map(TSym::Lower).collect();
        assert!(enumerate_side_conditions(&seven, Betweenness::Consecutive).is_err());
    }

    #[test]
    fn enumeration_agrees_with_closure_check() {
        let report = crate::tableau::prove(&f("[]p -> ~<>~p"), &Default::default()).unwrap();
        let b = &report.verdict.countermodel().unwrap().branch;
        for crisp in [false, true] {
            let opts = CloseOptions {
                crisp,
                betweenness: Betweenness::Consecutive,
            };
            assert_eq!(
                closed_by_enumeration(b, opts).unwrap(),
                close_check(b, opts).is_closed()
            );
        }
        let mut two = b.clone();
        let (t, ts) = two.fresh_tpair(Label::ROOT);
        two.add(Constraint::terms(t, Rel::Gt, crate::constraints::ValueTerm::ZERO), None);
        two.add(Constraint::terms(ts, Rel::Lt, crate::constraints::ValueTerm::ONE), None);
        let opts = CloseOptions::default();
        assert_eq!(
            closed_by_enumeration(&two, opts).unwrap(),
            close_check(&two, opts).is_closed()
        );
    }

    #[test]
    fn generator_respects_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = FormulaShape::modal(14, 2);
        for _ in 0..200 {
            let phi = random_formula(&mut rng, &shape);
            let m = phi.metrics();
            assert!(m.length <= 14 && m.modal_depth <= 2 && m.atom_count <= 3);
        }
        let prop = FormulaShape::propositional(12);
        assert!((0..100).all(|_| !random_formula(&mut rng, &prop).is_modal()));
    }
}
