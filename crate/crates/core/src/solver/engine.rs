//! Negative-cycle feasibility for unit two-variable inequalities.
//!
//! Each variable `x` becomes two nodes standing for `+x` and `-x`; an
//! inequality `a·x + b·y ≤ d` becomes the difference constraints
//! `(a·x) - (-b·y) ≤ d` and `(b·y) - (-a·x) ≤ d`. Strictness rides along as
//! an infinitesimal: a path weight is `(sum, -#strict edges)`, compared
//! lexicographically, and the system is infeasible iff some cycle has
//! weight below `(0, 0)`.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{LinearAtom, Piece};
use crate::rational::{int, one, simplest_between, zero, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Unsat,
    /// One exact value per variable, all in `[0, 1]`.
    Sat(Vec<Rational>),
}

trait Weight: Clone + Ord + Add<Output = Self> + Zero {
    fn from_scaled(q: &Rational, scale: &BigInt) -> Self;
    fn to_rational(&self, scale: &BigInt) -> Rational;
}

impl Weight for i128 {
    fn from_scaled(q: &Rational, scale: &BigInt) -> Self {
        if let (Some(n), Some(d), Some(s)) = (q.numer().to_i128(), q.denom().to_i128(), scale.to_i128()) {
            return n * (s / d);
        }
        (q * Rational::from_integer(scale.clone()))
            .to_integer()
            .to_i128()
            .expect("scaled weight fits")
    }

    fn to_rational(&self, scale: &BigInt) -> Rational {
        Rational::new(BigInt::from(*self), scale.clone())
    }
}

impl Weight for Rational {
    fn from_scaled(q: &Rational, _: &BigInt) -> Self {
        q.clone()
    }

    fn to_rational(&self, _: &BigInt) -> Rational {
        self.clone()
    }
}

/// Edges with exact weights, before scaling.
struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize, Rational, bool)>,
    /// The atom each edge came from; `None` for the `[0, 1]` bounds.
    tags: Vec<Option<usize>>,
    tag: Option<usize>,
    scale: BigInt,
}

const I128_SCALE_LIMIT: u64 = 1 << 40;

fn node(var: usize, sign: i8) -> usize {
    if sign > 0 {
        2 * var
    } else {
        2 * var + 1
    }
}

impl Graph {
    /// `None` if some atom is a false statement about constants.
    fn build(num_vars: usize, atoms: &[LinearAtom]) -> Option<Graph> {
        let mut g = Graph::bare(num_vars);
        for x in 0..num_vars {
            g.unary(x, 1, &one(), false);
            g.unary(x, -1, &zero(), false);
        }
        g.add_atoms(atoms).then_some(g)
    }

    fn bare(num_vars: usize) -> Graph {
        Graph {
            nodes: 2 * num_vars,
            edges: Vec::new(),
            tags: Vec::new(),
            tag: None,
            scale: BigInt::one(),
        }
    }

    fn add_atoms(&mut self, atoms: &[LinearAtom]) -> bool {
        atoms
            .iter()
            .flat_map(LinearAtom::pieces)
            .all(|piece| self.piece(&piece))
    }

    fn push(&mut self, from: usize, to: usize, w: Rational, strict: bool) {
        if !w.denom().is_one() {
            self.scale = self.scale.lcm(w.denom());
        }
        self.edges.push((from, to, w, strict));
        self.tags.push(self.tag);
    }

    /// `sign·x ≤ bound`
    fn unary(&mut self, x: usize, sign: i8, bound: &Rational, strict: bool) {
        self.push(node(x, -sign), node(x, sign), bound * int(2), strict);
    }

    fn piece(&mut self, p: &Piece) -> bool {
        match p.coefs.as_slice() {
            [] => {
                if p.strict {
                    p.bound > zero()
                } else {
                    p.bound >= zero()
                }
            }
            [(x, c)] if c.abs() == 2 => {
                self.push(node(*x, -c.signum()), node(*x, c.signum()), p.bound.clone(), p.strict);
                true
            }
            [(x, c)] => {
                self.unary(*x, *c, &p.bound, p.strict);
                true
            }
            [(x, a), (y, b)] => {
                self.push(node(*y, -b), node(*x, *a), p.bound.clone(), p.strict);
                self.push(node(*x, -a), node(*y, *b), p.bound.clone(), p.strict);
                true
            }
            _ => unreachable!("at most two variables per atom"),
        }
    }

    fn fits_i128(&self) -> bool {
        self.scale.to_u64().is_some_and(|s| s <= I128_SCALE_LIMIT)
    }

    fn weighted<W: Weight>(&self) -> Vec<(usize, usize, W, bool)> {
        self.edges
            .iter()
            .map(|(u, v, w, s)| (*u, *v, W::from_scaled(w, &self.scale), *s))
            .collect()
    }

    fn consistent(&self) -> bool {
        if self.fits_i128() {
            no_negative_cycle(self.nodes, &self.weighted::<i128>())
        } else {
            no_negative_cycle(self.nodes, &self.weighted::<Rational>())
        }
    }

    /// Shortest `from -> to` as `(value, strict)`; the graph must be
    /// consistent.
    fn shortest(&self, from: usize, to: usize) -> Option<(Rational, bool)> {
        if self.fits_i128() {
            shortest::<i128>(self.nodes, &self.weighted(), from, to).map(|(w, s)| (w.to_rational(&self.scale), s))
        } else {
            shortest::<Rational>(self.nodes, &self.weighted(), from, to).map(|(w, s)| (w.to_rational(&self.scale), s))
        }
    }
}

fn better<W: Weight>(cand: &(W, i64), cur: &Option<(W, i64)>) -> bool {
    match cur {
        None => true,
        Some(c) => cand < c,
    }
}

fn no_negative_cycle<W: Weight>(nodes: usize, edges: &[(usize, usize, W, bool)]) -> bool {
    let mut dist: Vec<(W, i64)> = vec![(W::zero(), 0); nodes];
    for _ in 0..=nodes {
        let mut changed = false;
        for (u, v, w, s) in edges {
            let cand = (dist[*u].0.clone() + w.clone(), dist[*u].1 - i64::from(*s));
            if cand < dist[*v] {
                dist[*v] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Edge indices of a negative cycle, if there is one.
fn negative_cycle<W: Weight>(nodes: usize, edges: &[(usize, usize, W, bool)]) -> Option<Vec<usize>> {
    let mut dist: Vec<(W, i64)> = vec![(W::zero(), 0); nodes];
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    let mut last = None;
    for _ in 0..=nodes {
        last = None;
        for (k, (u, v, w, s)) in edges.iter().enumerate() {
            let cand = (dist[*u].0.clone() + w.clone(), dist[*u].1 - i64::from(*s));
            if cand < dist[*v] {
                dist[*v] = cand;
                pred[*v] = Some(k);
                last = Some(*v);
            }
        }
        last?;
    }
    // nodes + 1 rounds of relaxation still changed something: walking
    // back `nodes` predecessors lands on the cycle
    let mut x = last?;
    for _ in 0..nodes {
        x = edges[pred[x].expect("relaxed nodes have a predecessor")].0;
    }
    let start = x;
    let mut cycle = Vec::new();
    loop {
        let k = pred[x].expect("cycle nodes have a predecessor");
        cycle.push(k);
        x = edges[k].0;
        if x == start {
            break;
        }
    }
    debug_assert!({
        let total = cycle.iter().fold((W::zero(), 0i64), |(w, s), &k| {
            (w + edges[k].2.clone(), s - i64::from(edges[k].3))
        });
        total < (W::zero(), 0)
    });
    Some(cycle)
}

fn shortest<W: Weight>(nodes: usize, edges: &[(usize, usize, W, bool)], from: usize, to: usize) -> Option<(W, bool)> {
    let mut dist: Vec<Option<(W, i64)>> = vec![None; nodes];
    dist[from] = Some((W::zero(), 0));
    for _ in 0..nodes {
        let mut changed = false;
        for (u, v, w, s) in edges {
            let Some((du, su)) = &dist[*u] else { continue };
            let cand = (du.clone() + w.clone(), su - i64::from(*s));
            if better(&cand, &dist[*v]) {
                dist[*v] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist[to].take().map(|(w, s)| (w, s < 0))
}

/// Satisfiability over `[0,1]^num_vars` without producing a witness.
pub fn is_feasible(num_vars: usize, atoms: &[LinearAtom]) -> bool {
    Graph::build(num_vars, atoms).is_some_and(|g| g.consistent())
}

/// `None` if the system is satisfiable; otherwise the indices of atoms
/// that are already unsatisfiable together.
pub fn infeasible_core(num_vars: usize, atoms: &[LinearAtom]) -> Option<Vec<usize>> {
    let mut g = Graph::bare(num_vars);
    for x in 0..num_vars {
        g.unary(x, 1, &one(), false);
        g.unary(x, -1, &zero(), false);
    }
    for (i, atom) in atoms.iter().enumerate() {
        g.tag = Some(i);
        if !g.add_atoms(std::slice::from_ref(atom)) {
            return Some(vec![i]);
        }
    }
    let cycle = if g.fits_i128() {
        negative_cycle(g.nodes, &g.weighted::<i128>())
    } else {
        negative_cycle(g.nodes, &g.weighted::<Rational>())
    }?;
    let mut core: Vec<usize> = cycle.into_iter().filter_map(|e| g.tags[e]).collect();
    core.sort_unstable();
    core.dedup();
    Some(core)
}

/// Decides the system and, if satisfiable, returns a witness.
///
/// Variables are fixed one at a time (in `order`, then the rest) to the
/// simplest rational inside their current feasible interval; the interval
/// comes from the shortest paths between the two nodes of the variable.
pub fn feasible(num_vars: usize, atoms: &[LinearAtom]) -> SolveResult {
    let order: Vec<usize> = (0..num_vars).collect();
    feasible_ordered(num_vars, atoms, &order)
}

pub(crate) fn feasible_ordered(num_vars: usize, atoms: &[LinearAtom], order: &[usize]) -> SolveResult {
    let Some(mut g) = Graph::build(num_vars, atoms) else {
        return SolveResult::Unsat;
    };
    if !g.consistent() {
        return SolveResult::Unsat;
    }
    let mut values: Vec<Option<Rational>> = vec![None; num_vars];
    let rest = (0..num_vars).filter(|x| !order.contains(x));
    for x in order.iter().copied().chain(rest.collect::<Vec<_>>()) {
        if values[x].is_some() {
            continue;
        }
        let (up, up_strict) = g.shortest(node(x, -1), node(x, 1)).expect("upper bound edge exists");
        let (down, down_strict) = g.shortest(node(x, 1), node(x, -1)).expect("lower bound edge exists");
        let hi = up / int(2);
        let lo = -(down / int(2));
        let v = simplest_between((&lo, down_strict), (&hi, up_strict));
        g.unary(x, 1, &v, false);
        g.unary(x, -1, &-v.clone(), false);
        values[x] = Some(v);
    }
    let values: Vec<Rational> = values.into_iter().map(|v| v.expect("every variable fixed")).collect();
    assert!(
        atoms.iter().all(|a| a.holds(&values)),
        "witness extraction produced an assignment violating the system"
    );
    SolveResult::Sat(values)
}

type Dist<W> = Option<(W, i64)>;

/// All-pairs shortest paths of a consistent graph, closed under edge
/// insertion.
#[derive(Clone, Debug)]
struct Apsp<W> {
    n: usize,
    d: Vec<Dist<W>>,
}

impl<W: Weight> Apsp<W> {
    fn new(n: usize, edges: &[(usize, usize, W, bool)]) -> Option<Self> {
        let mut d: Vec<Dist<W>> = vec![None; n * n];
        for i in 0..n {
            d[i * n + i] = Some((W::zero(), 0));
        }
        for (u, v, w, s) in edges {
            let cand = (w.clone(), -i64::from(*s));
            if better(&cand, &d[u * n + v]) {
                d[u * n + v] = Some(cand);
            }
        }
        let origin = (W::zero(), 0);
        for k in 0..n {
            for i in 0..n {
                let Some((ik, iks)) = d[i * n + k].clone() else {
                    continue;
                };
                for j in 0..n {
                    let Some((kj, kjs)) = &d[k * n + j] else { continue };
                    let cand = (ik.clone() + kj.clone(), iks + kjs);
                    if better(&cand, &d[i * n + j]) {
                        d[i * n + j] = Some(cand);
                    }
                }
            }
            // stop before a negative cycle can inflate the entries
            if (0..n).any(|i| d[i * n + i].as_ref().is_some_and(|x| *x < origin)) {
                return None;
            }
        }
        Some(Apsp { n, d })
    }

    /// Whether adding `u -> v` keeps every cycle non-negative.
    fn admits_edge(&self, (u, v, w, s): &(usize, usize, W, bool)) -> bool {
        match &self.d[v * self.n + u] {
            None => true,
            Some((back, bs)) => (back.clone() + w.clone(), bs - i64::from(*s)) >= (W::zero(), 0),
        }
    }

    fn admits_pair(&self, a: &(usize, usize, W, bool), b: &(usize, usize, W, bool)) -> bool {
        if !self.admits_edge(a) || !self.admits_edge(b) {
            return false;
        }
        let n = self.n;
        let (Some(ab), Some(ba)) = (&self.d[a.1 * n + b.0], &self.d[b.1 * n + a.0]) else {
            return true;
        };
        let sum = a.2.clone() + ab.0.clone() + b.2.clone() + ba.0.clone();
        let strict = ab.1 + ba.1 - i64::from(a.3) - i64::from(b.3);
        (sum, strict) >= (W::zero(), 0)
    }

    fn insert(&mut self, edge: &(usize, usize, W, bool)) -> bool {
        if !self.admits_edge(edge) {
            return false;
        }
        let (u, v, w, s) = edge;
        let n = self.n;
        let e = (w.clone(), -i64::from(*s));
        if !better(&e, &self.d[u * n + v]) {
            return true;
        }
        let into_u: Vec<Dist<W>> = (0..n).map(|i| self.d[i * n + u].clone()).collect();
        let from_v: Vec<Dist<W>> = (0..n).map(|j| self.d[v * n + j].clone()).collect();
        for (i, iu) in into_u.iter().enumerate() {
            let Some((iu, ius)) = iu else { continue };
            let head = (iu.clone() + e.0.clone(), ius + e.1);
            for (j, vj) in from_v.iter().enumerate() {
                let Some((vj, vjs)) = vj else { continue };
                let cand = (head.0.clone() + vj.clone(), head.1 + vjs);
                if better(&cand, &self.d[i * n + j]) {
                    self.d[i * n + j] = Some(cand);
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
enum Paths {
    Small(Apsp<i128>),
    Big(Apsp<Rational>),
}

/// A consistent system prepared for repeated "does it stay consistent
/// with these atoms" questions and for absorbing atoms one set at a time.
#[derive(Clone, Debug)]
pub(crate) struct Incremental {
    num_vars: usize,
    scale: BigInt,
    paths: Paths,
}

impl Incremental {
    /// `None` if `atoms` is infeasible. Every atom later passed to
    /// [`admits`](Self::admits) or [`add`](Self::add) must appear in
    /// `vocabulary`, which fixes the common denominator.
    pub(crate) fn new(num_vars: usize, atoms: &[LinearAtom], vocabulary: &[LinearAtom]) -> Option<Self> {
        let g = Graph::build(num_vars, atoms)?;
        let mut all = Graph::bare(num_vars);
        all.scale = g.scale.clone();
        // a false constant atom in the vocabulary only ever gets rejected
        for atom in vocabulary {
            all.add_atoms(std::slice::from_ref(atom));
        }
        let scale = all.scale;
        let g = Graph {
            scale: scale.clone(),
            ..g
        };
        let paths = if g.fits_i128() {
            Paths::Small(Apsp::new(g.nodes, &g.weighted())?)
        } else {
            Paths::Big(Apsp::new(g.nodes, &g.weighted())?)
        };
        Some(Incremental { num_vars, scale, paths })
    }

    /// Translates `atoms` once for repeated use; `None` if one of them is
    /// a false statement about constants.
    pub(crate) fn compile(&self, atoms: &[LinearAtom]) -> Option<Edges> {
        let mut g = Graph::bare(self.num_vars);
        g.scale = self.scale.clone();
        if !g.add_atoms(atoms) {
            return None;
        }
        debug_assert_eq!(g.scale, self.scale, "atom outside the prepared vocabulary");
        Some(match self.paths {
            Paths::Small(_) => Edges::Small(g.weighted()),
            Paths::Big(_) => Edges::Big(g.weighted()),
        })
    }

    pub(crate) fn admits(&self, edges: &Edges) -> bool {
        match (&self.paths, edges) {
            (Paths::Small(p), Edges::Small(e)) => admits(p, e),
            (Paths::Big(p), Edges::Big(e)) => admits(p, e),
            _ => unreachable!("edges compiled for another system"),
        }
    }

    /// Absorbs `edges`; returns false (leaving `self` unusable) if they
    /// make the system infeasible.
    pub(crate) fn add(&mut self, edges: &Edges) -> bool {
        match (&mut self.paths, edges) {
            (Paths::Small(p), Edges::Small(e)) => e.iter().all(|x| p.insert(x)),
            (Paths::Big(p), Edges::Big(e)) => e.iter().all(|x| p.insert(x)),
            _ => unreachable!("edges compiled for another system"),
        }
    }
}

/// Atoms translated for one [`Incremental`] system.
#[derive(Clone, Debug)]
pub(crate) enum Edges {
    Small(Vec<(usize, usize, i128, bool)>),
    Big(Vec<(usize, usize, Rational, bool)>),
}

/// Negative cycles after adding `edges` must run through some of them,
/// joined by old shortest paths; Floyd-Warshall on the new edges alone
/// finds them.
fn admits<W: Weight>(p: &Apsp<W>, edges: &[(usize, usize, W, bool)]) -> bool {
    match edges {
        [] => return true,
        [e] => return p.admits_edge(e),
        [a, b] => return p.admits_pair(a, b),
        _ => {}
    }
    let k = edges.len();
    let n = p.n;
    let mut c: Vec<Dist<W>> = Vec::with_capacity(k * k);
    for (_, v, w, s) in edges {
        for (u, _, _, _) in edges {
            c.push(
                p.d[v * n + u]
                    .as_ref()
                    .map(|(d, ds)| (w.clone() + d.clone(), ds - i64::from(*s))),
            );
        }
    }
    let origin = (W::zero(), 0);
    for m in 0..k {
        for i in 0..k {
            let Some((im, ims)) = c[i * k + m].clone() else {
                continue;
            };
            for j in 0..k {
                let Some((mj, mjs)) = &c[m * k + j] else { continue };
                let cand = (im.clone() + mj.clone(), ims + mjs);
                if better(&cand, &c[i * k + j]) {
                    c[i * k + j] = Some(cand);
                }
            }
        }
        if (0..k).any(|i| c[i * k + i].as_ref().is_some_and(|x| *x < origin)) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Rel;
    use crate::rational::{half, ratio};
    use crate::solver::LinTerm;

    fn v(i: usize) -> LinTerm {
        LinTerm::Var(i)
    }

    fn c(q: Rational) -> LinTerm {
        LinTerm::Const(q)
    }

    #[test]
    fn strictness_is_exact() {
        // x < y < z with z <= x + 0 is impossible; z <= 1 - x keeps it open
        let chain = vec![
            LinearAtom::new(v(0), Rel::Lt, v(1)),
            LinearAtom::new(v(1), Rel::Lt, v(2)),
        ];
        let mut closed = chain.clone();
        closed.push(LinearAtom::new(v(2), Rel::Le, v(0)));
        assert!(!is_feasible(3, &closed));
        let SolveResult::Sat(values) = feasible(3, &chain) else {
            panic!()
        };
        assert_eq!(values, vec![zero(), half(), one()]);
    }

    #[test]
    fn constants_only() {
        assert!(!is_feasible(0, &[LinearAtom::new(c(one()), Rel::Lt, c(one()))]));
        assert!(is_feasible(0, &[LinearAtom::new(c(zero()), Rel::Lt, c(one()))]));
    }

    #[test]
    fn self_complement() {
        // x = 1 - x forces 1/2
        let atoms = [LinearAtom::eq(v(0), LinTerm::OneMinus(0))];
        assert_eq!(feasible(1, &atoms), SolveResult::Sat(vec![half()]));
        let atoms = [
            LinearAtom::new(v(0), Rel::Lt, LinTerm::OneMinus(0)),
            LinearAtom::new(c(half()), Rel::Le, v(0)),
        ];
        assert_eq!(feasible(1, &atoms), SolveResult::Unsat);
    }

    #[test]
    fn witnesses_respect_open_intervals() {
        let atoms = [
            LinearAtom::new(c(ratio(1, 5)), Rel::Lt, v(0)),
            LinearAtom::new(v(0), Rel::Lt, c(ratio(1, 4))),
        ];
        assert_eq!(feasible(1, &atoms), SolveResult::Sat(vec![ratio(2, 9)]));
    }

    fn random_atom(rng: &mut impl rand::Rng, vars: usize) -> LinearAtom {
        let term = |rng: &mut dyn rand::RngCore| match rand::Rng::gen_range(rng, 0..5) {
            0 => c(ratio(rand::Rng::gen_range(rng, 0..=4), 4)),
            1 | 2 => v(rand::Rng::gen_range(rng, 0..vars)),
            _ => LinTerm::OneMinus(rand::Rng::gen_range(rng, 0..vars)),
        };
        let (l, r) = (term(rng), term(rng));
        let rel = [Rel::Le, Rel::Lt, Rel::Eq, Rel::Ge, Rel::Gt][rng.gen_range(0..5)];
        LinearAtom::new(l, rel, r)
    }

    #[test]
    fn incremental_matches_fresh_solves() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 400 {
            let vars = rng.gen_range(1..=4);
            let base: Vec<LinearAtom> = (0..rng.gen_range(0..5)).map(|_| random_atom(&mut rng, vars)).collect();
            let extras: Vec<Vec<LinearAtom>> = (0..4)
                .map(|_| (0..rng.gen_range(1..=3)).map(|_| random_atom(&mut rng, vars)).collect())
                .collect();
            let vocabulary: Vec<LinearAtom> = extras.concat();
            let Some(mut inc) = Incremental::new(vars, &base, &vocabulary) else {
                assert!(!is_feasible(vars, &base));
                continue;
            };
            let mut so_far = base.clone();
            for extra in &extras {
                let expected = is_feasible(vars, &[so_far.clone(), extra.clone()].concat());
                let edges = inc.compile(extra);
                assert_eq!(
                    edges.as_ref().is_some_and(|e| inc.admits(e)),
                    expected,
                    "{so_far:?} + {extra:?}"
                );
                if expected {
                    assert!(inc.add(edges.as_ref().unwrap()));
                    so_far.extend_from_slice(extra);
                }
                checked += 1;
            }
        }
    }

    #[test]
    fn cores_are_unsatisfiable_and_skip_bystanders() {
        let atoms = [
            LinearAtom::new(v(2), Rel::Le, c(half())),
            LinearAtom::new(v(0), Rel::Lt, v(1)),
            LinearAtom::new(v(3), Rel::Gt, v(2)),
            LinearAtom::new(v(1), Rel::Le, v(0)),
        ];
        assert_eq!(infeasible_core(4, &atoms), Some(vec![1, 3]));
        assert_eq!(infeasible_core(4, &atoms[..3]), None);

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let vars = rng.gen_range(1..=4);
            let atoms: Vec<LinearAtom> = (0..rng.gen_range(1..8)).map(|_| random_atom(&mut rng, vars)).collect();
            match infeasible_core(vars, &atoms) {
                None => assert!(is_feasible(vars, &atoms)),
                Some(core) => {
                    let subset: Vec<LinearAtom> = core.iter().map(|&i| atoms[i].clone()).collect();
                    assert!(!is_feasible(vars, &subset), "{atoms:?} core {core:?}");
                }
            }
        }
    }
}
