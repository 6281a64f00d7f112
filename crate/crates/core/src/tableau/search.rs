use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::extract::{check_realisation, extract_countermodel, Realisation, RealisationViolation};
use super::rules::{applicable, apply_at, RuleInstance, RuleKind};
use crate::constraints::{Branch, Label, Structure};
use crate::formula::Formula;
use crate::models::FModel;
use crate::rational::{format_rational, one};
use crate::solver::{close_check, infeasible_core, translate, Betweenness, CloseOptions, CloseResult, Solution};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Depth-first over branches, any world first.
    #[default]
    Full,
    /// World by world: a world's content is built completely before its
    /// children, and finished worlds shed their decomposed constraints.
    OnTheFly,
}

#[derive(Clone, Debug)]
pub struct ProveConfig {
    pub crisp: bool,
    pub strategy: Strategy,
    /// Maximum number of rule applications.
    pub budget: u64,
    pub time_limit: Option<Duration>,
    pub betweenness: Betweenness,
    pub trace: bool,
    /// Skip the other alternatives of a split when a branch closes
    /// without using it.
    pub backjumping: bool,
}

impl Default for ProveConfig {
    fn default() -> Self {
        ProveConfig {
            crisp: false,
            strategy: Strategy::Full,
            budget: DEFAULT_BUDGET,
            time_limit: None,
            betweenness: Betweenness::Consecutive,
            trace: false,
            backjumping: true,
        }
    }
}

impl ProveConfig {
    pub fn crisp() -> Self {
        ProveConfig {
            crisp: true,
            ..ProveConfig::default()
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    fn close_options(&self) -> CloseOptions {
        CloseOptions {
            crisp: self.crisp,
            betweenness: self.betweenness,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub applications: u64,
    /// Branches closed, by the raw system or by the full closure check.
    pub closed_branches: u64,
    /// Largest live constraint count seen on a branch.
    pub peak_live: usize,
    /// Constraints dropped from finished worlds.
    pub retired: usize,
    /// Alternatives never explored because a sibling closed without
    /// using the split.
    pub skipped_branches: u64,
}

#[derive(Clone, Debug)]
pub struct Countermodel {
    pub model: FModel,
    pub realisation: Realisation,
    /// The world falsifying the formula.
    pub witness: String,
    /// Value of the formula at the witness; below 1.
    pub value: crate::rational::Rational,
    pub branch: Branch,
    pub solution: Solution,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Valid,
    NotValid(Box<Countermodel>),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match self {
            Verdict::Valid => None,
            Verdict::NotValid(c) => Some(c),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProofReport {
    pub verdict: Verdict,
    pub stats: Stats,
    /// The formula actually refuted: the input in core form.
    pub core: Formula,
    pub trace: Option<String>,
}

#[derive(Debug, Error)]
pub enum ProveError {
    #[error("rule application budget of {0} exhausted")]
    Budget(u64),
    #[error("time limit of {0:?} exceeded")]
    Time(Duration),
    #[error("internal error: extracted countermodel fails verification: {0}")]
    Unverified(String),
}

struct Node {
    branch: Branch,
    indent: usize,
    safe: BTreeSet<Label>,
}

/// Why a subtree closed: the branching points its closure used.
enum Reason {
    /// Closure by the side conditions, which are not traced to points.
    All,
    Points(BTreeSet<u32>),
}

impl Reason {
    fn uses(&self, point: u32) -> bool {
        match self {
            Reason::All => true,
            Reason::Points(p) => p.contains(&point),
        }
    }

    fn merge(&mut self, other: Reason) {
        match (self, other) {
            (Reason::Points(a), Reason::Points(b)) => a.extend(b),
            (me, _) => *me = Reason::All,
        }
    }
}

enum Outcome {
    Closed(Reason),
    Open(Box<Countermodel>),
}

struct Search<'c> {
    config: &'c ProveConfig,
    core: Formula,
    start: Instant,
    stats: Stats,
    trace: Option<String>,
    step: u32,
}

/// Searches for a closed tableau for `w: φ < 1`.
///
/// The input is desugared first. Branches whose raw system is infeasible
/// are closed immediately; complete branches go through the full closure
/// check, and the first open one yields a verified countermodel. When a
/// branch closes for reasons that do not involve the split that created
/// it, the remaining alternatives of that split are skipped.
pub fn prove(formula: &Formula, config: &ProveConfig) -> Result<ProofReport, ProveError> {
    let core = formula.desugar();
    let mut search = Search {
        config,
        core: core.clone(),
        start: Instant::now(),
        stats: Stats::default(),
        trace: config.trace.then(String::new),
        step: 0,
    };
    let root = Node {
        branch: Branch::initial(core.clone()),
        indent: 0,
        safe: BTreeSet::new(),
    };
    let verdict = match search.explore(root)? {
        Outcome::Closed(_) => {
            note(&mut search.trace, 0, "all branches closed");
            Verdict::Valid
        }
        Outcome::Open(cm) => Verdict::NotValid(cm),
    };
    Ok(ProofReport {
        verdict,
        stats: search.stats,
        core,
        trace: search.trace,
    })
}

impl Search<'_> {
    fn explore(&mut self, mut node: Node) -> Result<Outcome, ProveError> {
        let config = self.config;
        loop {
            if let Some(limit) = config.time_limit {
                if self.start.elapsed() > limit {
                    return Err(ProveError::Time(limit));
                }
            }
            let fresh = node.branch.stamp_steps(&mut self.step);
            if let Some(out) = self.trace.as_mut() {
                for i in fresh {
                    let e = &node.branch.entries()[i];
                    let _ = write!(out, "{}{}. {}", "  ".repeat(node.indent), e.step, e.constraint);
                    if let Some(o) = e.origin {
                        let _ = write!(out, " ({}: {})", o.rule, o.premise);
                    }
                    out.push('\n');
                }
            }
            self.stats.peak_live = self.stats.peak_live.max(node.branch.len());
            let sys = translate(&node.branch);
            if let Some(core) = infeasible_core(sys.num_vars(), &sys.atoms) {
                self.stats.closed_branches += 1;
                note(&mut self.trace, node.indent, "x closed");
                let entries = node.branch.entries();
                let points = core
                    .into_iter()
                    .filter_map(|i| entries.get(i))
                    .flat_map(|e| e.deps.points().iter().copied())
                    .collect();
                return Ok(Outcome::Closed(Reason::Points(points)));
            }
            let instances = applicable(&node.branch);
            let chosen = match config.strategy {
                Strategy::Full => pick_full(&instances),
                Strategy::OnTheFly => pick_on_the_fly(&mut node, &instances, &mut self.stats),
            };
            let Some(inst) = chosen else {
                if config.strategy == Strategy::OnTheFly {
                    retire_finished(&mut node, None, &mut self.stats);
                }
                return match close_check(&node.branch, config.close_options()) {
                    CloseResult::Closed => {
                        self.stats.closed_branches += 1;
                        note(&mut self.trace, node.indent, "x closed (side conditions)");
                        Ok(Outcome::Closed(Reason::All))
                    }
                    CloseResult::Open(sol) => {
                        note(&mut self.trace, node.indent, "open");
                        let cm = verified_countermodel(&self.core, node.branch, *sol, config)?;
                        Ok(Outcome::Open(Box::new(cm)))
                    }
                };
            };
            self.stats.applications += 1;
            if self.stats.applications > config.budget {
                return Err(ProveError::Budget(config.budget));
            }
            let point = u32::try_from(self.stats.applications).unwrap_or(u32::MAX);
            let mut children = apply_at(&node.branch, &inst, Some(point));
            if children.len() == 1 {
                node.branch = children.pop().expect("one child");
                continue;
            }
            let indent = node.indent + 1;
            let mut reason = Reason::Points(BTreeSet::new());
            let count = children.len();
            for (k, child) in children.into_iter().enumerate() {
                let child = Node {
                    branch: child,
                    indent,
                    safe: node.safe.clone(),
                };
                match self.explore(child)? {
                    Outcome::Open(cm) => return Ok(Outcome::Open(cm)),
                    Outcome::Closed(r) if config.backjumping && !r.uses(point) => {
                        if k + 1 < count {
                            self.stats.skipped_branches += (count - k - 1) as u64;
                            note(&mut self.trace, indent, "x closed (same reason as the previous branch)");
                        }
                        return Ok(Outcome::Closed(r));
                    }
                    Outcome::Closed(r) => reason.merge(r),
                }
            }
            if let Reason::Points(p) = &mut reason {
                p.remove(&point);
            }
            return Ok(Outcome::Closed(reason));
        }
    }
}

fn note(trace: &mut Option<String>, indent: usize, text: &str) {
    if let Some(out) = trace.as_mut() {
        let _ = writeln!(out, "{}{text}", "  ".repeat(indent));
    }
}

/// Propositional before modal, non-branching before branching, equality
/// rules last.
fn class(rule: RuleKind) -> u8 {
    match (rule.is_equality(), rule.is_modal(), rule.is_branching()) {
        (true, _, _) => 4,
        (false, false, false) => 0,
        (false, false, true) => 1,
        (false, true, false) => 2,
        (false, true, true) => 3,
    }
}

fn pick_full(instances: &[RuleInstance]) -> Option<RuleInstance> {
    instances.iter().min_by_key(|i| class(i.rule)).cloned()
}

/// Labels in depth-first order of the label tree, children in creation
/// order.
fn preorder(b: &Branch) -> Vec<Label> {
    let mut labels: Vec<Label> = b.labels().to_vec();
    labels.sort();
    let mut out = Vec::with_capacity(labels.len());
    let mut stack = vec![Label::ROOT];
    while let Some(w) = stack.pop() {
        out.push(w);
        let mut kids: Vec<Label> = labels.iter().copied().filter(|&u| b.parent(u) == Some(w)).collect();
        kids.reverse();
        stack.extend(kids);
    }
    out
}

fn is_ancestor(b: &Branch, a: Label, mut w: Label) -> bool {
    while let Some(p) = b.parent(w) {
        if p == a {
            return true;
        }
        w = p;
    }
    false
}

/// The first world in depth-first order with work left gets it: equality
/// rules reaching into it, then its propositional rules, then its modal
/// rules.
fn pick_on_the_fly(node: &mut Node, instances: &[RuleInstance], stats: &mut Stats) -> Option<RuleInstance> {
    let order = preorder(&node.branch);
    let position = |w: Label| order.iter().position(|&x| x == w).unwrap_or(usize::MAX);
    let otf_class = |r: RuleKind| if r.is_equality() { 0 } else { class(r) + 1 };
    let inst = instances
        .iter()
        .min_by_key(|i| (position(i.site()), otf_class(i.rule)))
        .cloned()?;
    retire_finished(node, Some((inst.site(), &order)), stats);
    Some(inst)
}

/// Marks as safe every world that precedes `active` in depth-first order
/// without being its ancestor (all worlds but the root when `active` is
/// `None`), dropping their compound labelled constraints. Atomic and
/// term-only constraints stay, as do registries and relational terms.
fn retire_finished(node: &mut Node, active: Option<(Label, &[Label])>, stats: &mut Stats) {
    let finished: Vec<Label> = match active {
        Some((site, order)) => order
            .iter()
            .take_while(|&&w| w != site)
            .copied()
            .filter(|&w| !is_ancestor(&node.branch, w, site))
            .collect(),
        None => node
            .branch
            .labels()
            .iter()
            .copied()
            .filter(|&w| w != Label::ROOT)
            .collect(),
    };
    let newly: BTreeSet<Label> = finished.into_iter().filter(|w| !node.safe.contains(w)).collect();
    if newly.is_empty() {
        return;
    }
    stats.retired += node.branch.retire(|e| match &e.constraint.left {
        Structure::Labelled(w, phi) => newly.contains(w) && !matches!(phi, Formula::Atom(_)),
        Structure::Term(_) => false,
    });
    node.safe.extend(newly);
}

fn verified_countermodel(
    core: &Formula,
    branch: Branch,
    sol: Solution,
    config: &ProveConfig,
) -> Result<Countermodel, ProveError> {
    let (model, realisation) = extract_countermodel(&branch, &sol, config.crisp);
    let violations = model.validate();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(ProveError::Unverified(text.join("; ")));
    }
    let problems: Vec<RealisationViolation> = check_realisation(&model, &realisation, &branch, config.betweenness);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|v| v.to_string()).collect();
        return Err(ProveError::Unverified(text.join("; ")));
    }
    let witness = Label::ROOT.name();
    let value = model
        .eval(&witness, core)
        .map_err(|e| ProveError::Unverified(e.to_string()))?;
    if value >= one() {
        return Err(ProveError::Unverified(format!(
            "formula evaluates to {} at {witness}",
            format_rational(&value)
        )));
    }
    Ok(Countermodel {
        model,
        realisation,
        witness,
        value,
        branch,
        solution: sol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::{half, zero};

    fn run(text: &str, config: &ProveConfig) -> ProofReport {
        prove(&parse(text).unwrap(), config).unwrap()
    }

    #[test]
    fn identity_is_valid() {
        assert!(run("p -> p", &ProveConfig::default()).verdict.is_valid());
    }

    #[test]
    fn box_to_dual_diamond_fails_fuzzily() {
        let report = run("[]p -> ~<>~p", &ProveConfig::default());
        let cm = report.verdict.countermodel().expect("not valid");
        assert_eq!(cm.value, half());
        let m = &cm.model;
        assert_eq!(m.eval("w", &parse("[]p").unwrap()).unwrap(), one());
        assert_eq!(m.eval("w", &parse("~<>~p").unwrap()).unwrap(), half());
        assert_eq!(m.frame().worlds().len(), 2);
        assert_eq!(m.frame().access(0, 1), &half());
        assert_eq!(m.frame().value("p", 1), half());
        assert_eq!(m.t_set(0).len(), 3);
    }

    #[test]
    fn duality_is_crisp_valid_only() {
        let text = "[]p <-> ~<>~p";
        assert!(run(text, &ProveConfig::crisp()).verdict.is_valid());
        let fuzzy = run(text, &ProveConfig::default());
        let cm = fuzzy.verdict.countermodel().expect("not valid");
        assert!(cm
            .model
            .frame()
            .edges()
            .iter()
            .any(|(_, _, r)| **r > zero() && **r < one()));
    }

    #[test]
    fn strategies_agree_on_small_corpus() {
        for text in [
            "[]p -> ~<>~p",
            "p -> p",
            "[](p & q) -> []p",
            "<>p -> []p",
            "[]p & <>~p",
            "~~p -> p",
        ] {
            let full = run(text, &ProveConfig::default());
            let otf = run(text, &ProveConfig::default().with_strategy(Strategy::OnTheFly));
            assert_eq!(full.verdict.is_valid(), otf.verdict.is_valid(), "{text}");
        }
    }

    #[test]
    fn trace_numbers_steps() {
        let config = ProveConfig {
            trace: true,
            ..ProveConfig::default()
        };
        let trace = run("[]p -> ~<>~p", &config).trace.unwrap();
        assert!(trace.starts_with("1. w: []p -> ~<>~p < 1\n"), "{trace}");
        assert!(trace.contains("(->_<: 1)"), "{trace}");
    }

    #[test]
    fn budget_is_reported() {
        let config = ProveConfig {
            budget: 1,
            ..ProveConfig::default()
        };
        let err = prove(&parse("[]p -> ~<>~p").unwrap(), &config).unwrap_err();
        assert!(matches!(err, ProveError::Budget(1)));
    }
}
