//! Seeded cross-check suites: prover against the grid oracle on
//! propositional formulas, and countermodel verification on modal ones.

use std::fmt::{self, Write as _};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::Formula;
use crate::oracle::{prop_valid_grid_with, random_formula, standard_prop_eval, FormulaShape, PropEvaluator};
use crate::rational::{format_rational, one};
use crate::tableau::{check_realisation, prove, ProveConfig, ProveError, Verdict};

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub prop_count: usize,
    pub prop_shape: FormulaShape,
    pub modal_count: usize,
    pub modal_shape: FormulaShape,
    pub prove: ProveConfig,
    /// Worker threads; the report does not depend on it.
    pub threads: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            prop_count: 500,
            prop_shape: FormulaShape::propositional(12),
            modal_count: 200,
            modal_shape: FormulaShape::modal(14, 2),
            prove: ProveConfig::default(),
            threads: 1,
        }
    }
}

/// Seeded formulas; the same seed always gives the same list.
pub fn formulas(seed: u64, count: usize, shape: &FormulaShape) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_formula(&mut rng, shape)).collect()
}

/// Maps `f` over `items` on `threads` workers, keeping input order.
pub fn par_map<T: Sync, U: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<U>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("fuzz worker panicked"))
            .collect()
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropSuite {
    pub total: usize,
    pub agreements: usize,
    pub valid: usize,
    /// Formula, prover verdict, oracle verdict.
    pub disagreements: Vec<String>,
    pub errors: Vec<String>,
}

pub fn prop_agreement(config: &FuzzConfig, eval: &PropEvaluator) -> PropSuite {
    let inputs = formulas(config.seed, config.prop_count, &config.prop_shape);
    let outcomes = par_map(&inputs, config.threads, |phi| {
        let oracle = prop_valid_grid_with(phi, eval).expect("generated formulas are propositional");
        (prove(phi, &config.prove).map(|r| r.verdict.is_valid()), oracle)
    });
    let mut suite = PropSuite {
        total: inputs.len(),
        ..PropSuite::default()
    };
    for (phi, (prover, oracle)) in inputs.iter().zip(outcomes) {
        match prover {
            Ok(p) if p == oracle => {
                suite.agreements += 1;
                suite.valid += usize::from(p);
            }
            Ok(p) => suite.disagreements.push(format!(
                "{}  prover: {}, oracle: {}",
                phi.render(),
                verdict_word(p),
                verdict_word(oracle)
            )),
            Err(e) => suite.errors.push(format!("{}  {e}", phi.render())),
        }
    }
    suite
}

fn verdict_word(valid: bool) -> &'static str {
    if valid {
        "valid"
    } else {
        "not valid"
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessSuite {
    pub total: usize,
    pub valid: usize,
    pub verified: usize,
    pub budget: usize,
    pub failures: Vec<String>,
}

/// Checks a countermodel the way an outsider would: legality, realisation
/// of the open branch, and a value below 1 at the witness.
pub fn audit(phi: &Formula, verdict: &Verdict, config: &ProveConfig) -> Result<(), String> {
    let Some(cm) = verdict.countermodel() else {
        return Ok(());
    };
    let illegal = cm.model.validate();
    if !illegal.is_empty() {
        return Err(format!("illegal model: {}", illegal[0]));
    }
    let unrealised = check_realisation(&cm.model, &cm.realisation, &cm.branch, config.betweenness);
    if let Some(v) = unrealised.first() {
        return Err(v.to_string());
    }
    match cm.model.eval(&cm.witness, phi) {
        Ok(x) if x < one() => Ok(()),
        Ok(x) => Err(format!("evaluates to {} at {}", format_rational(&x), cm.witness)),
        Err(e) => Err(e.to_string()),
    }
}

pub fn verdict_soundness(config: &FuzzConfig) -> SoundnessSuite {
    let inputs = formulas(config.seed.wrapping_add(1), config.modal_count, &config.modal_shape);
    let outcomes = par_map(&inputs, config.threads, |phi| match prove(phi, &config.prove) {
        Ok(r) => Ok((r.verdict.is_valid(), audit(phi, &r.verdict, &config.prove))),
        Err(e) => Err(e),
    });
    let mut suite = SoundnessSuite {
        total: inputs.len(),
        ..SoundnessSuite::default()
    };
    for (phi, outcome) in inputs.iter().zip(outcomes) {
        match outcome {
            Ok((true, _)) => suite.valid += 1,
            Ok((false, Ok(()))) => suite.verified += 1,
            Ok((false, Err(why))) => suite.failures.push(format!("{}  {why}", phi.render())),
            Err(ProveError::Budget(_) | ProveError::Time(_)) => suite.budget += 1,
            Err(e) => suite.failures.push(format!("{}  {e}", phi.render())),
        }
    }
    suite
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzReport {
    pub seed: u64,
    pub prop: PropSuite,
    pub soundness: SoundnessSuite,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.prop.disagreements.is_empty()
            && self.prop.errors.is_empty()
            && self.soundness.failures.is_empty()
            && self.soundness.budget == 0
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}", self.seed);
        let p = &self.prop;
        let _ = writeln!(
            out,
            "{}/{} propositional agreements ({} valid)",
            p.agreements, p.total, p.valid
        );
        for line in &p.disagreements {
            let _ = writeln!(out, "  disagreement: {line}");
        }
        for line in &p.errors {
            let _ = writeln!(out, "  error: {line}");
        }
        let s = &self.soundness;
        let not_valid = s.total - s.valid - s.budget;
        let _ = writeln!(
            out,
            "{}/{} modal countermodels verified ({} valid, {} over budget)",
            s.verified, not_valid, s.valid, s.budget
        );
        for line in &s.failures {
            let _ = writeln!(out, "  failure: {line}");
        }
        out.push_str(if self.passed() { "PASS" } else { "FAIL" });
        f.write_str(&out)
    }
}

pub fn run(config: &FuzzConfig) -> FuzzReport {
    run_with(config, &standard_prop_eval)
}

pub fn run_with(config: &FuzzConfig, eval: &PropEvaluator) -> FuzzReport {
    FuzzReport {
        seed: config.seed,
        prop: prop_agreement(config, eval),
        soundness: verdict_soundness(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;
    use crate::oracle::Valuation;
    use crate::rational::Rational;

    fn small() -> FuzzConfig {
        FuzzConfig {
            prop_count: 40,
            modal_count: 20,
            ..FuzzConfig::default()
        }
    }

    #[test]
    fn deterministic_across_threads() {
        let one = run(&small());
        let four = run(&FuzzConfig { threads: 4, ..small() });
        assert_eq!(one.to_string(), four.to_string());
        assert!(one.passed(), "{one}");
    }

    #[test]
    fn injected_bug_is_caught() {
        // Ignores the valuation and reads every atom as 1.
        fn broken(f: &Formula, v: &Valuation) -> Rational {
            let all_true: Valuation = v.keys().map(|p| (p.clone(), one())).collect();
            standard_prop_eval(f, &all_true)
        }
        let report = run_with(&small(), &broken);
        assert!(!report.passed());
        assert!(report.to_string().contains("disagreement: "));
    }
}
