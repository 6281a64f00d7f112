//! Samples every tableau rule: a random F-model realises the premise, and
//! some child of the rule must be realisable in the same model.

use kginv::sampling::sample_rule;
use kginv::tableau::RuleKind;

fn main() {
    for rule in RuleKind::ALL {
        let r = sample_rule(rule, 200, 1);
        println!(
            "{:>6}  {} samples, {} draws, {} failures",
            rule.to_string(),
            r.samples,
            r.attempts,
            r.failures.len()
        );
        for f in r.failures.iter().take(3) {
            println!("        {f}");
        }
    }
}
