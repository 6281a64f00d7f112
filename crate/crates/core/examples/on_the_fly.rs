//! Compares the two search strategies on formulas of growing size: same
//! verdicts, and the on-the-fly strategy keeps fewer constraints alive.

use kginv::formula::{parse, Formula};
use kginv::tableau::{prove, ProveConfig, Strategy};

/// `<>p1 & ... & <>pn -> <>(p1 | ... | pn)`: one successor per conjunct,
/// each finished before the next is opened.
fn diamonds(n: usize) -> Formula {
    let each: Vec<String> = (1..=n).map(|i| format!("<>p{i}")).collect();
    let any: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    parse(&format!("{} -> <>({})", each.join(" & "), any.join(" | "))).unwrap()
}

fn main() {
    println!("{:>3} {:>5} {:>6} {:>6} {:>7}", "n", "len", "valid", "full", "on-fly");
    for n in 1..=5 {
        let phi = diamonds(n);
        let run = |s| prove(&phi, &ProveConfig::default().with_strategy(s)).unwrap();
        let (full, fly) = (run(Strategy::Full), run(Strategy::OnTheFly));
        assert_eq!(full.verdict.is_valid(), fly.verdict.is_valid());
        println!(
            "{n:>3} {:>5} {:>6} {:>6} {:>7}",
            phi.size(),
            full.verdict.is_valid(),
            full.stats.peak_live,
            fly.stats.peak_live
        );
    }
}
