//! Decides a handful of formulas and prints verdict and search statistics.
//!
//! ```text
//! cargo run --example prove_basic
//! ```

use kginv::formula::parse;
use kginv::tableau::{prove, ProveConfig};

fn main() {
    let config = ProveConfig::default();
    for src in [
        "p -> p",
        "(p & q) -> p",
        "[](p -> q) -> ([]p -> []q)",
        "~~p <-> p",
        "[]p -> ~<>~p",
        "<>(p | q) -> <>p | <>q",
        "p | ~p",
    ] {
        let phi = parse(src).expect("well-formed");
        let report = prove(&phi, &config).expect("small formulas stay in budget");
        let verdict = if report.verdict.is_valid() {
            "valid"
        } else {
            "not valid"
        };
        println!(
            "{src:32} {verdict:9}  {} applications, {} closed branches",
            report.stats.applications, report.stats.closed_branches
        );
    }
}
