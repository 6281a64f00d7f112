//! Prints the numbered derivation of a small proof.

use kginv::formula::parse;
use kginv::tableau::{prove, ProveConfig};

fn main() {
    let phi = parse("[](p & q) -> []p").unwrap();
    let config = ProveConfig {
        trace: true,
        ..ProveConfig::default()
    };
    let report = prove(&phi, &config).unwrap();
    print!("{}", report.trace.unwrap_or_default());
}
