//! The box/diamond duality holds over crisp frames and fails over fuzzy
//! ones; the fuzzy countermodel needs an accessibility degree strictly
//! between 0 and 1.

use kginv::formula::parse;
use kginv::rational::format_rational;
use kginv::tableau::{prove, ProveConfig};

fn main() {
    let phi = parse("([]p -> ~<>~p) & (~<>~p -> []p)").unwrap();
    for (name, config) in [("crisp", ProveConfig::crisp()), ("fuzzy", ProveConfig::default())] {
        let report = prove(&phi, &config).unwrap();
        match report.verdict.countermodel() {
            None => println!("{name}: valid"),
            Some(cm) => {
                println!("{name}: not valid, countermodel edges:");
                let frame = cm.model.frame();
                for (i, j, r) in frame.edges() {
                    println!(
                        "  {} -> {}  R = {}",
                        frame.worlds()[i],
                        frame.worlds()[j],
                        format_rational(r)
                    );
                }
            }
        }
    }
}
