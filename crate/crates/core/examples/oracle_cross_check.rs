//! Cross-checks the prover against the grid oracle on propositional
//! formulas and against bounded model search on modal ones.

use kginv::formula::parse;
use kginv::oracle::{prop_valid_grid, refute_small, RefuteBounds};
use kginv::rational::format_rational;
use kginv::tableau::{prove, ProveConfig};

fn main() {
    let config = ProveConfig::default();
    for src in [
        "(p -> q) | (q -> p)",
        "p | ~p",
        "#p | ~#p",
        "~(p & ~p)",
        "(p -> q) -> (~q -> ~p)",
    ] {
        let phi = parse(src).unwrap();
        let prover = prove(&phi, &config).unwrap().verdict.is_valid();
        let grid = prop_valid_grid(&phi).unwrap();
        println!("{src:26} prover {prover:5}  grid {grid:5}");
    }
    for src in ["[]p -> ~<>~p", "[](p & q) -> []p", "<>p -> []p"] {
        let phi = parse(src).unwrap();
        let prover = prove(&phi, &config).unwrap().verdict.is_valid();
        match refute_small(&phi, &RefuteBounds::default()) {
            Some(m) => {
                let x = m.eval(&m.worlds()[0], &phi).unwrap();
                println!("{src:26} prover {prover:5}  search refutes at {}", format_rational(&x));
            }
            None => println!("{src:26} prover {prover:5}  search finds nothing"),
        }
    }
}
