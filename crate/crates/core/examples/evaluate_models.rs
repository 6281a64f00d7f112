//! Evaluates formulas in the bundled model files, including one whose
//! T-sets do not meet the F-model conditions.

use std::path::Path;

use kginv::formula::parse;
use kginv::models::{load_model, LoadedModel};
use kginv::rational::format_rational;

fn load(name: &str) -> LoadedModel {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    load_model(&path).unwrap()
}

fn main() {
    let LoadedModel::Standard(three) = load("three_worlds.json") else {
        unreachable!()
    };
    for src in ["[]p", "<>p", "[]p -> <>p"] {
        let x = three.eval("w", &parse(src).unwrap()).unwrap();
        println!("standard  w  {src:12} = {}", format_rational(&x));
    }

    let phi = parse("[]p & <>~p").unwrap();
    for (file, world) in [("nat.json", "w0"), ("nat_prime.json", "w'0")] {
        let LoadedModel::F(m) = load(file) else { unreachable!() };
        let problems = m.validate();
        match m.eval(world, &phi) {
            Ok(x) => println!("{file:15} {} = {}", phi.render(), format_rational(&x)),
            Err(e) => {
                println!("{file:15} rejected: {e}");
                for v in &problems {
                    println!("                  {v}");
                }
                let x = m.eval_unchecked(world, &phi).unwrap();
                println!("                  unchecked value {}", format_rational(&x));
            }
        }
    }
}
