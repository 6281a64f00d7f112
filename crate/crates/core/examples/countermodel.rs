//! Extracts the countermodel of `□p → ∼◇∼p`, re-evaluates the formula in
//! it, checks the realisation of the open branch and prints Graphviz.

use kginv::formula::parse;
use kginv::models::{model_to_json, LoadedModel};
use kginv::rational::format_rational;
use kginv::solver::Betweenness;
use kginv::tableau::{check_realisation, prove, to_dot, ProveConfig};

fn main() {
    let phi = parse("[]p -> ~<>~p").unwrap();
    let report = prove(&phi, &ProveConfig::default()).unwrap();
    let cm = report
        .verdict
        .countermodel()
        .expect("the duality fails in fuzzy models");

    let value = cm.model.eval(&cm.witness, &phi).unwrap();
    println!("value at {}: {}", cm.witness, format_rational(&value));
    for sub in ["[]p", "~<>~p"] {
        let x = cm.model.eval(&cm.witness, &parse(sub).unwrap()).unwrap();
        println!("  {sub} = {}", format_rational(&x));
    }

    let problems = check_realisation(&cm.model, &cm.realisation, &cm.branch, Betweenness::Consecutive);
    println!("realisation problems: {}", problems.len());

    println!("\n{}", model_to_json(&LoadedModel::F(cm.model.clone())));
    println!("{}", to_dot(&cm.model));
}
