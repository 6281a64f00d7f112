//! Lifts a random standard model to an F-model for a formula: the T-sets
//! collect the modal subformula values, so the lifted model agrees with
//! the standard one everywhere.

use kginv::models::lift_standard;
use kginv::oracle::{random_formula, random_standard_model, FormulaShape};
use kginv::rational::format_rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (model, phi) = loop {
        let model = random_standard_model(&mut rng, 3, 8, &["p", "q"]);
        let phi = random_formula(&mut rng, &FormulaShape::modal(10, 2));
        if model.worlds().len() == 3 && phi.modal_depth() == 2 {
            break (model, phi);
        }
    };
    let lifted = lift_standard(&model, &phi);
    println!("{}", phi.render());
    let standard = model.eval_everywhere(&phi);
    let fuzzy = lifted.eval_everywhere(&phi).unwrap();
    for (i, w) in model.worlds().iter().enumerate() {
        let t: Vec<String> = lifted.t_set(i).iter().map(format_rational).collect();
        println!(
            "{w:3} standard {:5} lifted {:5}  T = {{{}}}",
            format_rational(&standard[i]),
            format_rational(&fuzzy[i]),
            t.join(", ")
        );
    }
    assert_eq!(standard, fuzzy);
    assert!(lifted.validate().is_empty());
}
