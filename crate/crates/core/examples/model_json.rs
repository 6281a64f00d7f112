//! Builds an F-model in code, validates it, saves it as JSON and loads it
//! back.

use kginv::formula::parse;
use kginv::models::{load_model, save_model, FModel, LoadedModel, StandardModel};
use kginv::rational::{format_rational, ratio};

fn main() {
    let mut frame = StandardModel::new(["a", "b"]).unwrap();
    frame.set_access("a", "b", ratio(3, 4)).unwrap();
    frame.set_access("b", "b", ratio(1, 4)).unwrap();
    frame.set_value("p", "b", ratio(1, 4)).unwrap();
    let mut model = FModel::from_standard(frame);
    let t = [ratio(0, 1), ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(1, 1)];
    model.set_t("a", t.clone()).unwrap();
    model.set_t("b", t).unwrap();

    for v in model.validate() {
        println!("violation: {v}");
    }
    let phi = parse("[]p | <>~p").unwrap();
    println!(
        "a: {} = {}",
        phi.render(),
        format_rational(&model.eval("a", &phi).unwrap())
    );

    let dir = std::env::temp_dir().join("kginv-model-json-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    let saved = LoadedModel::F(model);
    save_model(&path, &saved).unwrap();
    print!("{}", std::fs::read_to_string(&path).unwrap());
    assert_eq!(load_model(&path).unwrap(), saved);
}
