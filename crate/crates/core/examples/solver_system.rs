//! Builds a branch by hand, translates it to a difference-constraint
//! system and decides it with and without side conditions.

use kginv::constraints::{Branch, Constraint, Label, Rel, ValueTerm};
use kginv::formula::Formula;
use kginv::rational::format_rational;
use kginv::solver::{close_check, feasible, translate, Betweenness, CloseOptions, CloseResult, SolveResult, SolverVar};

fn main() {
    let w = Label::ROOT;
    let mut b = Branch::empty();
    let (t, ts) = b.fresh_tpair(w);
    let c = b.fresh_var();
    b.add(Constraint::labelled(w, Formula::atom("p"), Rel::Ge, c), None);
    b.add(Constraint::terms(c.term, Rel::Gt, ValueTerm::ZERO), None);
    b.add(Constraint::terms(t.term, Rel::Lt, c.complement()), None);
    b.add(Constraint::terms(c.term, Rel::Le, ts), None);
    print!("{}", b.dump());

    let sys = translate(&b);
    println!("\n{}", sys.dump());
    match feasible(sys.num_vars(), &sys.atoms) {
        SolveResult::Sat(values) => {
            let shown: Vec<String> = values.iter().map(format_rational).collect();
            println!("raw system satisfiable: [{}]", shown.join(", "));
        }
        SolveResult::Unsat => println!("raw system unsatisfiable"),
    }

    for betweenness in [Betweenness::Consecutive, Betweenness::Literal] {
        let opts = CloseOptions {
            crisp: false,
            betweenness,
        };
        match close_check(&b, opts) {
            CloseResult::Closed => println!("{betweenness:?}: closed"),
            CloseResult::Open(sol) => {
                let pick = |vt: ValueTerm| sol.value(&SolverVar::Term(vt.term)).map_or("-".into(), format_rational);
                println!(
                    "{betweenness:?}: open with t = {}, ts = {}, c = {}",
                    pick(t),
                    pick(ts),
                    pick(c)
                );
            }
        }
    }
}
