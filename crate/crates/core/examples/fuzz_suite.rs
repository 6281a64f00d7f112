//! Runs the seeded cross-check suites. Pass a seed as the first argument.

use kginv::fuzz::{run, FuzzConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed is a number"));
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run(&FuzzConfig {
        seed,
        threads,
        ..FuzzConfig::default()
    });
    println!("{report}");
}
