//! A small benchmark run on both families, printed as tables.

use pcotsp::bench::{cmd_bench, render_table, BenchConfig, Family};

fn main() {
    for family in [Family::Ordered, Family::Pairs] {
        let config = BenchConfig {
            family,
            n: 7,
            k: 2,
            instances: 4,
            trials: 50,
            ..Default::default()
        };
        print!("{}", render_table(&cmd_bench(&config)));
        println!();
    }
}
