//! Locate periodic solutions of the preset maps and print their multipliers.
//!
//! Run with `cargo run --example cycle_analysis`.

use pwl_manifold::{BcnfParams, Preset, Word};

fn main() {
    let cases = [(Preset::A, "R"), (Preset::B, "L"), (Preset::C, "R"), (Preset::C, "LLR"), (Preset::A, "LR")];
    for (preset, word) in cases {
        let map = BcnfParams::preset(preset).build();
        let word: Word = word.parse().expect("valid word");
        match map.find_cycle(&word) {
            Ok(cycle) => {
                println!("set {preset:?}, word {word}: period {}", cycle.period());
                for (i, y) in cycle.points.iter().enumerate() {
                    println!("  point {i}: {:?} ({})", y.as_slice(), map.symbol(y));
                }
                for m in &cycle.multipliers {
                    println!("  multiplier {:.6} (modulus {:.6})", m.value, m.modulus());
                }
                println!(
                    "  unstable index {}, stable index {}",
                    cycle.unstable_index(),
                    cycle.stable_index()
                );
            }
            Err(e) => println!("set {preset:?}, word {word}: {e}"),
        }
    }
}
