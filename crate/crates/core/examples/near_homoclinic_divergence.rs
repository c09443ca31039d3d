//! Track the right branch of the set B unstable manifold on both sides of
//! the parameter value where it stops being bounded.
//!
//! Run with `cargo run --release --example near_homoclinic_divergence`.

use pwl_manifold::manifold::{self, probe_divergence, GrowOptions};
use pwl_manifold::{BcnfParams, Branch, Direction, Preset, SeedSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SeedSpec {
        branch: Branch::Right,
        ..SeedSpec::default()
    };
    let options = GrowOptions {
        max_polytopes: 50_000_000,
        ..GrowOptions::default()
    };
    for tau_l in [1.5, 1.51] {
        let map = BcnfParams {
            tau_l,
            ..BcnfParams::preset(Preset::B)
        }
        .build();
        let cycle = map.find_cycle(&"L".parse()?)?;
        let seed = manifold::build_seed(&map, &cycle, &spec, Direction::Unstable)?;
        let probe = probe_divergence(&map, &seed.polytope, 66, Direction::Unstable, &options)?;
        match probe.escaped_at {
            Some(step) => println!(
                "tau_L = {tau_l}: escapes at step {step} with norm {:.3e}",
                probe.escape_norm.unwrap_or(f64::INFINITY)
            ),
            None => println!(
                "tau_L = {tau_l}: bounded for {} steps, max norm {:.4}, {} segments",
                probe.counts.len() - 1,
                probe.max_norm,
                probe.counts.last().unwrap_or(&0)
            ),
        }
    }
    Ok(())
}
