//! One-dimensional unstable and two-dimensional stable manifolds of the
//! set B fixed point, grown side by side.
//!
//! Run with `cargo run --release --example stable_and_unstable`.

use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::{BcnfParams, Direction, Preset, SeedSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = BcnfParams::preset(Preset::B).build();
    let cycle = map.find_cycle(&"L".parse()?)?;
    println!("fixed point {:?}", cycle.base_point().as_slice());
    for (direction, steps) in [(Direction::Unstable, 20), (Direction::Stable, 8)] {
        let seed = manifold::build_seed(&map, &cycle, &SeedSpec::default(), direction)?;
        let result = manifold::grow(&map, &cycle, &seed, steps, direction, &GrowOptions::default())?;
        let last = result.last();
        let extent = last.polytopes.iter().map(|p| p.max_vertex_norm()).fold(0.0, f64::max);
        println!(
            "{direction} manifold: dimension {}, seed radius {}, counts {:?}, extent {extent:.3}",
            result.dim(),
            seed.radius,
            result.counts()
        );
    }
    Ok(())
}
