//! Grow the two-dimensional unstable manifold of the set A fixed point and
//! print the polygon count of each generation.
//!
//! Run with `cargo run --release --example unstable_surface`.

use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::{BcnfParams, Direction, Preset, SeedSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = BcnfParams::preset(Preset::A).build();
    let cycle = map.find_cycle(&"R".parse()?)?;
    let seed = manifold::build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable)?;
    println!("seed radius {}", seed.radius);
    let result = manifold::grow(&map, &cycle, &seed, 12, Direction::Unstable, &GrowOptions::default())?;
    let sigma = map.switching();
    for g in &result.generations {
        let area: f64 = g.polytopes.iter().map(|p| p.measure()).sum();
        println!(
            "Q^({:2}): {:4} polygons, {:4} after splitting, area {area:.4}",
            g.index,
            g.polytopes.len(),
            g.pieces(&sigma).len()
        );
    }
    Ok(())
}
