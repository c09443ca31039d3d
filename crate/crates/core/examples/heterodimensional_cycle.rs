//! Intersections between the manifolds of the two saddles of set C.
//!
//! Run with `cargo run --release --example heterodimensional_cycle`.

use pwl_manifold::intersect::{intersect_unions, Meeting, DEFAULT_TOL};
use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::{BcnfParams, Direction, ManifoldResult, Preset, PwlMap, SeedSpec};

fn grow(map: &PwlMap, word: &str, direction: Direction, steps: usize) -> Result<ManifoldResult, Box<dyn std::error::Error>> {
    let cycle = map.find_cycle(&word.parse()?)?;
    let seed = manifold::build_seed(map, &cycle, &SeedSpec::default(), direction)?;
    Ok(manifold::grow(map, &cycle, &seed, steps, direction, &GrowOptions::default())?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = BcnfParams::preset(Preset::C).build();

    let curve = grow(&map, "LLR", Direction::Unstable, 6)?;
    let stable_curve = grow(&map, "R", Direction::Stable, 6)?;
    let points = intersect_unions(&curve.generations, &stable_curve.generations, DEFAULT_TOL)?;
    println!("LLR unstable curve meets R stable curve at {} points", points.len());
    if let Some(Meeting::Point { point }) = points.first().map(|i| &i.meeting) {
        println!("  first: {:?}", point.as_slice());
    }

    let surface = grow(&map, "R", Direction::Unstable, 6)?;
    let stable_surface = grow(&map, "LLR", Direction::Stable, 6)?;
    let segments = intersect_unions(&surface.generations, &stable_surface.generations, DEFAULT_TOL)?;
    let total: f64 = segments.iter().map(|s| s.length()).sum();
    let longest = segments.iter().map(|s| s.length()).fold(0.0, f64::max);
    println!(
        "R unstable surface meets LLR stable surface in {} segments, total length {total:.4}, longest {longest:.4}",
        segments.len()
    );
    Ok(())
}
