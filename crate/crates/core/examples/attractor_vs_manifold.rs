//! Distance from a long set A orbit to the grown unstable manifold.
//!
//! Run with `cargo run --release --example attractor_vs_manifold`.

use pwl_manifold::bcnf::simulate;
use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::polytope::BoxedUnion;
use pwl_manifold::{BcnfParams, Direction, Preset, SeedSpec, Vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = BcnfParams::preset(Preset::A).build();
    let cycle = map.find_cycle(&"R".parse()?)?;
    let seed = manifold::build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable)?;
    let orbit = simulate(&map, &Vector::new(vec![0.1, 0.0, 0.0]), 1000, 10_000, 1e6);
    let result = manifold::grow(&map, &cycle, &seed, 15, Direction::Unstable, &GrowOptions::default())?;
    for r in [10, 12, 15] {
        let z = result.assemble_z(r)?;
        let union = BoxedUnion::new(z.iter().copied());
        let mut d: Vec<f64> = orbit.points.iter().map(|x| union.distance(x.as_slice())).collect();
        d.sort_by(f64::total_cmp);
        let near = d.iter().filter(|&&x| x < 1e-2).count();
        println!(
            "Z^({r:2}): {:5} polygons, median distance {:.2e}, {:.2}% within 1e-2",
            union.len(),
            d[d.len() / 2],
            100.0 * near as f64 / d.len() as f64
        );
    }
    Ok(())
}
