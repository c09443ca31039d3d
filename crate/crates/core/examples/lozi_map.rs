//! The unstable manifold of the Lozi map saddle, `x' = 1 - a|x| + y`, `y' = b x`.
//!
//! Run with `cargo run --example lozi_map`.

use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::{Direction, Matrix, PwlMap, SeedSpec, Vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b) = (1.7, 0.5);
    let map = PwlMap::new(
        Matrix::from_rows(&[[a, 1.0], [b, 0.0]])?,
        Matrix::from_rows(&[[-a, 1.0], [b, 0.0]])?,
        Vector::new(vec![1.0, 0.0]),
        Vector::new(vec![1.0, 0.0]),
    )?;
    let cycle = map.find_cycle(&"R".parse()?)?;
    println!("saddle {:?}", cycle.base_point().as_slice());
    let seed = manifold::build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable)?;
    let result = manifold::grow(&map, &cycle, &seed, 14, Direction::Unstable, &GrowOptions::default())?;
    let length: f64 = result.last().polytopes.iter().map(|p| p.measure()).sum();
    println!("counts {:?}", result.counts());
    println!("length of the last generation {length:.4}");
    Ok(())
}
