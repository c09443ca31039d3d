//! Write a grown manifold as OBJ, PLY, vertex CSV and a JSON archive, then
//! read the archive back.
//!
//! Run with `cargo run --example export_geometry -- <dir>`.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use pwl_manifold::export::{self, Archive};
use pwl_manifold::manifold::{self, GrowOptions};
use pwl_manifold::{BcnfParams, Direction, Preset, SeedSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("export"));
    std::fs::create_dir_all(&dir)?;
    let map = BcnfParams::preset(Preset::A).build();
    let cycle = map.find_cycle(&"R".parse()?)?;
    let seed = manifold::build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable)?;
    let result = manifold::grow(&map, &cycle, &seed, 8, Direction::Unstable, &GrowOptions::default())?;

    export::write_obj(&mut BufWriter::new(File::create(dir.join("surface.obj"))?), &result.generations)?;
    export::write_ply(&mut BufWriter::new(File::create(dir.join("surface.ply"))?), &result.generations)?;
    export::write_vertex_csv(&mut BufWriter::new(File::create(dir.join("vertices.csv"))?), &result.generations)?;
    Archive::from_result(&result).write(&mut BufWriter::new(File::create(dir.join("surface.json"))?))?;

    let back = Archive::read(File::open(dir.join("surface.json"))?)?;
    assert_eq!(back.generations, result.generations);
    println!("wrote {} generations to {}", back.generations.len(), dir.display());
    Ok(())
}
