//! Geometry files and run manifests.
//!
//! OBJ and PLY files share one vertex pool per file, merged on a `1e-12`
//! grid, with one group per generation. The JSON archive keeps every vertex
//! of every polytope and can be read back for intersection queries. Floats
//! are written in shortest round-trip form so re-imports are bit-exact.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bcnf::BcnfParams;
use crate::linalg::{Matrix, Vector};
use crate::manifold::{Branch, Direction, Generation, ManifoldResult};
use crate::pwlmap::{CycleData, PwlMap, Word};

pub const ARCHIVE_FORMAT: &str = "pwl-manifold-archive";
pub const ARCHIVE_VERSION: u32 = 1;
pub const MANIFEST_FORMAT: &str = "pwl-manifold-manifest";
/// Vertices closer than this (per coordinate) share an index in OBJ/PLY.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

struct VertexPool {
    index: HashMap<Vec<u64>, usize>,
    coords: Vec<[f64; 3]>,
}

impl VertexPool {
    fn new() -> Self {
        VertexPool {
            index: HashMap::new(),
            coords: Vec::new(),
        }
    }

    fn insert(&mut self, v: [f64; 3]) -> usize {
        let key: Vec<u64> = v.iter().map(|x| ((x / MERGE_TOL).round() + 0.0).to_bits()).collect();
        let next = self.coords.len();
        *self.index.entry(key).or_insert_with(|| {
            self.coords.push(v);
            next
        })
    }
}

fn padded(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

fn require_mesh_ambient(generations: &[Generation]) -> Result<(), ExportError> {
    for g in generations {
        if let Some(p) = g.polytopes.iter().find(|p| p.ambient_dim() > 3) {
            return Err(ExportError::Format(format!(
                "mesh formats need ambient dimension at most 3, found {}",
                p.ambient_dim()
            )));
        }
    }
    Ok(())
}

/// Faces (or edges) per generation as indices into one shared pool.
struct IndexedMesh {
    pool: VertexPool,
    groups: Vec<(usize, Vec<Vec<usize>>)>,
}

fn index_mesh(generations: &[Generation]) -> IndexedMesh {
    let mut pool = VertexPool::new();
    let groups = generations
        .iter()
        .map(|g| {
            let elems = g
                .polytopes
                .iter()
                .map(|p| p.vertices().map(|v| pool.insert(padded(v))).collect())
                .collect();
            (g.index, elems)
        })
        .collect();
    IndexedMesh { pool, groups }
}

pub fn write_obj<W: Write>(w: &mut W, generations: &[Generation]) -> Result<(), ExportError> {
    require_mesh_ambient(generations)?;
    let mesh = index_mesh(generations);
    writeln!(w, "# pwl-manifold")?;
    for v in &mesh.pool.coords {
        writeln!(w, "v {} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2]))?;
    }
    for (index, elems) in &mesh.groups {
        writeln!(w, "g generation_{index}")?;
        for e in elems {
            let tag = if e.len() == 2 { "l" } else { "f" };
            write!(w, "{tag}")?;
            for i in e {
                write!(w, " {}", i + 1)?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// ASCII PLY with the same vertex pool as [`write_obj`]. Polygons become
/// `face` elements and segments `edge` elements, each tagged with its
/// generation.
pub fn write_ply<W: Write>(w: &mut W, generations: &[Generation]) -> Result<(), ExportError> {
    require_mesh_ambient(generations)?;
    let mesh = index_mesh(generations);
    let mut faces = Vec::new();
    let mut edges = Vec::new();
    for (index, elems) in &mesh.groups {
        for e in elems {
            if e.len() == 2 {
                edges.push((*index, e));
            } else {
                faces.push((*index, e));
            }
        }
    }
    writeln!(w, "ply\nformat ascii 1.0\ncomment pwl-manifold")?;
    writeln!(w, "element vertex {}", mesh.pool.coords.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if !faces.is_empty() {
        writeln!(w, "element face {}", faces.len())?;
        writeln!(w, "property list uchar int vertex_indices\nproperty int generation")?;
    }
    if !edges.is_empty() {
        writeln!(w, "element edge {}", edges.len())?;
        writeln!(w, "property int vertex1\nproperty int vertex2\nproperty int generation")?;
    }
    writeln!(w, "end_header")?;
    for v in &mesh.pool.coords {
        writeln!(w, "{} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2]))?;
    }
    for (index, e) in faces {
        if e.len() > 255 {
            return Err(ExportError::Format(format!("face with {} vertices", e.len())));
        }
        write!(w, "{}", e.len())?;
        for i in e {
            write!(w, " {i}")?;
        }
        writeln!(w, " {index}")?;
    }
    for (index, e) in edges {
        writeln!(w, "{} {} {index}", e[0], e[1])?;
    }
    Ok(())
}

/// One line per vertex: `generation,polytope,vertex,x0,x1,...`.
pub fn write_vertex_csv<W: Write>(w: &mut W, generations: &[Generation]) -> Result<(), ExportError> {
    let n = generations
        .iter()
        .flat_map(|g| g.polytopes.first())
        .map(|p| p.ambient_dim())
        .next()
        .unwrap_or(0);
    write!(w, "generation,polytope,vertex")?;
    for i in 0..n {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for g in generations {
        for (j, p) in g.polytopes.iter().enumerate() {
            for (k, v) in p.vertices().enumerate() {
                write!(w, "{},{j},{k}", g.index)?;
                for x in v {
                    write!(w, ",{}", fmt_f64(*x))?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

/// Orbit points as `step,x0,x1,...`; the header is written even when there
/// are no points.
pub fn write_orbit_csv<W: Write>(
    w: &mut W,
    dim: usize,
    first_step: usize,
    points: &[Vector],
) -> Result<(), ExportError> {
    write!(w, "step")?;
    for i in 0..dim {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for (i, x) in points.iter().enumerate() {
        write!(w, "{}", first_step + i)?;
        for v in x.as_slice() {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads an orbit CSV written by [`write_orbit_csv`].
pub fn read_orbit_csv<R: BufRead>(r: R) -> Result<Vec<Vector>, ExportError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split(',').skip(1).map(str::parse).collect();
        let vals = vals.map_err(|e| ExportError::Format(format!("line {}: {e}", i + 1)))?;
        out.push(Vector::new(vals));
    }
    Ok(out)
}

/// Lossless record of a grown manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub format: String,
    pub version: u32,
    pub ambient_dim: usize,
    pub manifold_dim: usize,
    pub direction: Direction,
    pub word: Word,
    pub cycle_points: Vec<Vector>,
    pub seed_radius: f64,
    pub generations: Vec<Generation>,
}

impl Archive {
    pub fn from_result(result: &ManifoldResult) -> Self {
        Archive {
            format: ARCHIVE_FORMAT.to_string(),
            version: ARCHIVE_VERSION,
            ambient_dim: result.seed.ambient_dim(),
            manifold_dim: result.dim(),
            direction: result.direction,
            word: result.cycle.word.clone(),
            cycle_points: result.cycle.points.clone(),
            seed_radius: result.seed_radius,
            generations: result.generations.clone(),
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<(), ExportError> {
        serde_json::to_writer(&mut *w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Reads and validates an archive. Every polytope passes through the
    /// checked constructors, so malformed polygons are rejected here.
    pub fn read<R: io::Read>(r: R) -> Result<Self, ExportError> {
        let a: Archive = serde_json::from_reader(r)?;
        if a.format != ARCHIVE_FORMAT {
            return Err(ExportError::Format(format!("not an archive: format {:?}", a.format)));
        }
        if a.version != ARCHIVE_VERSION {
            return Err(ExportError::Format(format!("unsupported archive version {}", a.version)));
        }
        for g in &a.generations {
            for p in &g.polytopes {
                if p.ambient_dim() != a.ambient_dim || p.dim() != a.manifold_dim {
                    return Err(ExportError::Format(format!(
                        "generation {} holds a {}-polytope in R^{}, expected {}-polytopes in R^{}",
                        g.index,
                        p.dim(),
                        p.ambient_dim(),
                        a.manifold_dim,
                        a.ambient_dim
                    )));
                }
            }
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub a_left: Vec<Vec<f64>>,
    pub a_right: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BcnfParams>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

impl MapRecord {
    pub fn new(map: &PwlMap, params: Option<BcnfParams>) -> Self {
        MapRecord {
            a_left: rows(map.a_left()),
            a_right: rows(map.a_right()),
            b: map.offset().as_slice().to_vec(),
            c: map.normal().as_slice().to_vec(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub vertices: usize,
    pub radius: f64,
    pub horizon: usize,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub escaped_at: Option<usize>,
    pub escape_norm: Option<f64>,
    pub max_norm: f64,
}

/// Summary of one `compute` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub map: MapRecord,
    pub word: Word,
    pub direction: Direction,
    pub period: usize,
    pub cycle_points: Vec<Vec<f64>>,
    pub multipliers: Vec<Multiplier>,
    pub unstable_index: usize,
    pub stable_index: usize,
    pub seed: SeedRecord,
    pub steps: usize,
    /// Polytope count `m_i` of each generation.
    pub counts: Vec<usize>,
    pub total_polytopes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeRecord>,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl Manifest {
    pub fn new(map: MapRecord, cycle: &CycleData, direction: Direction, seed: SeedRecord, counts: Vec<usize>) -> Self {
        Manifest {
            format: MANIFEST_FORMAT.to_string(),
            map,
            word: cycle.word.clone(),
            direction,
            period: cycle.period(),
            cycle_points: cycle.points.iter().map(|p| p.as_slice().to_vec()).collect(),
            multipliers: cycle
                .multiplier_values()
                .into_iter()
                .map(|z| Multiplier {
                    re: z.re,
                    im: z.im,
                    modulus: z.norm(),
                })
                .collect(),
            unstable_index: cycle.unstable_index(),
            stable_index: cycle.stable_index(),
            seed,
            steps: counts.len().saturating_sub(1),
            total_polytopes: counts.iter().sum(),
            counts,
            probe: None,
            files: Vec::new(),
            runtime_seconds: None,
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<(), ExportError> {
        serde_json::to_writer_pretty(&mut *w, self)?;
        writeln!(w)?;
        Ok(())
    }
}
