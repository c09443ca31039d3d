//! Command runner behind the `pwlman` binary.
//!
//! Every command reads an optional JSON [`RunConfig`] and then applies
//! command-line flags on top of it. Output files are written in a fixed
//! order with fixed float formatting, so identical configurations produce
//! identical bytes.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bcnf::{self, BcnfParams, Preset};
use crate::export::{self, Archive, ExportError, Manifest, MapRecord, ProbeRecord, SeedRecord};
use crate::intersect::{self, IntersectError, Intersection};
use crate::linalg::{LinalgError, Matrix, Vector};
use crate::manifold::{
    self, Branch, Direction, Generation, GrowOptions, ManifoldError, Radius, SeedSpec,
};
use crate::pwlmap::{MapError, PwlMap, Word};

/// Environment variable that fixes the number of worker threads.
pub const THREADS_ENV: &str = "PWLMAN_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MATH: i32 = 3;
pub const EXIT_ADMISSIBILITY: i32 = 4;
pub const EXIT_DIVERGENCE: i32 = 5;
pub const EXIT_BUDGET: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Intersect(#[from] IntersectError),
    #[error("orbit left the ball of radius {bailout:e} at iterate {step}")]
    OrbitDiverged { step: usize, bailout: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Export(ExportError::Io(_)) => EXIT_IO,
            CliError::Export(_) => EXIT_CONFIG,
            CliError::Map(e) => map_code(e),
            CliError::Manifold(e) => match e {
                ManifoldError::Map(e) => map_code(e),
                ManifoldError::AdmissibilityFailure { .. } => EXIT_ADMISSIBILITY,
                ManifoldError::Divergence { .. } => EXIT_DIVERGENCE,
                ManifoldError::BudgetExceeded { .. } => EXIT_BUDGET,
                ManifoldError::Polytope(_) => EXIT_MATH,
                ManifoldError::UnsupportedDimension { .. }
                | ManifoldError::InvalidSeed(_)
                | ManifoldError::NotOnInvariantPlane { .. }
                | ManifoldError::OutOfRange { .. } => EXIT_CONFIG,
            },
            CliError::Intersect(IntersectError::DimensionMismatch { .. }) => EXIT_CONFIG,
            CliError::Intersect(_) => EXIT_MATH,
            CliError::OrbitDiverged { .. } => EXIT_DIVERGENCE,
        }
    }
}

fn map_code(e: &MapError) -> i32 {
    match e {
        MapError::InvalidWord(_) | MapError::Linalg(LinalgError::DimensionMismatch { .. }) => EXIT_CONFIG,
        _ => EXIT_MATH,
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Obj,
    Ply,
    Json,
    Csv,
}

/// Where the map comes from: a preset with optional parameter overrides,
/// six explicit normal-form parameters, or explicit matrices and vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub preset: Option<Preset>,
    pub tau_l: Option<f64>,
    pub sigma_l: Option<f64>,
    pub delta_l: Option<f64>,
    pub tau_r: Option<f64>,
    pub sigma_r: Option<f64>,
    pub delta_r: Option<f64>,
    pub a_left: Option<Vec<Vec<f64>>>,
    pub a_right: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
}

impl MapConfig {
    fn overrides(&self) -> [Option<f64>; 6] {
        [self.tau_l, self.sigma_l, self.delta_l, self.tau_r, self.sigma_r, self.delta_r]
    }

    fn apply(&mut self, other: &MapConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(preset, tau_l, sigma_l, delta_l, tau_r, sigma_r, delta_r, a_left, a_right, b, c);
    }

    /// The map, plus the normal-form parameters when it was built from them.
    pub fn resolve(&self) -> Result<(PwlMap, Option<BcnfParams>), CliError> {
        let explicit = [&self.a_left, &self.a_right].iter().any(|m| m.is_some())
            || self.b.is_some()
            || self.c.is_some();
        if explicit {
            if self.preset.is_some() || self.overrides().iter().any(Option::is_some) {
                return Err(CliError::Config(
                    "give either explicit matrices or normal-form parameters, not both".into(),
                ));
            }
            let (Some(al), Some(ar), Some(b), Some(c)) = (&self.a_left, &self.a_right, &self.b, &self.c) else {
                return Err(CliError::Config("explicit maps need a_left, a_right, b and c".into()));
            };
            let mat = |rows: &Vec<Vec<f64>>| {
                Matrix::from_rows(rows).map_err(|e| CliError::Config(format!("bad matrix: {e}")))
            };
            let map = PwlMap::new(mat(al)?, mat(ar)?, Vector::new(b.clone()), Vector::new(c.clone()))?;
            return Ok((map, None));
        }
        let base = self.preset.map(BcnfParams::preset);
        let o = self.overrides();
        let pick = |i: usize, from_preset: Option<f64>| {
            o[i].or(from_preset).ok_or_else(|| {
                CliError::Config("no preset given, so all six normal-form parameters are required".into())
            })
        };
        let b = base.map(|p| p.as_array());
        let get = |i| pick(i, b.map(|a| a[i]));
        let params = BcnfParams {
            tau_l: get(0)?,
            sigma_l: get(1)?,
            delta_l: get(2)?,
            tau_r: get(3)?,
            sigma_r: get(4)?,
            delta_r: get(5)?,
        };
        if !params.is_finite() {
            return Err(CliError::Config("normal-form parameters must be finite".into()));
        }
        Ok((params.build(), Some(params)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub vertices: Option<usize>,
    pub radius: Option<Radius>,
    pub horizon: Option<usize>,
    pub branch: Option<Branch>,
}

impl SeedConfig {
    fn apply(&mut self, other: &SeedConfig) {
        if other.vertices.is_some() {
            self.vertices = other.vertices;
        }
        if other.radius.is_some() {
            self.radius = other.radius;
        }
        if other.horizon.is_some() {
            self.horizon = other.horizon;
        }
        if other.branch.is_some() {
            self.branch = other.branch;
        }
    }

    pub fn resolve(&self) -> SeedSpec {
        let d = SeedSpec::default();
        SeedSpec {
            vertices: self.vertices.unwrap_or(d.vertices),
            radius: self.radius.unwrap_or(d.radius),
            horizon: self.horizon.unwrap_or(d.horizon),
            branch: self.branch.unwrap_or(d.branch),
        }
    }
}

/// One side of an intersection query: grown in-run or read from an archive.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldQuery {
    pub word: Option<String>,
    pub direction: Option<Direction>,
    pub steps: Option<usize>,
    pub seed: SeedConfig,
    pub archive: Option<PathBuf>,
}

impl std::str::FromStr for ManifoldQuery {
    type Err = String;
    /// `WORD:DIRECTION:STEPS`, e.g. `LLR:unstable:6`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [word, direction, steps] = parts[..] else {
            return Err(format!("expected WORD:DIRECTION:STEPS, got {s:?}"));
        };
        word.parse::<Word>().map_err(|e| e.to_string())?;
        Ok(ManifoldQuery {
            word: Some(word.to_string()),
            direction: Some(direction.parse()?),
            steps: Some(steps.parse().map_err(|_| format!("bad step count {steps:?}"))?),
            ..ManifoldQuery::default()
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub x0: Option<Vec<f64>>,
    /// Start next to this cycle's base point on the right branch of its
    /// unstable direction instead of at `x0`.
    pub near: Option<String>,
    pub offset: Option<f64>,
    pub transient: Option<usize>,
    pub keep: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectConfig {
    pub first: Option<ManifoldQuery>,
    pub second: Option<ManifoldQuery>,
    pub tolerance: Option<f64>,
}

/// Settings shared by all commands. Every field is optional; defaults are
/// filled in when a command runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapConfig,
    pub word: Option<String>,
    pub direction: Option<Direction>,
    pub steps: Option<usize>,
    pub seed: SeedConfig,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub bailout: Option<f64>,
    pub max_polytopes: Option<usize>,
    /// Stream generations without storing them and report only counts and
    /// the first escape step.
    pub probe: Option<bool>,
    /// Include wall-clock runtime in the manifest (breaks byte-identity).
    pub record_runtime: Option<bool>,
    pub simulate: SimulateConfig,
    pub intersect: IntersectConfig,
}

pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_FORMATS: [Format; 2] = [Format::Obj, Format::Json];
pub const DEFAULT_TRANSIENT: usize = 1000;
pub const DEFAULT_KEEP: usize = 10_000;
pub const DEFAULT_X0: [f64; 3] = [0.1, 0.0, 0.0];
pub const DEFAULT_OFFSET: f64 = 1e-3;

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn word(&self) -> Result<Word, CliError> {
        let w = self.word.as_deref().ok_or_else(|| CliError::Config("a word is required".into()))?;
        w.parse::<Word>().map_err(|e| CliError::Config(e.to_string()))
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn grow_options(&self) -> Result<GrowOptions, CliError> {
        let d = GrowOptions::default();
        let bailout = self.bailout.unwrap_or(d.bailout);
        if !(bailout > 0.0) {
            return Err(CliError::Config(format!("bail-out bound must be positive, got {bailout}")));
        }
        Ok(GrowOptions {
            bailout,
            max_polytopes: self.max_polytopes.unwrap_or(d.max_polytopes),
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

fn write_file<F>(dir: &Path, name: &str, files: &mut Vec<String>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), ExportError>,
{
    let path = dir.join(name);
    let mut w = create(&path)?;
    f(&mut w).map_err(|e| match e {
        ExportError::Io(source) => CliError::Io {
            path: path.clone(),
            source,
        },
        other => CliError::Export(other),
    })?;
    finish(&path, w)?;
    files.push(name.to_string());
    Ok(())
}

fn write_geometry(
    dir: &Path,
    formats: &[Format],
    generations: &[Generation],
    archive: impl FnOnce() -> Archive,
    files: &mut Vec<String>,
) -> Result<(), CliError> {
    let mut archive = Some(archive);
    for format in [Format::Obj, Format::Ply, Format::Json, Format::Csv] {
        if !formats.contains(&format) {
            continue;
        }
        match format {
            Format::Obj => write_file(dir, "manifold.obj", files, |w| export::write_obj(w, generations))?,
            Format::Ply => write_file(dir, "manifold.ply", files, |w| export::write_ply(w, generations))?,
            Format::Csv => write_file(dir, "vertices.csv", files, |w| export::write_vertex_csv(w, generations))?,
            Format::Json => {
                let a = (archive.take().expect("json written once"))();
                write_file(dir, "manifold.json", files, |w| a.write(w))?
            }
        }
    }
    Ok(())
}

/// What a `compute` run produced.
#[derive(Debug, Clone)]
pub struct ComputeReport {
    pub manifest: Manifest,
    pub out: PathBuf,
    pub runtime_seconds: f64,
}

/// Finds the cycle, builds and checks a seed, grows the manifold, and
/// writes the manifest and geometry files into the output directory.
///
/// In probe mode only the manifest is written. When the probe escapes, the
/// manifest is still written and a divergence error is returned.
pub fn run_compute(config: &RunConfig) -> Result<ComputeReport, CliError> {
    let start = Instant::now();
    let (map, params) = config.map.resolve()?;
    let word = config.word()?;
    let direction = config.direction.unwrap_or(Direction::Unstable);
    let steps = config.steps.unwrap_or(0);
    let spec = config.seed.resolve();
    let options = config.grow_options()?;
    let formats = config.formats.clone().unwrap_or_else(|| DEFAULT_FORMATS.to_vec());
    let out = config.out_dir();

    let cycle = map.find_cycle(&word)?;
    let seed = manifold::build_seed(&map, &cycle, &spec, direction)?;
    let seed_record = SeedRecord {
        vertices: seed.polytope.vertex_count(),
        radius: seed.radius,
        horizon: spec.horizon,
        branch: spec.branch,
    };
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let mut files = Vec::new();

    let mut escaped = None;
    let mut manifest = if config.probe.unwrap_or(false) {
        let probe = manifold::probe_divergence(&map, &seed.polytope, steps, direction, &options)?;
        let mut m = Manifest::new(MapRecord::new(&map, params), &cycle, direction, seed_record, probe.counts);
        if let (Some(step), Some(norm)) = (probe.escaped_at, probe.escape_norm) {
            escaped = Some((step, norm));
        }
        m.probe = Some(ProbeRecord {
            escaped_at: probe.escaped_at,
            escape_norm: probe.escape_norm,
            max_norm: probe.max_norm,
        });
        m
    } else {
        let result = manifold::grow(&map, &cycle, &seed, steps, direction, &options)?;
        write_geometry(&out, &formats, &result.generations, || Archive::from_result(&result), &mut files)?;
        Manifest::new(MapRecord::new(&map, params), &cycle, direction, seed_record, result.counts())
    };
    let runtime_seconds = start.elapsed().as_secs_f64();
    if config.record_runtime.unwrap_or(false) {
        manifest.runtime_seconds = Some(runtime_seconds);
    }
    manifest.files = files;
    manifest.files.insert(0, "manifest.json".to_string());
    let mut sink = Vec::new();
    write_file(&out, "manifest.json", &mut sink, |w| manifest.write(w))?;
    if let Some((step, norm)) = escaped {
        return Err(ManifoldError::Divergence { step, norm }.into());
    }
    Ok(ComputeReport {
        manifest,
        out,
        runtime_seconds,
    })
}

/// Summary of one side of an intersection query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSummary {
    pub word: Word,
    pub direction: Direction,
    pub manifold_dim: usize,
    pub counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archive: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectReport {
    pub first: ManifoldSummary,
    pub second: ManifoldSummary,
    pub tolerance: f64,
    pub points: usize,
    pub segments: usize,
    pub intersections: Vec<Intersection>,
}

fn load_manifold(
    config: &RunConfig,
    query: &ManifoldQuery,
    map: &Option<(PwlMap, Option<BcnfParams>)>,
    options: &GrowOptions,
) -> Result<(ManifoldSummary, Vec<Generation>), CliError> {
    if let Some(path) = &query.archive {
        let file = File::open(path).map_err(io_err(path))?;
        let a = Archive::read(io::BufReader::new(file))?;
        let summary = ManifoldSummary {
            word: a.word.clone(),
            direction: a.direction,
            manifold_dim: a.manifold_dim,
            counts: a.generations.iter().map(|g| g.polytopes.len()).collect(),
            archive: Some(path.clone()),
        };
        return Ok((summary, a.generations));
    }
    let Some((map, _)) = map else {
        return Err(CliError::Config("a map is required to grow manifolds in-run".into()));
    };
    let word: Word = query
        .word
        .as_deref()
        .ok_or_else(|| CliError::Config("each intersection side needs a word or an archive".into()))?
        .parse()
        .map_err(|e: MapError| CliError::Config(e.to_string()))?;
    let direction = query.direction.unwrap_or(Direction::Unstable);
    let steps = query.steps.or(config.steps).unwrap_or(0);
    let mut seed_cfg = config.seed.clone();
    seed_cfg.apply(&query.seed);
    let cycle = map.find_cycle(&word)?;
    let seed = manifold::build_seed(map, &cycle, &seed_cfg.resolve(), direction)?;
    let result = manifold::grow(map, &cycle, &seed, steps, direction, options)?;
    let summary = ManifoldSummary {
        word,
        direction,
        manifold_dim: result.dim(),
        counts: result.counts(),
        archive: None,
    };
    Ok((summary, result.generations))
}

/// Intersects two manifolds and writes `intersections.json`.
pub fn run_intersect(config: &RunConfig) -> Result<IntersectReport, CliError> {
    let needs_map = [&config.intersect.first, &config.intersect.second]
        .iter()
        .any(|q| q.as_ref().is_some_and(|q| q.archive.is_none()));
    let map = if needs_map { Some(config.map.resolve()?) } else { None };
    let options = config.grow_options()?;
    let tolerance = config.intersect.tolerance.unwrap_or(intersect::DEFAULT_TOL);
    let (Some(q1), Some(q2)) = (&config.intersect.first, &config.intersect.second) else {
        return Err(CliError::Config("intersect needs a first and a second manifold".into()));
    };
    let (first, g1) = load_manifold(config, q1, &map, &options)?;
    let (second, g2) = load_manifold(config, q2, &map, &options)?;
    let intersections = intersect::intersect_unions(&g1, &g2, tolerance)?;
    let segments = intersections.iter().filter(|i| i.length() > 0.0).count();
    let report = IntersectReport {
        first,
        second,
        tolerance,
        points: intersections.len() - segments,
        segments,
        intersections,
    };
    let out = config.out_dir();
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let mut files = Vec::new();
    write_file(&out, "intersections.json", &mut files, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateReport {
    pub x0: Vector,
    pub kept: usize,
    pub max_norm: f64,
    pub path: PathBuf,
}

/// Iterates the map and writes the kept points to `orbit.csv`. A diverging
/// orbit still writes the points kept before the escape.
pub fn run_simulate(config: &RunConfig) -> Result<SimulateReport, CliError> {
    let (map, _) = config.map.resolve()?;
    let sim = &config.simulate;
    let options = config.grow_options()?;
    let x0 = match &sim.near {
        Some(word) => {
            if sim.x0.is_some() {
                return Err(CliError::Config("give either x0 or near, not both".into()));
            }
            let word: Word = word.parse().map_err(|e: MapError| CliError::Config(e.to_string()))?;
            let cycle = map.find_cycle(&word)?;
            let u = cycle.unstable_axes.column(0);
            let s = if map.normal().dot(&u) < 0.0 { -1.0 } else { 1.0 };
            cycle.base_point() + &u.scale(s * sim.offset.unwrap_or(DEFAULT_OFFSET))
        }
        None => Vector::new(sim.x0.clone().unwrap_or_else(|| DEFAULT_X0.to_vec())),
    };
    if x0.dim() != map.dim() {
        return Err(CliError::Config(format!(
            "initial point has {} entries, map dimension is {}",
            x0.dim(),
            map.dim()
        )));
    }
    let transient = sim.transient.unwrap_or(DEFAULT_TRANSIENT);
    let keep = sim.keep.unwrap_or(DEFAULT_KEEP);
    let orbit = bcnf::simulate(&map, &x0, transient, keep, options.bailout);
    let out = config.out_dir();
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let mut files = Vec::new();
    write_file(&out, "orbit.csv", &mut files, |w| {
        export::write_orbit_csv(w, map.dim(), transient + 1, &orbit.points)
    })?;
    if let Some(step) = orbit.diverged_at {
        return Err(CliError::OrbitDiverged {
            step,
            bailout: options.bailout,
        });
    }
    Ok(SimulateReport {
        max_norm: orbit.points.iter().map(Vector::norm).fold(0.0, f64::max),
        kept: orbit.points.len(),
        x0,
        path: out.join("orbit.csv"),
    })
}

/// The presets as a table of published values.
pub fn presets_table() -> String {
    let mut s = String::from("preset  tau_L         sigma_L  delta_L  tau_R  sigma_R  delta_R\n");
    for p in Preset::ALL {
        let d = p.decimals();
        s.push_str(&format!(
            "{:<7} {:<13} {:<8} {:<8} {:<6} {:<8} {}\n",
            p.to_string(),
            d[0],
            d[1],
            d[2],
            d[3],
            d[4],
            d[5]
        ));
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "pwlman", version, about = "Invariant manifolds of piecewise-linear maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Grow a stable or unstable manifold and export it.
    Compute(ComputeArgs),
    /// Intersect two manifolds grown in-run or read from archives.
    Intersect(IntersectArgs),
    /// Iterate the map from one initial condition.
    Simulate(SimulateArgs),
    /// Print the built-in parameter presets.
    Presets,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_r: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Norm above which growth or iteration is reported as divergent.
    #[arg(long)]
    pub bailout: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SeedArgs {
    /// Number of seed polygon vertices.
    #[arg(long)]
    pub vertices: Option<usize>,
    /// Seed radius: "auto" or a positive number.
    #[arg(long)]
    pub radius: Option<Radius>,
    /// Number of backward steps checked for admissibility.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Branch of a one-dimensional manifold: both, left or right.
    #[arg(long)]
    pub branch: Option<Branch>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Symbolic itinerary of the cycle, e.g. R or LLR.
    #[arg(long)]
    pub word: Option<String>,
    #[arg(long)]
    pub direction: Option<Direction>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Geometry formats to write.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    #[arg(long)]
    pub max_polytopes: Option<usize>,
    /// Keep only the newest generation and report counts and escape step.
    #[arg(long)]
    pub probe: bool,
    /// Record wall-clock runtime in the manifest.
    #[arg(long)]
    pub record_runtime: bool,
}

#[derive(Debug, Args)]
pub struct IntersectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// First manifold as WORD:DIRECTION:STEPS.
    #[arg(long)]
    pub first: Option<ManifoldQuery>,
    /// Second manifold as WORD:DIRECTION:STEPS.
    #[arg(long)]
    pub second: Option<ManifoldQuery>,
    /// Read the first manifold from a JSON archive.
    #[arg(long, conflicts_with = "first")]
    pub first_archive: Option<PathBuf>,
    /// Read the second manifold from a JSON archive.
    #[arg(long, conflicts_with = "second")]
    pub second_archive: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_polytopes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial point as comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
    /// Start next to this cycle on the right branch of its unstable direction.
    #[arg(long, conflicts_with = "x0")]
    pub near: Option<String>,
    /// Distance from the cycle point when using --near.
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long)]
    pub keep: Option<usize>,
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = MapConfig {
            preset: self.preset,
            tau_l: self.tau_l,
            sigma_l: self.sigma_l,
            delta_l: self.delta_l,
            tau_r: self.tau_r,
            sigma_r: self.sigma_r,
            delta_r: self.delta_r,
            ..MapConfig::default()
        };
        c.map.apply(&flags);
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.bailout.is_some() {
            c.bailout = self.bailout;
        }
        Ok(c)
    }
}

impl SeedArgs {
    fn seed(&self) -> SeedConfig {
        SeedConfig {
            vertices: self.vertices,
            radius: self.radius,
            horizon: self.horizon,
            branch: self.branch,
        }
    }
}

impl ComputeArgs {
    pub fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = self.common.config()?;
        c.seed.apply(&self.seed.seed());
        if self.word.is_some() {
            c.word = self.word.clone();
        }
        if self.direction.is_some() {
            c.direction = self.direction;
        }
        if self.steps.is_some() {
            c.steps = self.steps;
        }
        if self.formats.is_some() {
            c.formats = self.formats.clone();
        }
        if self.max_polytopes.is_some() {
            c.max_polytopes = self.max_polytopes;
        }
        if self.probe {
            c.probe = Some(true);
        }
        if self.record_runtime {
            c.record_runtime = Some(true);
        }
        Ok(c)
    }
}

impl IntersectArgs {
    pub fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = self.common.config()?;
        c.seed.apply(&self.seed.seed());
        if self.first.is_some() {
            c.intersect.first = self.first.clone();
        }
        if self.second.is_some() {
            c.intersect.second = self.second.clone();
        }
        if let Some(p) = &self.first_archive {
            c.intersect.first = Some(ManifoldQuery {
                archive: Some(p.clone()),
                ..ManifoldQuery::default()
            });
        }
        if let Some(p) = &self.second_archive {
            c.intersect.second = Some(ManifoldQuery {
                archive: Some(p.clone()),
                ..ManifoldQuery::default()
            });
        }
        if self.tolerance.is_some() {
            c.intersect.tolerance = self.tolerance;
        }
        if self.max_polytopes.is_some() {
            c.max_polytopes = self.max_polytopes;
        }
        Ok(c)
    }
}

impl SimulateArgs {
    pub fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = self.common.config()?;
        let s = &mut c.simulate;
        if self.x0.is_some() {
            s.x0 = self.x0.clone();
            s.near = None;
        }
        if self.near.is_some() {
            s.near = self.near.clone();
            s.x0 = None;
        }
        if self.offset.is_some() {
            s.offset = self.offset;
        }
        if self.transient.is_some() {
            s.transient = self.transient;
        }
        if self.keep.is_some() {
            s.keep = self.keep;
        }
        Ok(c)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool set up earlier in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(command: &Command) -> Result<String, CliError> {
    configure_threads()?;
    Ok(match command {
        Command::Compute(args) => {
            let r = run_compute(&args.config()?)?;
            let m = &r.manifest;
            let last = m.counts.last().copied().unwrap_or(0);
            let mut s = format!(
                "cycle {} ({} direction): unstable index {}, seed radius {}\n",
                m.word,
                m.direction,
                m.unstable_index,
                export::fmt_f64(m.seed.radius)
            );
            s.push_str(&format!("generation {}: {} polytopes (total {})\n", m.steps, last, m.total_polytopes));
            if let Some(p) = &m.probe {
                s.push_str(&format!("bounded through step {}, max norm {}\n", m.steps, export::fmt_f64(p.max_norm)));
            }
            s.push_str(&format!("wrote {} in {:.3} s\n", r.out.display(), r.runtime_seconds));
            s
        }
        Command::Intersect(args) => {
            let r = run_intersect(&args.config()?)?;
            let longest = r.intersections.iter().map(Intersection::length).fold(0.0, f64::max);
            format!(
                "{} points, {} segments (longest {})\n",
                r.points,
                r.segments,
                export::fmt_f64(longest)
            )
        }
        Command::Simulate(args) => {
            let r = run_simulate(&args.config()?)?;
            format!("kept {} points, max norm {}, wrote {}\n", r.kept, export::fmt_f64(r.max_norm), r.path.display())
        }
        Command::Presets => presets_table(),
    })
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
