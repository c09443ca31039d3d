//! Growing stable and unstable manifolds one generation at a time.
//!
//! A seed polytope `U` is placed in the unstable (or stable) plane of a cycle
//! point `y` and checked for admissibility: every vertex must have an
//! infinite backward orbit that follows the cycle's word in reverse. Each
//! generation is then obtained from the previous one by splitting every
//! polytope that crosses the switching hyperplane and mapping all vertices.
//! Stable manifolds are grown the same way under `f^{-1}`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Side, Vector};
use crate::polytope::{Crossing, Hyperplane, Polytope, PolytopeError};
use crate::pwlmap::{CycleData, MapError, PiecewiseAffine, PwlMap, Symbol};

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_BAILOUT: f64 = 1e6;
pub const DEFAULT_MAX_POLYTOPES: usize = 4_000_000;
/// First radius tried by [`Radius::Auto`]; halved until admissible.
pub const AUTO_RADIUS_START: f64 = 1.0;
pub const MIN_RADIUS: f64 = 1e-8;
/// Largest distance of a seed vertex from the invariant plane, relative to
/// `1 + ‖v‖`.
pub const PLANE_TOL: f64 = 1e-9;

/// Generation counts at or above this are processed on the rayon pool.
const PARALLEL_THRESHOLD: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("{side:?} manifold has dimension {dim}; only 1 and 2 are supported")]
    UnsupportedDimension { side: Side, dim: usize },
    #[error("invalid seed specification: {0}")]
    InvalidSeed(String),
    #[error("seed vertex lies {distance:e} away from the invariant plane")]
    NotOnInvariantPlane { distance: f64 },
    #[error("no admissible seed radius found (last tried {radius:e})")]
    AdmissibilityFailure { radius: f64 },
    #[error("vertex norm {norm:e} exceeded the bail-out bound at step {step}")]
    Divergence { step: usize, norm: f64 },
    #[error("generation {step} would hold {count} polytopes, over the budget")]
    BudgetExceeded { step: usize, count: usize },
    #[error("generations {first}..={last} requested but only 0..={available} exist")]
    OutOfRange {
        first: usize,
        last: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Unstable,
    Stable,
}

impl Direction {
    pub fn side(self) -> Side {
        match self {
            Direction::Unstable => Side::Unstable,
            Direction::Stable => Side::Stable,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Unstable => "unstable",
            Direction::Stable => "stable",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "unstable" => Ok(Direction::Unstable),
            "stable" => Ok(Direction::Stable),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// Seed radius: written as `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for Radius {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Radius::Auto);
        }
        let r = s
            .parse::<f64>()
            .map_err(|_| format!("radius must be \"auto\" or a positive number, got {s:?}"))?;
        Radius::fixed(r)
    }
}

impl Radius {
    pub fn fixed(r: f64) -> Result<Self, String> {
        if r > 0.0 && r.is_finite() {
            Ok(Radius::Fixed(r))
        } else {
            Err(format!("radius must be positive, got {r}"))
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Radius::Auto => s.serialize_str("auto"),
            Radius::Fixed(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(r) => Radius::fixed(r),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// For one-dimensional manifolds: grow both branches, or only the half
/// pointing into `c·x < 0` (`Left`) or `c·x > 0` (`Right`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Both,
    Left,
    Right,
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(Branch::Both),
            "left" => Ok(Branch::Left),
            "right" => Ok(Branch::Right),
            other => Err(format!("unknown branch {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub vertices: usize,
    pub radius: Radius,
    pub horizon: usize,
    pub branch: Branch,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            vertices: 4,
            radius: Radius::Auto,
            horizon: DEFAULT_HORIZON,
            branch: Branch::Both,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Seed {
    pub polytope: Polytope,
    pub radius: f64,
}

/// Outcome of checking the admissibility condition on a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Passed,
    /// Vertex `vertex` broke the itinerary at step `step` (1-based).
    Failed { vertex: usize, step: usize },
}

impl Admissibility {
    pub fn passed(self) -> bool {
        self == Admissibility::Passed
    }
}

/// Iterates of a seed vertex that follow the cycle's itinerary: preimages
/// for [`Direction::Unstable`], forward images for [`Direction::Stable`].
///
/// Every `p` steps the iterate is regenerated from plane coordinates, where
/// the restricted map is applied exactly; in between, single steps use the
/// piece prescribed by the word and the symbol of each iterate is checked.
/// Returns `x_1, ..., x_horizon`, or the first failing step.
pub fn itinerary_sequence(
    map: &PwlMap,
    cycle: &CycleData,
    v: &Vector,
    horizon: usize,
    direction: Direction,
) -> Result<Vec<Vector>, usize> {
    let side = direction.side();
    let p = cycle.period();
    let word = &cycle.word;
    let mut k = cycle.coordinates(side, v);
    let mut out = Vec::with_capacity(horizon);
    let mut i = 0;
    while i < horizon {
        let mut x = cycle.point_from(side, &k);
        for j in 0..p {
            if i >= horizon {
                break;
            }
            i += 1;
            x = match direction {
                Direction::Unstable => {
                    let required = word.at(-(i as i64));
                    map.admissible_preimage_step(&x, required).map_err(|_| i)?
                }
                Direction::Stable => {
                    let required = word.at((i - 1) as i64);
                    if map.symbol(&x) != required {
                        return Err(i);
                    }
                    map.piece(required).mul_vec(&x).add_offset(map.offset())
                }
            };
            if j + 1 == p {
                k = match direction {
                    Direction::Unstable => cycle.restricted_inverse_step(&k),
                    Direction::Stable => cycle.stable_restricted.mul_vec(&k),
                };
                x = cycle.point_from(side, &k);
            }
            out.push(x.clone());
        }
    }
    Ok(out)
}

trait AddOffset {
    fn add_offset(self, b: &Vector) -> Vector;
}

impl AddOffset for Vector {
    fn add_offset(self, b: &Vector) -> Vector {
        &self + b
    }
}

/// Checks the admissibility condition for every vertex of `seed` up to
/// `horizon` steps.
pub fn check_admissibility(
    map: &PwlMap,
    cycle: &CycleData,
    seed: &Polytope,
    horizon: usize,
    direction: Direction,
) -> Result<Admissibility, ManifoldError> {
    let side = direction.side();
    for (idx, v) in seed.vertices().enumerate() {
        let v = Vector::from(v);
        let distance = cycle.plane_distance(side, &v);
        if distance > PLANE_TOL * (1.0 + v.norm()) {
            return Err(ManifoldError::NotOnInvariantPlane { distance });
        }
        if let Err(step) = itinerary_sequence(map, cycle, &v, horizon, direction) {
            return Ok(Admissibility::Failed { vertex: idx, step });
        }
    }
    Ok(Admissibility::Passed)
}

/// The polytope `y + r (cos θ_j u_1 + sin θ_j u_2)`, `θ_j = 2πj/K`, or for a
/// one-dimensional plane the segment `y ± r u_1` (or one half of it).
pub fn seed_polytope(
    map: &PwlMap,
    cycle: &CycleData,
    spec: &SeedSpec,
    direction: Direction,
    radius: f64,
) -> Result<Polytope, ManifoldError> {
    let side = direction.side();
    let axes = cycle.axes(side);
    let y = cycle.base_point();
    match axes.cols() {
        1 => {
            let u = axes.column(0);
            let (a, b) = match spec.branch {
                Branch::Both => (y - &u.scale(radius), y + &u.scale(radius)),
                Branch::Left | Branch::Right => {
                    let toward = map.normal().dot(&u);
                    let mut s = if toward < 0.0 { -1.0 } else { 1.0 };
                    if spec.branch == Branch::Left {
                        s = -s;
                    }
                    (y.clone(), y + &u.scale(s * radius))
                }
            };
            Ok(Polytope::segment(&a, &b)?)
        }
        2 => {
            if spec.branch != Branch::Both {
                return Err(ManifoldError::InvalidSeed(
                    "branch selection applies only to one-dimensional manifolds".into(),
                ));
            }
            if spec.vertices < 3 {
                return Err(ManifoldError::InvalidSeed(format!(
                    "a polygonal seed needs at least 3 vertices, got {}",
                    spec.vertices
                )));
            }
            let (u1, u2) = (axes.column(0), axes.column(1));
            let k = spec.vertices;
            let verts: Vec<Vector> = (0..k)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / k as f64;
                    &(y + &u1.scale(radius * th.cos())) + &u2.scale(radius * th.sin())
                })
                .collect();
            Ok(Polytope::polygon(&verts)?)
        }
        dim => Err(ManifoldError::UnsupportedDimension { side, dim }),
    }
}

/// Builds an admissible seed, shrinking the radius geometrically from
/// [`AUTO_RADIUS_START`] when the radius is automatic.
pub fn build_seed(
    map: &PwlMap,
    cycle: &CycleData,
    spec: &SeedSpec,
    direction: Direction,
) -> Result<Seed, ManifoldError> {
    let dim = cycle.axes(direction.side()).cols();
    if !(1..=2).contains(&dim) {
        return Err(ManifoldError::UnsupportedDimension {
            side: direction.side(),
            dim,
        });
    }
    let (mut radius, fixed) = match spec.radius {
        Radius::Fixed(r) if r > 0.0 && r.is_finite() => (r, true),
        Radius::Fixed(r) => {
            return Err(ManifoldError::InvalidSeed(format!("radius must be positive, got {r}")))
        }
        Radius::Auto => (AUTO_RADIUS_START, false),
    };
    loop {
        let polytope = seed_polytope(map, cycle, spec, direction, radius)?;
        if check_admissibility(map, cycle, &polytope, spec.horizon, direction)?.passed() {
            return Ok(Seed { polytope, radius });
        }
        if fixed || radius * 0.5 < MIN_RADIUS {
            return Err(ManifoldError::AdmissibilityFailure { radius });
        }
        radius *= 0.5;
    }
}

/// One `Q^(i)`: the images of the previous generation's pieces. Members may
/// cross the switching hyperplane; they are split when the next generation
/// is formed (see [`Generation::pieces`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub index: usize,
    pub polytopes: Vec<Polytope>,
}

impl Generation {
    /// The same point set as a union of polytopes none of which crosses `h`.
    pub fn pieces(&self, h: &Hyperplane) -> Vec<Polytope> {
        self.polytopes.iter().flat_map(|p| p.split_pruned(h)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldResult {
    pub cycle: CycleData,
    pub direction: Direction,
    pub seed: Polytope,
    pub seed_radius: f64,
    pub generations: Vec<Generation>,
    /// Hyperplane along which generations are split under the map used for
    /// growth (`f` or `f^{-1}`).
    pub switching: Hyperplane,
}

impl ManifoldResult {
    pub fn dim(&self) -> usize {
        self.seed.dim()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.generations.iter().map(|g| g.polytopes.len()).collect()
    }

    pub fn last(&self) -> &Generation {
        self.generations.last().expect("at least the seed generation")
    }

    /// `Z^(r) = Q^(r) ∪ Q^(r+1) ∪ ... ∪ Q^(r+p-1)`.
    pub fn assemble_z(&self, r: usize) -> Result<Vec<&Polytope>, ManifoldError> {
        let p = self.cycle.period();
        let last = r + p - 1;
        let available = self.generations.len() - 1;
        if last > available {
            return Err(ManifoldError::OutOfRange {
                first: r,
                last,
                available,
            });
        }
        Ok(self.generations[r..=last]
            .iter()
            .flat_map(|g| g.polytopes.iter())
            .collect())
    }

    /// Uniform points of generation `generation`, drawn from polytopes picked
    /// with probability proportional to their measure. Returns the index of
    /// the chosen polytope with each point.
    pub fn sample_points(&self, generation: usize, count: usize, seed: u64) -> Vec<(usize, Vector)> {
        let polys = &self.generations[generation].polytopes;
        let weights: Vec<f64> = polys.iter().map(|p| p.measure()).collect();
        let total: f64 = weights.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut t = rng.gen::<f64>() * total;
                let mut idx = polys.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if t < *w {
                        idx = i;
                        break;
                    }
                    t -= w;
                }
                let u = [rng.gen(), rng.gen(), rng.gen()];
                (idx, polys[idx].sample(u))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowOptions {
    pub bailout: f64,
    pub max_polytopes: usize,
}

impl Default for GrowOptions {
    fn default() -> Self {
        GrowOptions {
            bailout: DEFAULT_BAILOUT,
            max_polytopes: DEFAULT_MAX_POLYTOPES,
        }
    }
}

/// The map used to push generations forward for a given direction.
pub fn growth_system(map: &PwlMap, direction: Direction) -> Result<PiecewiseAffine, ManifoldError> {
    Ok(match direction {
        Direction::Unstable => map.forward_system(),
        Direction::Stable => map.inverse_system()?,
    })
}

fn advance_one(system: &PiecewiseAffine, p: &Polytope) -> Vec<Polytope> {
    let h = system.switching();
    let pieces = match p.crossing(h) {
        Crossing::Crosses => p.split_pruned(h),
        _ => vec![p.clone()],
    };
    pieces
        .iter()
        .map(|piece| piece.map_vertices(|x, out| system.apply_into(x, out)))
        .collect()
}

/// One growth step: split every crossing polytope, then map all vertices.
/// Output order follows input order.
pub fn advance(system: &PiecewiseAffine, polytopes: &[Polytope]) -> Vec<Polytope> {
    if polytopes.len() >= PARALLEL_THRESHOLD {
        polytopes
            .par_iter()
            .map(|p| advance_one(system, p))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    } else {
        polytopes.iter().flat_map(|p| advance_one(system, p)).collect()
    }
}

/// Grows `steps` generations from `seed`, keeping every generation.
pub fn grow(
    map: &PwlMap,
    cycle: &CycleData,
    seed: &Seed,
    steps: usize,
    direction: Direction,
    options: &GrowOptions,
) -> Result<ManifoldResult, ManifoldError> {
    let system = growth_system(map, direction)?;
    let mut generations = vec![Generation {
        index: 0,
        polytopes: vec![seed.polytope.clone()],
    }];
    for step in 1..=steps {
        let prev = &generations[step - 1].polytopes;
        check_budget(&system, prev, step, options.max_polytopes)?;
        let next = advance(&system, prev);
        let norm = next.iter().map(|p| p.max_vertex_norm()).fold(0.0, f64::max);
        if !(norm <= options.bailout) {
            return Err(ManifoldError::Divergence { step, norm });
        }
        generations.push(Generation {
            index: step,
            polytopes: next,
        });
    }
    Ok(ManifoldResult {
        cycle: cycle.clone(),
        direction,
        seed: seed.polytope.clone(),
        seed_radius: seed.radius,
        generations,
        switching: system.switching().clone(),
    })
}

/// Outcome of [`probe_divergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceProbe {
    /// First step at which some vertex norm exceeded the bail-out bound.
    pub escaped_at: Option<usize>,
    /// Largest vertex norm at that step.
    pub escape_norm: Option<f64>,
    /// Largest vertex norm over all generations that stayed within the bound.
    pub max_norm: f64,
    /// Polytope count of every generation formed, starting with the seed.
    pub counts: Vec<usize>,
}

/// Runs the same iteration as [`grow`] but keeps only the newest
/// generation, so long horizons fit in memory. Stops at the first step whose
/// vertex norms exceed `bailout`.
pub fn probe_divergence(
    map: &PwlMap,
    seed: &Polytope,
    steps: usize,
    direction: Direction,
    options: &GrowOptions,
) -> Result<DivergenceProbe, ManifoldError> {
    let system = growth_system(map, direction)?;
    if seed.dim() == 1 {
        return probe_segments(&system, seed, steps, options);
    }
    let mut frontier = vec![seed.clone()];
    let mut max_norm = seed.max_vertex_norm();
    let mut counts = vec![1];
    for step in 1..=steps {
        check_budget(&system, &frontier, step, options.max_polytopes)?;
        frontier = advance(&system, &frontier);
        counts.push(frontier.len());
        let norm = frontier.iter().map(|p| p.max_vertex_norm()).fold(0.0, f64::max);
        if !(norm <= options.bailout) {
            return Ok(DivergenceProbe {
                escaped_at: Some(step),
                escape_norm: Some(norm),
                max_norm,
                counts,
            });
        }
        max_norm = max_norm.max(norm);
    }
    Ok(DivergenceProbe {
        escaped_at: None,
        escape_norm: None,
        max_norm,
        counts,
    })
}

/// [`probe_divergence`] for segments, with each generation stored as one
/// flat coordinate array. Splitting and pruning follow
/// [`Polytope::split_pruned`] exactly.
fn probe_segments(
    system: &PiecewiseAffine,
    seed: &Polytope,
    steps: usize,
    options: &GrowOptions,
) -> Result<DivergenceProbe, ManifoldError> {
    let n = seed.ambient_dim();
    let mut frontier = seed.coords().to_vec();
    let mut next = Vec::new();
    let mut max_norm = seed.max_vertex_norm();
    let mut counts = vec![1];
    for step in 1..=steps {
        let norm = advance_segments(system, n, &frontier, &mut next);
        std::mem::swap(&mut frontier, &mut next);
        let count = frontier.len() / (2 * n);
        if count > options.max_polytopes {
            return Err(ManifoldError::BudgetExceeded { step, count });
        }
        counts.push(count);
        if !(norm <= options.bailout) {
            return Ok(DivergenceProbe {
                escaped_at: Some(step),
                escape_norm: Some(norm),
                max_norm,
                counts,
            });
        }
        max_norm = max_norm.max(norm);
    }
    Ok(DivergenceProbe {
        escaped_at: None,
        escape_norm: None,
        max_norm,
        counts,
    })
}

/// Splits and maps every segment of `frontier` into `out`, returning the
/// largest image vertex norm.
fn advance_segments(system: &PiecewiseAffine, n: usize, frontier: &[f64], out: &mut Vec<f64>) -> f64 {
    let h = system.switching();
    let tol = crate::pwlmap::SIGMA_TOL;
    let (normal_len, offset) = (h.normal().norm(), h.offset().abs());
    out.clear();
    out.reserve(frontier.len() + frontier.len() / 4);
    let mut q = vec![0.0; n];
    let mut img = vec![0.0; n];
    let mut max_sq: f64 = 0.0;
    let mut emit = |right: bool, x: &[f64], out: &mut Vec<f64>| {
        system.apply_piece_into(right, x, &mut img);
        max_sq = max_sq.max(img.iter().map(|v| v * v).sum());
        out.extend_from_slice(&img);
    };
    let classify = |x: &[f64]| -> (f64, Symbol) {
        let v = h.value(x);
        let band = tol * (normal_len * (1.0 + crate::linalg::norm(x)) + offset);
        let s = if v < -band {
            Symbol::L
        } else if v > band {
            Symbol::R
        } else {
            Symbol::OnSigma
        };
        (v, s)
    };
    for seg in frontier.chunks_exact(2 * n) {
        let (a, b) = seg.split_at(n);
        let ((ha, sa), (hb, sb)) = (classify(a), classify(b));
        if !matches!((sa, sb), (Symbol::L, Symbol::R) | (Symbol::R, Symbol::L)) {
            emit(ha > 0.0, a, out);
            emit(hb > 0.0, b, out);
            continue;
        }
        let t = ha / (ha - hb);
        for i in 0..n {
            q[i] = a[i] + t * (b[i] - a[i]);
        }
        let hq = h.value(&q) > 0.0;
        let parent = crate::linalg::distance(a, b);
        let (left, right) = if sa == Symbol::L {
            ((a, ha > 0.0, &q[..], hq), (&q[..], hq, b, hb > 0.0))
        } else {
            ((&q[..], hq, b, hb > 0.0), (a, ha > 0.0, &q[..], hq))
        };
        for (u, su, v, sv) in [left, right] {
            if u != v && crate::linalg::distance(u, v) >= crate::polytope::SLIVER_TOL * parent {
                emit(su, u, out);
                emit(sv, v, out);
            }
        }
    }
    max_sq.sqrt()
}

fn check_budget(
    system: &PiecewiseAffine,
    prev: &[Polytope],
    step: usize,
    max_polytopes: usize,
) -> Result<(), ManifoldError> {
    if prev.len().saturating_mul(2) > max_polytopes {
        let h = system.switching();
        let count = prev.len() + prev.iter().filter(|p| p.crossing(h) == Crossing::Crosses).count();
        if count > max_polytopes {
            return Err(ManifoldError::BudgetExceeded { step, count });
        }
    }
    Ok(())
}

/// Symbol the growth map assigns to a point (side of its switching plane).
pub fn growth_symbol(system: &PiecewiseAffine, x: &Vector) -> Symbol {
    system.switching().symbol(x.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcnf::{BcnfParams, Preset};
    use crate::linalg::Matrix;
    use crate::polytope::Location;
    use crate::pwlmap::Word;

    fn setup(preset: Preset, word: &str) -> (PwlMap, CycleData) {
        let map = BcnfParams::preset(preset).build();
        let cycle = map.find_cycle(&word.parse::<Word>().unwrap()).unwrap();
        (map, cycle)
    }

    #[test]
    fn seed_on_unit_circle() {
        // identity-like cycle data is awkward to fake; check the geometry on set A
        let (map, cycle) = setup(Preset::A, "R");
        let spec = SeedSpec::default();
        let u = seed_polytope(&map, &cycle, &spec, Direction::Unstable, 1.0).unwrap();
        let y = cycle.base_point();
        let axes = &cycle.unstable_axes;
        let expected = [
            &axes.column(0) + y,
            &axes.column(1) + y,
            y - &axes.column(0),
            y - &axes.column(1),
        ];
        for (got, want) in u.vertices().zip(&expected) {
            assert!(Vector::from(got).distance(want) < 1e-15);
        }
        assert_eq!(u.contains(y.as_slice(), 1e-9), Location::Interior);
    }

    #[test]
    fn huge_fixed_radius_is_rejected() {
        let (map, cycle) = setup(Preset::A, "R");
        let spec = SeedSpec {
            radius: Radius::Fixed(1e6),
            ..SeedSpec::default()
        };
        assert!(matches!(
            build_seed(&map, &cycle, &spec, Direction::Unstable),
            Err(ManifoldError::AdmissibilityFailure { .. })
        ));
    }

    #[test]
    fn scaled_seed_fails_early() {
        let (map, cycle) = setup(Preset::A, "R");
        let spec = SeedSpec::default();
        let seed = build_seed(&map, &cycle, &spec, Direction::Unstable).unwrap();
        assert!(check_admissibility(&map, &cycle, &seed.polytope, 1000, Direction::Unstable)
            .unwrap()
            .passed());
        let big = seed_polytope(&map, &cycle, &spec, Direction::Unstable, seed.radius * 1e4).unwrap();
        match check_admissibility(&map, &cycle, &big, 1000, Direction::Unstable).unwrap() {
            Admissibility::Failed { step, .. } => assert!(step <= 10, "failed late at {step}"),
            Admissibility::Passed => panic!("oversized seed passed"),
        }
    }

    #[test]
    fn cycle_point_is_always_admissible() {
        let (map, cycle) = setup(Preset::C, "LLR");
        let y = cycle.base_point().clone();
        let seq = itinerary_sequence(&map, &cycle, &y, 300, Direction::Unstable).unwrap();
        assert_eq!(seq.len(), 300);
        let seq = itinerary_sequence(&map, &cycle, &y, 300, Direction::Stable).unwrap();
        assert_eq!(seq.len(), 300);
    }

    #[test]
    fn off_plane_vertex_is_an_error() {
        let (map, cycle) = setup(Preset::A, "R");
        let y = cycle.base_point();
        let off = y + &cycle.stable_basis.column(0).scale(0.1);
        let seg = Polytope::segment(y, &off).unwrap();
        assert!(matches!(
            check_admissibility(&map, &cycle, &seg, 10, Direction::Unstable),
            Err(ManifoldError::NotOnInvariantPlane { .. })
        ));
    }

    #[test]
    fn zero_steps_keep_only_seed() {
        let (map, cycle) = setup(Preset::A, "R");
        let seed = build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable).unwrap();
        let r = grow(&map, &cycle, &seed, 0, Direction::Unstable, &GrowOptions::default()).unwrap();
        assert_eq!(r.counts(), vec![1]);
        assert_eq!(r.generations[0].polytopes[0], seed.polytope);
    }

    #[test]
    fn assemble_z_concatenates_period() {
        let (map, cycle) = setup(Preset::C, "LLR");
        let seed = build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable).unwrap();
        let r = grow(&map, &cycle, &seed, 6, Direction::Unstable, &GrowOptions::default()).unwrap();
        let counts = r.counts();
        let z = r.assemble_z(2).unwrap();
        assert_eq!(z.len(), counts[2] + counts[3] + counts[4]);
        assert!(matches!(r.assemble_z(5), Err(ManifoldError::OutOfRange { .. })));
        // one branch piece near each cycle point
        let z0 = r.assemble_z(0).unwrap();
        for pt in &cycle.points {
            assert!(z0.iter().any(|p| p.distance_to(pt.as_slice()) < 1e-9));
        }
    }

    #[test]
    fn stable_growth_needs_invertible_map() {
        let map = BcnfParams {
            delta_l: -0.3,
            ..BcnfParams::preset(Preset::A)
        }
        .build();
        let cycle = map.find_cycle(&"R".parse().unwrap()).unwrap();
        let seg = Polytope::segment(cycle.base_point(), &(cycle.base_point() + &cycle.stable_axes.column(0).scale(1e-3))).unwrap();
        let seed = Seed { polytope: seg, radius: 1e-3 };
        assert!(matches!(
            grow(&map, &cycle, &seed, 2, Direction::Stable, &GrowOptions::default()),
            Err(ManifoldError::Map(MapError::NotInvertible { .. }))
        ));
    }

    #[test]
    fn parallel_and_serial_advance_agree() {
        let (map, cycle) = setup(Preset::A, "R");
        let seed = build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable).unwrap();
        let r = grow(&map, &cycle, &seed, 11, Direction::Unstable, &GrowOptions::default()).unwrap();
        let system = map.forward_system();
        let prev = &r.generations[11].polytopes;
        assert!(prev.len() >= PARALLEL_THRESHOLD);
        let serial: Vec<Polytope> = prev.iter().flat_map(|p| advance_one(&system, p)).collect();
        assert_eq!(serial, advance(&system, prev));
    }

    #[test]
    fn budget_is_enforced() {
        let (map, cycle) = setup(Preset::A, "R");
        let seed = build_seed(&map, &cycle, &SeedSpec::default(), Direction::Unstable).unwrap();
        let opts = GrowOptions {
            max_polytopes: 10,
            ..GrowOptions::default()
        };
        assert!(matches!(
            grow(&map, &cycle, &seed, 12, Direction::Unstable, &opts),
            Err(ManifoldError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn probe_agrees_with_grow_on_escape_step() {
        let map = BcnfParams {
            tau_l: 1.51,
            ..BcnfParams::preset(Preset::B)
        }
        .build();
        let cycle = map.find_cycle(&"L".parse().unwrap()).unwrap();
        let spec = SeedSpec {
            branch: Branch::Right,
            ..SeedSpec::default()
        };
        let seed = build_seed(&map, &cycle, &spec, Direction::Unstable).unwrap();
        // small bail-out so full growth stays cheap
        let opts = GrowOptions {
            bailout: 50.0,
            ..GrowOptions::default()
        };
        let probe = probe_divergence(&map, &seed.polytope, 80, Direction::Unstable, &opts).unwrap();
        match grow(&map, &cycle, &seed, 80, Direction::Unstable, &opts) {
            Err(ManifoldError::Divergence { step, .. }) => {
                assert_eq!(probe.escaped_at, Some(step));
                assert_eq!(probe.counts.len(), step + 1);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn segment_probe_matches_grow_counts() {
        let (map, cycle) = setup(Preset::B, "L");
        for branch in [Branch::Both, Branch::Right] {
            let spec = SeedSpec {
                branch,
                ..SeedSpec::default()
            };
            let seed = build_seed(&map, &cycle, &spec, Direction::Unstable).unwrap();
            let opts = GrowOptions::default();
            let r = grow(&map, &cycle, &seed, 30, Direction::Unstable, &opts);
            let probe = probe_divergence(&map, &seed.polytope, 30, Direction::Unstable, &opts).unwrap();
            match r {
                Ok(r) => {
                    assert_eq!(probe.escaped_at, None);
                    assert_eq!(probe.counts, r.counts());
                    let top = r
                        .generations
                        .iter()
                        .flat_map(|g| g.polytopes.iter())
                        .map(|p| p.max_vertex_norm())
                        .fold(0.0, f64::max);
                    assert_eq!(probe.max_norm, top);
                }
                Err(ManifoldError::Divergence { step, .. }) => assert_eq!(probe.escaped_at, Some(step)),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn stable_seed_uses_stable_axes() {
        let (map, cycle) = setup(Preset::B, "L");
        let seed = build_seed(&map, &cycle, &SeedSpec::default(), Direction::Stable).unwrap();
        assert_eq!(seed.polytope.dim(), 2);
        for v in seed.polytope.vertices() {
            assert!(cycle.plane_distance(Side::Stable, &Vector::from(v)) < 1e-12);
        }
        let r = grow(&map, &cycle, &seed, 4, Direction::Stable, &GrowOptions::default()).unwrap();
        // every generation maps back onto the previous one under f
        let g = &r.generations[3];
        let prev = &r.generations[2].polytopes;
        for p in &g.polytopes {
            for v in p.vertices() {
                let fx = map.evaluate(&Vector::from(v));
                let tol = 1e-9 * (1.0 + fx.norm());
                assert!(prev.iter().any(|q| q.contains(fx.as_slice(), tol) != Location::Outside));
            }
        }
        let _ = Matrix::identity(1);
    }
}
