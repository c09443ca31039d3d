//! Stable and unstable manifolds of continuous piecewise-linear maps.
//!
//! A map `f(x) = A_L x + b` for `c·x <= 0` and `A_R x + b` for `c·x >= 0`
//! sends convex polytopes to convex polytopes on each side of the switching
//! hyperplane `c·x = 0`. Compact pieces of a manifold of a hyperbolic
//! periodic solution are therefore unions of convex polytopes, and they can
//! be grown exactly by splitting at the hyperplane and mapping vertices.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: small dense matrices, solves, eigenpairs, invariant bases.
//! * [`pwlmap`]: the map, symbolic words, periodic solutions.
//! * [`polytope`]: segments and polygons, splitting, containment, and
//!   three-dimensional intersection queries.
//! * [`manifold`]: seeds, admissibility, generation-by-generation growth.
//! * [`bcnf`]: the three-dimensional border-collision normal form and presets.
//! * [`intersect`]: meetings between two manifolds in `R^3`.
//! * [`export`] and [`cli`]: geometry files, manifests, and the command runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bcnf;
pub mod cli;
pub mod export;
pub mod intersect;
pub mod linalg;
pub mod manifold;
pub mod polytope;
pub mod pwlmap;

pub use bcnf::{BcnfParams, Preset};
pub use linalg::{EigenPair, LinalgError, Matrix, Side, Vector};
pub use manifold::{
    Branch, Direction, GrowOptions, Generation, ManifoldError, ManifoldResult, Radius, Seed, SeedSpec,
};
pub use polytope::{Crossing, Hyperplane, Location, Polytope};
pub use pwlmap::{CycleData, MapError, PwlMap, Symbol, Word};
