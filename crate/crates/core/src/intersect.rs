//! Intersections between two manifolds represented as polytope unions.
//!
//! Every pair of polytopes whose bounding boxes overlap is tested with the
//! matching primitive from [`crate::polytope`]. Results carry the generation
//! and position of both participants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;
use crate::manifold::Generation;
use crate::polytope::{
    polygon_polygon_intersection, segment_polygon_intersection, segment_segment_intersection, Polytope,
    PolytopeError,
};

/// Default distance below which two segments are reported as meeting.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntersectError {
    #[error("cannot intersect a {first}-manifold with a {second}-manifold in R^{ambient}")]
    DimensionMismatch {
        first: usize,
        second: usize,
        ambient: usize,
    },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Position of a polytope within a manifold: generation index and slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeRef {
    pub generation: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Meeting {
    Point { point: Vector },
    Segment { from: Vector, to: Vector, length: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub first: PolytopeRef,
    pub second: PolytopeRef,
    #[serde(flatten)]
    pub meeting: Meeting,
}

impl Intersection {
    /// Length of a segment meeting, zero for points.
    pub fn length(&self) -> f64 {
        match &self.meeting {
            Meeting::Point { .. } => 0.0,
            Meeting::Segment { length, .. } => *length,
        }
    }
}

struct Entry<'a> {
    at: PolytopeRef,
    poly: &'a Polytope,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn entries(generations: &[Generation], pad: f64) -> Vec<Entry<'_>> {
    generations
        .iter()
        .flat_map(|g| {
            g.polytopes.iter().enumerate().map(move |(index, poly)| {
                let (mut lo, mut hi) = poly.bounds();
                lo.iter_mut().for_each(|x| *x -= pad);
                hi.iter_mut().for_each(|x| *x += pad);
                Entry {
                    at: PolytopeRef {
                        generation: g.index,
                        index,
                    },
                    poly,
                    lo,
                    hi,
                }
            })
        })
        .collect()
}

fn overlaps(a: &Entry, b: &Entry) -> bool {
    a.lo.iter().zip(&b.hi).all(|(l, h)| l <= h) && b.lo.iter().zip(&a.hi).all(|(l, h)| l <= h)
}

fn manifold_dims(generations: &[Generation]) -> Option<(usize, usize)> {
    generations
        .iter()
        .flat_map(|g| g.polytopes.first())
        .map(|p| (p.dim(), p.ambient_dim()))
        .next()
}

/// All meetings between the polytopes of `first` and those of `second`.
///
/// Supported dimension pairs in `R^3` are (1, 1), (1, 2), (2, 1) and (2, 2).
/// Points come from segment–segment and segment–polygon tests, segments
/// from polygon–polygon tests. `tol` is the closest-approach bound for two
/// segments and the edge tolerance otherwise. Output order follows `first`,
/// then `second`.
pub fn intersect_unions(
    first: &[Generation],
    second: &[Generation],
    tol: f64,
) -> Result<Vec<Intersection>, IntersectError> {
    let (Some((d1, n1)), Some((d2, n2))) = (manifold_dims(first), manifold_dims(second)) else {
        return Ok(Vec::new());
    };
    if n1 != 3 || n2 != 3 || !(1..=2).contains(&d1) || !(1..=2).contains(&d2) {
        return Err(IntersectError::DimensionMismatch {
            first: d1,
            second: d2,
            ambient: n1.max(n2),
        });
    }
    let a = entries(first, tol);
    let b = entries(second, tol);
    let found: Result<Vec<Vec<Intersection>>, PolytopeError> = a
        .par_iter()
        .map(|ea| {
            let mut out = Vec::new();
            for eb in b.iter().filter(|eb| overlaps(ea, eb)) {
                if let Some(meeting) = meet(ea.poly, eb.poly, tol)? {
                    out.push(Intersection {
                        first: ea.at,
                        second: eb.at,
                        meeting,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

fn meet(p: &Polytope, q: &Polytope, tol: f64) -> Result<Option<Meeting>, PolytopeError> {
    Ok(match (p.dim(), q.dim()) {
        (1, 1) => segment_segment_intersection(p, q, tol)?.map(|point| Meeting::Point { point }),
        (1, _) => segment_polygon_intersection(p, q, tol)?.map(|point| Meeting::Point { point }),
        (_, 1) => segment_polygon_intersection(q, p, tol)?.map(|point| Meeting::Point { point }),
        _ => polygon_polygon_intersection(p, q, tol)?.map(|s| {
            let (from, to) = (Vector::from(s.vertex(0)), Vector::from(s.vertex(1)));
            Meeting::Segment {
                length: from.distance(&to),
                from,
                to,
            }
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec())
    }

    fn square(z: f64, shift: f64) -> Polytope {
        Polytope::polygon(&[
            v(&[shift, 0.0, z]),
            v(&[shift + 1.0, 0.0, z]),
            v(&[shift + 1.0, 1.0, z]),
            v(&[shift, 1.0, z]),
        ])
        .unwrap()
    }

    fn gen(index: usize, polytopes: Vec<Polytope>) -> Vec<Generation> {
        vec![Generation { index, polytopes }]
    }

    #[test]
    fn hand_placed_polygons_meet_in_known_segment() {
        let flat = gen(0, vec![square(0.0, 0.0), square(0.0, 5.0)]);
        let wall = Polytope::polygon(&[
            v(&[0.25, 0.5, -1.0]),
            v(&[0.75, 0.5, -1.0]),
            v(&[0.75, 0.5, 1.0]),
            v(&[0.25, 0.5, 1.0]),
        ])
        .unwrap();
        let found = intersect_unions(&flat, &gen(4, vec![wall]), 1e-12).unwrap();
        assert_eq!(found.len(), 1);
        let hit = &found[0];
        assert_eq!(hit.first, PolytopeRef { generation: 0, index: 0 });
        assert_eq!(hit.second, PolytopeRef { generation: 4, index: 0 });
        match &hit.meeting {
            Meeting::Segment { from, to, length } => {
                assert!((length - 0.5).abs() < 1e-11);
                let ends = [from[0].min(to[0]), from[0].max(to[0])];
                assert!((ends[0] - 0.25).abs() < 1e-11 && (ends[1] - 0.75).abs() < 1e-11);
                assert!(from[1] == 0.5 && from[2].abs() < 1e-15);
            }
            other => panic!("expected a segment, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_boxes_give_nothing() {
        let a = gen(0, vec![square(0.0, 0.0)]);
        let b = gen(0, vec![square(0.0, 10.0), square(3.0, 0.0)]);
        assert!(intersect_unions(&a, &b, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn segment_through_polygon_either_order() {
        let s = Polytope::segment(&v(&[0.5, 0.5, -1.0]), &v(&[0.5, 0.5, 1.0])).unwrap();
        let a = gen(2, vec![s]);
        let b = gen(1, vec![square(0.0, 0.0)]);
        let one = intersect_unions(&a, &b, 1e-9).unwrap();
        let two = intersect_unions(&b, &a, 1e-9).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(two.len(), 1);
        assert_eq!(one[0].meeting, two[0].meeting);
        assert_eq!(one[0].length(), 0.0);
    }

    #[test]
    fn planar_ambient_is_rejected() {
        let s = Polytope::segment(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        let a = gen(0, vec![s]);
        assert!(matches!(
            intersect_unions(&a, &a, 1e-9),
            Err(IntersectError::DimensionMismatch { .. })
        ));
    }
}
