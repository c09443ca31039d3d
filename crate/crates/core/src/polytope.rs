//! Convex segments and polygons embedded in `R^n`.
//!
//! A polytope is the convex hull of its vertex list. Polygons keep their
//! vertices in cyclic order, which is all the structure needed to split one
//! along a hyperplane: walk the boundary once and insert the two edge
//! crossings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix, Vector};
use crate::pwlmap::{Symbol, SIGMA_TOL};

/// Pieces smaller than this fraction of their parent are dropped after a split.
pub const SLIVER_TOL: f64 = 1e-14;
/// Coplanarity tolerance, relative to the polygon diameter.
pub const COPLANAR_TOL: f64 = 1e-9;
/// Sine of the turning angle below which a vertex is treated as lying on the
/// segment joining its neighbours.
const COLLINEAR_SIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error("invalid polytope: {0}")]
    Invalid(&'static str),
    #[error("image under the affine map has lower dimension")]
    DegenerateImage,
    #[error("polytope does not cross the hyperplane")]
    NotCrossing,
    #[error("operation requires ambient dimension 3, found {0}")]
    AmbientDimension(usize),
}

/// The affine hyperplane `normal·x = offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    #[serde(skip)]
    normal_len: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Self {
        let normal_len = normal.norm();
        Hyperplane {
            normal,
            offset,
            normal_len,
        }
    }

    pub fn through_origin(normal: Vector) -> Self {
        Self::new(normal, 0.0)
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `normal·x - offset`.
    pub fn value(&self, x: &[f64]) -> f64 {
        linalg::dot(self.normal.as_slice(), x) - self.offset
    }

    /// Half-width of the band treated as lying on the hyperplane at `x`.
    pub fn tolerance(&self, x: &[f64]) -> f64 {
        SIGMA_TOL * (self.normal_len * (1.0 + linalg::norm(x)) + self.offset.abs())
    }

    pub fn symbol(&self, x: &[f64]) -> Symbol {
        let v = self.value(x);
        let tol = self.tolerance(x);
        if v < -tol {
            Symbol::L
        } else if v > tol {
            Symbol::R
        } else {
            Symbol::OnSigma
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    AllLeft,
    AllRight,
    Crosses,
    Touches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary,
    Outside,
}

/// A segment (`dim == 1`) or polygon (`dim == 2`) in `R^ambient`, stored as
/// a flat vertex array.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    ambient: usize,
    coords: Vec<f64>,
}

impl Polytope {
    pub fn segment(a: &Vector, b: &Vector) -> Result<Self, PolytopeError> {
        if a.dim() != b.dim() || a.dim() == 0 {
            return Err(PolytopeError::Invalid("segment endpoints differ in dimension"));
        }
        if a == b {
            return Err(PolytopeError::Invalid("segment endpoints coincide"));
        }
        let mut coords = a.as_slice().to_vec();
        coords.extend_from_slice(b.as_slice());
        Ok(Polytope {
            dim: 1,
            ambient: a.dim(),
            coords,
        })
    }

    /// A polygon from cyclically ordered vertices. Checks coplanarity,
    /// consistent orientation and that no three consecutive vertices are
    /// collinear.
    pub fn polygon(vertices: &[Vector]) -> Result<Self, PolytopeError> {
        if vertices.len() < 3 {
            return Err(PolytopeError::Invalid("polygon needs at least three vertices"));
        }
        let ambient = vertices[0].dim();
        if ambient < 2 || vertices.iter().any(|v| v.dim() != ambient) {
            return Err(PolytopeError::Invalid("polygon vertices differ in dimension"));
        }
        let coords = vertices.iter().flat_map(|v| v.as_slice().iter().copied()).collect();
        let p = Polytope {
            dim: 2,
            ambient,
            coords,
        };
        p.validate_polygon()?;
        Ok(p)
    }

    pub(crate) fn from_raw(dim: usize, ambient: usize, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len() % ambient, 0);
        Polytope {
            dim,
            ambient,
            coords,
        }
    }

    fn validate_polygon(&self) -> Result<(), PolytopeError> {
        let k = self.vertex_count();
        let frame = PlaneFrame::of(self).ok_or(PolytopeError::Invalid("polygon is degenerate"))?;
        let diam = self.diameter();
        for v in self.vertices() {
            if frame.plane_distance(v) > COPLANAR_TOL * diam {
                return Err(PolytopeError::Invalid("polygon vertices are not coplanar"));
            }
        }
        let pts: Vec<[f64; 2]> = self.vertices().map(|v| frame.chart(v)).collect();
        let mut sign = 0.0;
        for i in 0..k {
            let a = pts[(i + k - 1) % k];
            let b = pts[i];
            let c = pts[(i + 1) % k];
            let e1 = [b[0] - a[0], b[1] - a[1]];
            let e2 = [c[0] - b[0], c[1] - b[1]];
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            let scale = (e1[0].hypot(e1[1])) * (e2[0].hypot(e2[1]));
            if cross.abs() <= COLLINEAR_SIN * scale || scale == 0.0 {
                return Err(PolytopeError::Invalid("three consecutive vertices are collinear"));
            }
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return Err(PolytopeError::Invalid("polygon is not convex in the given order"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.ambient
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.ambient)
    }

    pub fn vertex_vectors(&self) -> Vec<Vector> {
        self.vertices().map(Vector::from).collect()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn centroid(&self) -> Vector {
        let k = self.vertex_count() as f64;
        let mut c = vec![0.0; self.ambient];
        for v in self.vertices() {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / k;
            }
        }
        Vector::new(c)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices().enumerate() {
            for b in self.vertices().skip(i + 1) {
                d = d.max(linalg::distance(a, b));
            }
        }
        d
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices().map(linalg::norm).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box as `(min, max)` corner arrays.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.ambient];
        let mut hi = vec![f64::NEG_INFINITY; self.ambient];
        for v in self.vertices() {
            for i in 0..self.ambient {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Length of a segment, area of a polygon.
    pub fn measure(&self) -> f64 {
        match self.dim {
            1 => linalg::distance(self.vertex(0), self.vertex(1)),
            _ => self.fan_areas().iter().sum(),
        }
    }

    /// Areas of the triangles `(v0, v_i, v_{i+1})`.
    fn fan_areas(&self) -> Vec<f64> {
        let v0 = self.vertex(0);
        (1..self.vertex_count() - 1)
            .map(|i| triangle_area(v0, self.vertex(i), self.vertex(i + 1)))
            .collect()
    }

    pub fn crossing(&self, h: &Hyperplane) -> Crossing {
        let (mut neg, mut pos, mut on) = (false, false, false);
        for v in self.vertices() {
            match h.symbol(v) {
                Symbol::L => neg = true,
                Symbol::R => pos = true,
                Symbol::OnSigma => on = true,
            }
        }
        match (neg, pos, on) {
            (true, true, _) => Crossing::Crosses,
            (_, _, true) => Crossing::Touches,
            (true, false, false) => Crossing::AllLeft,
            _ => Crossing::AllRight,
        }
    }

    /// Splits along `h` into the part with `h <= 0` and the part with `h >= 0`.
    /// Vertices on the hyperplane go to both pieces.
    pub fn split(&self, h: &Hyperplane) -> Result<(Polytope, Polytope), PolytopeError> {
        if self.crossing(h) != Crossing::Crosses {
            return Err(PolytopeError::NotCrossing);
        }
        let n = self.ambient;
        let k = self.vertex_count();
        let syms: Vec<(Symbol, f64)> = self.vertices().map(|v| (h.symbol(v), h.value(v))).collect();
        let mut left = Vec::with_capacity((k + 2) * n);
        let mut right = Vec::with_capacity((k + 2) * n);
        let edges = if self.dim == 1 { 1 } else { k };
        for i in 0..k {
            let v = self.vertex(i);
            let (si, hi) = syms[i];
            match si {
                Symbol::L => left.extend_from_slice(v),
                Symbol::R => right.extend_from_slice(v),
                Symbol::OnSigma => {
                    left.extend_from_slice(v);
                    right.extend_from_slice(v);
                }
            }
            if i >= edges {
                continue;
            }
            let j = (i + 1) % k;
            let (sj, hj) = syms[j];
            if matches!((si, sj), (Symbol::L, Symbol::R) | (Symbol::R, Symbol::L)) {
                let w = self.vertex(j);
                let t = hi / (hi - hj);
                let q: Vec<f64> = v.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect();
                left.extend_from_slice(&q);
                right.extend_from_slice(&q);
            }
        }
        if self.dim == 1 {
            // keep each piece ordered from the original first vertex
            let (l, r) = (Polytope::from_raw(1, n, left), Polytope::from_raw(1, n, right));
            return Ok((l, r));
        }
        let mut l = Polytope::from_raw(2, n, left);
        let mut r = Polytope::from_raw(2, n, right);
        l.prune_collinear();
        r.prune_collinear();
        Ok((l, r))
    }

    /// Splits if crossing and drops pieces whose measure is below
    /// [`SLIVER_TOL`] of the parent, or which have collapsed.
    pub fn split_pruned(&self, h: &Hyperplane) -> Vec<Polytope> {
        match self.split(h) {
            Ok((l, r)) => {
                let parent = self.measure();
                [l, r]
                    .into_iter()
                    .filter(|p| p.is_nondegenerate() && p.measure() >= SLIVER_TOL * parent)
                    .collect()
            }
            Err(_) => vec![self.clone()],
        }
    }

    fn is_nondegenerate(&self) -> bool {
        match self.dim {
            1 => self.vertex_count() == 2 && self.vertex(0) != self.vertex(1),
            _ => self.vertex_count() >= 3,
        }
    }

    /// Image under `x -> a x + b`.
    pub fn affine_image(&self, a: &Matrix, b: &Vector) -> Result<Polytope, PolytopeError> {
        let img = self.map_vertices(|x, out| {
            a.mul_slice_into(x, out);
            for (o, bi) in out.iter_mut().zip(b.as_slice()) {
                *o += bi;
            }
        });
        let ok = match img.dim {
            1 => img.vertex(0) != img.vertex(1),
            _ => {
                img.vertex_count() >= 3 && {
                    let d = img.diameter();
                    img.measure() > 1e-12 * d * d
                }
            }
        };
        if ok {
            Ok(img)
        } else {
            Err(PolytopeError::DegenerateImage)
        }
    }

    /// Applies `f` to every vertex; for polygons, vertices that become
    /// collinear with their neighbours are removed.
    pub(crate) fn map_vertices<F>(&self, f: F) -> Polytope
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let n = self.ambient;
        let mut coords = vec![0.0; self.coords.len()];
        for (v, out) in self.coords.chunks_exact(n).zip(coords.chunks_exact_mut(n)) {
            f(v, out);
        }
        let mut p = Polytope::from_raw(self.dim, n, coords);
        if p.dim == 2 {
            p.prune_collinear();
        }
        p
    }

    fn prune_collinear(&mut self) {
        let n = self.ambient;
        loop {
            let k = self.vertex_count();
            if k <= 3 {
                return;
            }
            let diam_tol = 1e-15 * self.diameter();
            let mut drop = None;
            for i in 0..k {
                let a = self.vertex((i + k - 1) % k);
                let b = self.vertex(i);
                let c = self.vertex((i + 1) % k);
                let e1: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
                let e2: Vec<f64> = c.iter().zip(b).map(|(x, y)| x - y).collect();
                let l1 = linalg::norm(&e1);
                let l2 = linalg::norm(&e2);
                if l1 <= diam_tol || l2 <= diam_tol {
                    drop = Some(i);
                    break;
                }
                let d = linalg::dot(&e1, &e2);
                let sin2 = (l1 * l1 * l2 * l2 - d * d).max(0.0);
                if d > 0.0 && sin2.sqrt() <= COLLINEAR_SIN * l1 * l2 {
                    drop = Some(i);
                    break;
                }
            }
            match drop {
                Some(i) => {
                    self.coords.drain(i * n..(i + 1) * n);
                }
                None => return,
            }
        }
    }

    /// Relative-interior classification of `x`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Location {
        if self.dim == 1 {
            return segment_location(self.vertex(0), self.vertex(1), x, tol);
        }
        let Some(frame) = PlaneFrame::of(self) else {
            return Location::Outside;
        };
        if frame.plane_distance(x) > tol {
            return Location::Outside;
        }
        let q = frame.chart(x);
        let pts: Vec<[f64; 2]> = self.vertices().map(|v| frame.chart(v)).collect();
        let orient = signed_area(&pts).signum();
        let k = pts.len();
        let mut boundary = false;
        for i in 0..k {
            let d = orient * edge_distance(pts[i], pts[(i + 1) % k], q);
            if d < -tol {
                return Location::Outside;
            }
            if d <= tol {
                boundary = true;
            }
        }
        if boundary {
            Location::Boundary
        } else {
            Location::Interior
        }
    }

    /// Euclidean distance from `x` to the polytope.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            return point_segment_distance(self.vertex(0), self.vertex(1), x);
        }
        let Some(frame) = PlaneFrame::of(self) else {
            return f64::INFINITY;
        };
        let h = frame.plane_distance(x);
        let q = frame.chart(x);
        let pts: Vec<[f64; 2]> = self.vertices().map(|v| frame.chart(v)).collect();
        let orient = signed_area(&pts).signum();
        let k = pts.len();
        let inside = (0..k).all(|i| orient * edge_distance(pts[i], pts[(i + 1) % k], q) >= 0.0);
        if inside {
            return h;
        }
        let d = (0..k)
            .map(|i| point_segment_distance(&pts[i], &pts[(i + 1) % k], &q))
            .fold(f64::INFINITY, f64::min);
        (h * h + d * d).sqrt()
    }

    /// A point drawn uniformly from the polytope, given two uniforms in `[0, 1)`
    /// and a third for choosing a fan triangle.
    pub fn sample(&self, u: [f64; 3]) -> Vector {
        if self.dim == 1 {
            let (a, b) = (self.vertex(0), self.vertex(1));
            return Vector::new(a.iter().zip(b).map(|(x, y)| x + u[0] * (y - x)).collect());
        }
        let areas = self.fan_areas();
        let total: f64 = areas.iter().sum();
        let mut target = u[2] * total;
        let mut tri = areas.len() - 1;
        for (i, a) in areas.iter().enumerate() {
            if target < *a {
                tri = i;
                break;
            }
            target -= a;
        }
        let (a, b, c) = (self.vertex(0), self.vertex(tri + 1), self.vertex(tri + 2));
        let s = u[0].sqrt();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - u[1]), s * u[1]);
        Vector::new(
            (0..self.ambient)
                .map(|i| wa * a[i] + wb * b[i] + wc * c[i])
                .collect(),
        )
    }

    /// The same point set with the vertex list rotated by `shift`.
    pub fn rotated(&self, shift: usize) -> Polytope {
        let mut coords = self.coords.clone();
        let k = self.vertex_count();
        coords.rotate_left((shift % k) * self.ambient);
        Polytope::from_raw(self.dim, self.ambient, coords)
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.vertex_count()))?;
        for v in self.vertices() {
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let verts: Vec<Vector> = Vec::deserialize(d)?;
        let p = match verts.len() {
            2 => Polytope::segment(&verts[0], &verts[1]),
            _ => Polytope::polygon(&verts),
        };
        p.map_err(serde::de::Error::custom)
    }
}

/// Orthonormal two-dimensional chart on the plane of a polygon.
/// A union of polytopes with cached bounding boxes, for nearest-distance
/// queries.
#[derive(Debug, Clone)]
pub struct BoxedUnion<'a> {
    items: Vec<(&'a Polytope, Vec<f64>, Vec<f64>)>,
}

impl<'a> BoxedUnion<'a> {
    pub fn new<I: IntoIterator<Item = &'a Polytope>>(polys: I) -> Self {
        BoxedUnion {
            items: polys
                .into_iter()
                .map(|p| {
                    let (lo, hi) = p.bounds();
                    (p, lo, hi)
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Distance from `x` to the nearest member; infinite for an empty union.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (p, lo, hi) in &self.items {
            let gap2: f64 = x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| {
                    let g = (l - v).max(v - h).max(0.0);
                    g * g
                })
                .sum();
            if gap2 >= best * best {
                continue;
            }
            best = best.min(p.distance_to(x));
            if best == 0.0 {
                break;
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct PlaneFrame {
    pub origin: Vector,
    pub axes: [Vector; 2],
}

impl PlaneFrame {
    /// Chart for a polygon, anchored at its centroid. `None` if the vertices
    /// do not span a plane.
    pub fn of(p: &Polytope) -> Option<PlaneFrame> {
        let origin = p.centroid();
        let rel: Vec<Vector> = p.vertices().map(|v| &Vector::from(v) - &origin).collect();
        let first = rel.iter().max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
        let len = first.norm();
        if !(len > 0.0) {
            return None;
        }
        let e1 = first.scale(1.0 / len);
        let (e2, len2) = rel
            .iter()
            .map(|r| {
                let w = r - &e1.scale(e1.dot(r));
                let l = w.norm();
                (w, l)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if !(len2 > 1e-14 * len) {
            return None;
        }
        let mut e2 = e2.scale(1.0 / len2);
        // one more orthogonalisation pass
        e2 = &e2 - &e1.scale(e1.dot(&e2));
        let l = e2.norm();
        e2 = e2.scale(1.0 / l);
        Some(PlaneFrame {
            origin,
            axes: [e1, e2],
        })
    }

    pub fn chart(&self, x: &[f64]) -> [f64; 2] {
        let o = self.origin.as_slice();
        let mut u = 0.0;
        let mut v = 0.0;
        for i in 0..o.len() {
            let d = x[i] - o[i];
            u += d * self.axes[0][i];
            v += d * self.axes[1][i];
        }
        [u, v]
    }

    pub fn lift(&self, q: [f64; 2]) -> Vector {
        Vector::new(
            (0..self.origin.dim())
                .map(|i| self.origin[i] + q[0] * self.axes[0][i] + q[1] * self.axes[1][i])
                .collect(),
        )
    }

    pub fn plane_distance(&self, x: &[f64]) -> f64 {
        let q = self.chart(x);
        linalg::distance(self.lift(q).as_slice(), x)
    }
}

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let v: Vec<f64> = c.iter().zip(a).map(|(x, y)| x - y).collect();
    let uu = linalg::dot(&u, &u);
    let vv = linalg::dot(&v, &v);
    let uv = linalg::dot(&u, &v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let k = pts.len();
    0.5 * (0..k)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Signed distance of `q` from the line through `a, b`; positive on the left.
fn edge_distance(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len = e[0].hypot(e[1]);
    (e[0] * (q[1] - a[1]) - e[1] * (q[0] - a[0])) / len
}

fn point_segment_distance(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let e: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let w: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let ee = linalg::dot(&e, &e);
    let t = if ee > 0.0 {
        (linalg::dot(&w, &e) / ee).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let p: Vec<f64> = a.iter().zip(&e).map(|(ai, ei)| ai + t * ei).collect();
    linalg::distance(&p, x)
}

fn segment_location(a: &[f64], b: &[f64], x: &[f64], tol: f64) -> Location {
    let e: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let w: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let len = linalg::norm(&e);
    let s = linalg::dot(&w, &e) / len;
    let foot: Vec<f64> = a.iter().zip(&e).map(|(ai, ei)| ai + s / len * ei).collect();
    if linalg::distance(&foot, x) > tol || s < -tol || s > len + tol {
        Location::Outside
    } else if s <= tol || s >= len - tol {
        Location::Boundary
    } else {
        Location::Interior
    }
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit normal and a point of the plane of a polygon in `R^3`.
fn plane_of(p: &Polytope) -> Option<([f64; 3], Vector)> {
    let frame = PlaneFrame::of(p)?;
    let n = cross3(frame.axes[0].as_slice(), frame.axes[1].as_slice());
    Some((n, frame.origin))
}

fn require_3d(p: &Polytope) -> Result<(), PolytopeError> {
    if p.ambient_dim() == 3 {
        Ok(())
    } else {
        Err(PolytopeError::AmbientDimension(p.ambient_dim()))
    }
}

/// Point where a segment meets a polygon in `R^3`, if any. Segments nearly
/// parallel to the polygon's plane report nothing.
pub fn segment_polygon_intersection(
    s: &Polytope,
    p: &Polytope,
    tol: f64,
) -> Result<Option<Vector>, PolytopeError> {
    require_3d(s)?;
    require_3d(p)?;
    let Some((n, o)) = plane_of(p) else {
        return Ok(None);
    };
    let (a, b) = (s.vertex(0), s.vertex(1));
    let dir: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let len = linalg::norm(&dir);
    let denom = linalg::dot(&n, &dir);
    if len == 0.0 || (denom / len).abs() < tol {
        return Ok(None);
    }
    let t = (linalg::dot(&n, o.as_slice()) - linalg::dot(&n, a)) / denom;
    let slack = tol / len;
    if t < -slack || t > 1.0 + slack {
        return Ok(None);
    }
    let t = t.clamp(0.0, 1.0);
    let x: Vec<f64> = a.iter().zip(&dir).map(|(ai, di)| ai + t * di).collect();
    Ok(match p.contains(&x, tol) {
        Location::Outside => None,
        _ => Some(Vector::new(x)),
    })
}

/// Common segment of two polygons in `R^3` whose planes are not parallel.
pub fn polygon_polygon_intersection(
    p: &Polytope,
    q: &Polytope,
    tol: f64,
) -> Result<Option<Polytope>, PolytopeError> {
    require_3d(p)?;
    require_3d(q)?;
    let (Some((n1, o1)), Some((n2, o2))) = (plane_of(p), plane_of(q)) else {
        return Ok(None);
    };
    let d = cross3(&n1, &n2);
    let dl = linalg::norm(&d);
    if dl < tol {
        return Ok(None);
    }
    let d = [d[0] / dl, d[1] / dl, d[2] / dl];
    // point on both planes closest to o1: x = o1 + alpha n1 + beta n2
    let h1 = 0.0;
    let h2 = linalg::dot(&n2, o2.as_slice()) - linalg::dot(&n2, o1.as_slice());
    let c = linalg::dot(&n1, &n2);
    let det = 1.0 - c * c;
    let alpha = (h1 - h2 * c) / det;
    let beta = (h2 - h1 * c) / det;
    let base: Vec<f64> = (0..3)
        .map(|i| o1[i] + alpha * n1[i] + beta * n2[i])
        .collect();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for poly in [p, q] {
        let Some((l, h)) = clip_line(poly, &base, &d, tol) else {
            return Ok(None);
        };
        lo = lo.max(l);
        hi = hi.min(h);
    }
    if !(hi - lo > tol) {
        return Ok(None);
    }
    let a = Vector::new((0..3).map(|i| base[i] + lo * d[i]).collect());
    let b = Vector::new((0..3).map(|i| base[i] + hi * d[i]).collect());
    Ok(Polytope::segment(&a, &b).ok())
}

/// Parameter interval of the line `base + t d` inside the polygon's
/// in-plane extent, widened by `tol`.
fn clip_line(p: &Polytope, base: &[f64], d: &[f64; 3], tol: f64) -> Option<(f64, f64)> {
    let frame = PlaneFrame::of(p)?;
    let b = frame.chart(base);
    let tip: Vec<f64> = (0..3).map(|i| base[i] + d[i]).collect();
    let t = frame.chart(&tip);
    let dir = [t[0] - b[0], t[1] - b[1]];
    let pts: Vec<[f64; 2]> = p.vertices().map(|v| frame.chart(v)).collect();
    let orient = signed_area(&pts).signum();
    let k = pts.len();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..k {
        let (a, c) = (pts[i], pts[(i + 1) % k]);
        let e = [c[0] - a[0], c[1] - a[1]];
        let len = e[0].hypot(e[1]);
        // inside: orient * cross(e, x - a) / len >= -tol
        let f0 = orient * (e[0] * (b[1] - a[1]) - e[1] * (b[0] - a[0])) / len + tol;
        let f1 = orient * (e[0] * dir[1] - e[1] * dir[0]) / len;
        if f1 == 0.0 {
            if f0 < 0.0 {
                return None;
            }
        } else {
            let s = -f0 / f1;
            if f1 > 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Closest approach of two segments in `R^3`; returns the midpoint of the
/// closest pair when their distance is at most `tol`.
pub fn segment_segment_intersection(
    s: &Polytope,
    t: &Polytope,
    tol: f64,
) -> Result<Option<Vector>, PolytopeError> {
    require_3d(s)?;
    require_3d(t)?;
    let (p, q) = closest_points(s.vertex(0), s.vertex(1), t.vertex(0), t.vertex(1));
    Ok((linalg::distance(&p, &q) <= tol)
        .then(|| Vector::new((0..3).map(|i| 0.5 * (p[i] + q[i])).collect())))
}

/// Closest points between segments `[p0, p1]` and `[q0, q1]`.
fn closest_points(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d1: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = q1.iter().zip(q0).map(|(a, b)| a - b).collect();
    let r: Vec<f64> = p0.iter().zip(q0).map(|(a, b)| a - b).collect();
    let a = linalg::dot(&d1, &d1);
    let e = linalg::dot(&d2, &d2);
    let f = linalg::dot(&d2, &r);
    let c = linalg::dot(&d1, &r);
    let b = linalg::dot(&d1, &d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let p = p0.iter().zip(&d1).map(|(x, d)| x + s * d).collect();
    let q = q0.iter().zip(&d2).map(|(x, d)| x + t * d).collect();
    (p, q)
}
