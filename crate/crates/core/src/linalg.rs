//! Small dense real linear algebra for dimensions up to about eight.
//!
//! Everything here is row-major `f64`. Eigenvalues come from a Hessenberg
//! reduction followed by the Francis double-shift QR iteration; eigenvectors
//! are recovered by inverse iteration in complex arithmetic.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative pivot threshold for [`solve`].
pub const PIVOT_TOL: f64 = 1e-12;
/// Width of the band around the unit circle treated as non-hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-8;

const QR_MAX_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("eigenvalue of modulus {modulus} lies within the hyperbolicity band of the unit circle")]
    NonHyperbolic { modulus: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Dense real column vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Dense real matrix, row-major.
///
/// Zero-column matrices are permitted so that an empty invariant subspace
/// has a representation.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        let mut out = vec![0.0; self.rows];
        self.mul_slice_into(x.as_slice(), &mut out);
        Vector(out)
    }

    /// `out = self * x` on raw slices; used on hot paths.
    pub(crate) fn mul_slice_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            if a[p * n + k] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        let n = self.rows;
        let cols: Result<Vec<Vector>, _> =
            (0..n).map(|j| solve(self, &Vector::unit(n, j))).collect();
        Ok(Matrix::from_columns(n, &cols?))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Mul<&Vector> for &Matrix {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        self.mul_vec(rhs)
    }
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve(m: &Matrix, rhs: &Vector) -> Result<Vector, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows,
            found: m.cols,
        });
    }
    let n = m.rows;
    if rhs.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: rhs.dim(),
        });
    }
    let threshold = PIVOT_TOL * m.norm();
    let mut a = m.data.clone();
    let mut b = rhs.0.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        let pivot = a[p * n + k];
        if !(pivot.abs() > threshold) {
            return Err(LinalgError::SingularMatrix);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * b[j]).sum();
        b[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(Vector(b))
}

/// An eigenvalue together with a unit eigenvector.
///
/// The vector is normalised so that its stacked real and imaginary parts
/// have unit Euclidean norm and its largest-modulus component is real and
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl EigenPair {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }

    pub fn real_part(&self) -> Vector {
        Vector(self.vector.iter().map(|z| z.re).collect())
    }

    pub fn imag_part(&self) -> Vector {
        Vector(self.vector.iter().map(|z| z.im).collect())
    }

    /// `‖M v − λ v‖` for the matrix `m`.
    pub fn residual(&self, m: &Matrix) -> f64 {
        let n = m.rows();
        (0..n)
            .map(|i| {
                let mv: Complex64 = (0..n).map(|j| self.vector[j] * m[(i, j)]).sum();
                (mv - self.value * self.vector[i]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Which side of the unit circle an invariant subspace is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Unstable,
    Stable,
}

impl Side {
    fn selects(self, modulus: f64) -> bool {
        match self {
            Side::Unstable => modulus > 1.0,
            Side::Stable => modulus < 1.0,
        }
    }
}

/// Eigenvalues of a square matrix, unsorted, as `(re, im)` pairs.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows,
            found: m.cols,
        });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows;
    // one-based working copy
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    reduce_to_hessenberg(&mut a, n);
    let (wr, wi) = hessenberg_qr(&mut a, n)?;
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Eigenpairs sorted by descending modulus; conjugate pairs are adjacent
/// with the positive imaginary part first.
pub fn eigenpairs(m: &Matrix) -> Result<Vec<EigenPair>, LinalgError> {
    let mut values = eigenvalues(m)?;
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.im.total_cmp(&a.im))
            .then(b.re.total_cmp(&a.re))
    });
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(values.len());
    for value in values {
        if value.im < 0.0 {
            if let Some(prev) = pairs.last() {
                if prev.value == value.conj() {
                    let vector = prev.vector.iter().map(|z| z.conj()).collect();
                    pairs.push(EigenPair { value, vector });
                    continue;
                }
            }
        }
        let vector = eigenvector(m, value)?;
        pairs.push(EigenPair { value, vector });
    }
    Ok(pairs)
}

/// Real basis (not orthonormalised) of the invariant subspace on one side of
/// the unit circle: `v` for a real eigenvalue, `Re v, Im v` for a complex
/// pair, in the order of [`eigenpairs`].
pub fn invariant_axes(m: &Matrix, side: Side) -> Result<Matrix, LinalgError> {
    let pairs = eigenpairs(m)?;
    let mut cols = Vec::new();
    for p in &pairs {
        let modulus = p.modulus();
        if (modulus - 1.0).abs() <= HYPERBOLIC_TOL {
            return Err(LinalgError::NonHyperbolic { modulus });
        }
        if !side.selects(modulus) {
            continue;
        }
        if p.is_real() {
            cols.push(p.real_part());
        } else if p.value.im > 0.0 {
            cols.push(p.real_part());
            cols.push(p.imag_part());
        }
    }
    Ok(Matrix::from_columns(m.rows(), &cols))
}

/// Orthonormal basis of the invariant subspace on one side of the unit
/// circle.
pub fn invariant_basis(m: &Matrix, side: Side) -> Result<Matrix, LinalgError> {
    let axes = invariant_axes(m, side)?;
    Ok(orthonormalize(&axes))
}

/// Modified Gram-Schmidt on the columns, run twice for stability.
pub fn orthonormalize(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut cols: Vec<Vector> = (0..m.cols()).map(|j| m.column(j)).collect();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for k in 0..j {
                let proj = cols[j].dot(&cols[k]);
                let q = cols[k].scale(proj);
                cols[j] = &cols[j] - &q;
            }
        }
        let len = cols[j].norm();
        cols[j] = cols[j].scale(1.0 / len);
    }
    Matrix::from_columns(n, &cols)
}

/// Inverse iteration for the eigenvector of `value` in complex arithmetic.
fn eigenvector(m: &Matrix, value: Complex64) -> Result<Vec<Complex64>, LinalgError> {
    let n = m.rows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let eps = 1e-14 * scale;
    let shift = value + Complex64::new(eps, 0.0);
    let mut lu: Vec<Complex64> = (0..n * n)
        .map(|k| Complex64::new(m.data[k], 0.0))
        .collect();
    for i in 0..n {
        lu[i * n + i] -= shift;
    }
    let perm = complex_lu(&mut lu, n, eps);
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.0))
        .collect();
    for _ in 0..4 {
        complex_lu_solve(&lu, &perm, n, &mut x);
        let len = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(len.is_finite() && len > 0.0) {
            return Err(LinalgError::ConvergenceFailure);
        }
        for z in x.iter_mut() {
            *z /= len;
        }
    }
    normalize_phase(&mut x);
    Ok(x)
}

/// Rotates the vector so its largest-modulus component is real and positive.
fn normalize_phase(x: &mut [Complex64]) {
    let mut best = 0;
    for (i, z) in x.iter().enumerate() {
        if z.norm() > x[best].norm() {
            best = i;
        }
    }
    let pivot = x[best];
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for z in x.iter_mut() {
        *z *= phase;
    }
    x[best] = Complex64::new(x[best].re, 0.0);
    if x.iter().all(|z| z.im.abs() <= 1e-15 * z.re.abs().max(1e-300)) {
        for z in x.iter_mut() {
            z.im = 0.0;
        }
    }
}

fn complex_lu(a: &mut [Complex64], n: usize, tiny: f64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap();
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        if a[k * n + k].norm() < tiny {
            a[k * n + k] = Complex64::new(tiny, 0.0);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            a[i * n + k] = f;
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    perm
}

fn complex_lu_solve(lu: &[Complex64], perm: &[usize], n: usize, x: &mut [Complex64]) {
    let mut y: Vec<Complex64> = perm.iter().map(|&p| x[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = lu[i * n + j] * y[j];
            y[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = lu[i * n + j] * y[j];
            y[i] -= t;
        }
        y[i] /= lu[i * n + i];
    }
    x.copy_from_slice(&y);
}

/// Reduction to upper Hessenberg form by stabilised elementary similarity
/// transformations. One-based indexing.
fn reduce_to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. One-based
/// indexing; returns real and imaginary parts of the eigenvalues.
#[allow(clippy::many_single_char_names, unused_assignments)]
fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == QR_MAX_ITERS {
                        return Err(LinalgError::ConvergenceFailure);
                    }
                    if its == 10 || its == 20 {
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((wr, wi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_a_right() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0, 0.0], [-3.0, 0.0, 1.0], [0.6, 0.0, 0.0]]).unwrap()
    }

    fn set_a_left() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.3, 0.0, 0.0]]).unwrap()
    }

    /// Real roots of a monic cubic by bisection on sign changes plus the
    /// deflated quadratic.
    fn cubic_roots(a2: f64, a1: f64, a0: f64) -> Vec<Complex64> {
        let p = |x: f64| ((x + a2) * x + a1) * x + a0;
        let bound = 1.0 + a2.abs().max(a1.abs()).max(a0.abs());
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(lo).signum() == p(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        // x^3 + a2 x^2 + a1 x + a0 = (x - r)(x^2 + b1 x + b0)
        let b1 = a2 + r;
        let b0 = a1 + r * b1;
        let disc = b1 * b1 - 4.0 * b0;
        let mut roots = vec![Complex64::new(r, 0.0)];
        if disc >= 0.0 {
            roots.push(Complex64::new((-b1 + disc.sqrt()) / 2.0, 0.0));
            roots.push(Complex64::new((-b1 - disc.sqrt()) / 2.0, 0.0));
        } else {
            roots.push(Complex64::new(-b1 / 2.0, (-disc).sqrt() / 2.0));
            roots.push(Complex64::new(-b1 / 2.0, -(-disc).sqrt() / 2.0));
        }
        roots
    }

    #[test]
    fn solve_identity() {
        let x = solve(&Matrix::identity(3), &Vector::new(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_fixed_point_system() {
        // hand elimination of (I - A_R) y = e1: y1 = 5/17, y2 = -12/17, y3 = 3/17
        let m = &Matrix::identity(3) - &set_a_right();
        let x = solve(&m, &Vector::unit(3, 0)).unwrap();
        let expected = [5.0 / 17.0, -12.0 / 17.0, 3.0 / 17.0];
        for (a, b) in x.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((x[0] - 0.29412).abs() < 1e-5);
    }

    #[test]
    fn solve_zero_matrix_is_singular() {
        let err = solve(&Matrix::zeros(3, 3), &Vector::unit(3, 1)).unwrap_err();
        assert_eq!(err, LinalgError::SingularMatrix);
    }

    #[test]
    fn diagonal_eigenvalues_sorted_by_modulus() {
        let pairs = eigenpairs(&Matrix::diagonal(&[2.0, 0.5, -1.0])).unwrap();
        let values: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        assert_eq!(values, vec![2.0, -1.0, 0.5]);
        for p in &pairs {
            assert_eq!(p.value.im, 0.0);
        }
    }

    #[test]
    fn companion_eigenvalues_match_cubic_oracle() {
        // characteristic polynomial is x^3 - tau x^2 + sigma x - delta
        for (m, (tau, sigma, delta)) in
            [(set_a_left(), (0.0, -1.0, 0.3)), (set_a_right(), (0.0, 3.0, 0.6))]
        {
            let mut oracle = cubic_roots(-tau, sigma, -delta);
            oracle.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
            let pairs = eigenpairs(&m).unwrap();
            for (p, o) in pairs.iter().zip(&oracle) {
                assert!((p.value - o).norm() < 1e-10, "{:?} vs {:?}", p.value, o);
                assert!(p.residual(&m) <= 1e-10 * m.norm());
            }
        }
        let left = eigenpairs(&set_a_left()).unwrap();
        assert!((left[0].value.re - 1.1254).abs() < 1e-3);
        assert!((left[1].value.re + 0.7864).abs() < 1e-3 && left[1].is_real());
        let right = eigenpairs(&set_a_right()).unwrap();
        assert!((right[0].modulus() - 1.7433).abs() < 1e-3);
        assert!((right[2].value.re - 0.19743).abs() < 1e-4);
        assert!(right[0].value.im > 0.0 && right[1].value == right[0].value.conj());
    }

    #[test]
    fn eigenvector_phase_convention() {
        let pairs = eigenpairs(&set_a_right()).unwrap();
        let v = &pairs[0].vector;
        let len: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((len - 1.0).abs() < 1e-14);
        let big = v
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        assert_eq!(big.im, 0.0);
        assert!(big.re > 0.0);
    }

    #[test]
    fn unstable_axis_of_diagonal() {
        let b = invariant_basis(&Matrix::diagonal(&[2.0, 0.5, 0.1]), Side::Unstable).unwrap();
        assert_eq!(b.cols(), 1);
        assert!(b.column(0).distance(&Vector::unit(3, 0)) < 1e-15);
        let s = invariant_basis(&Matrix::diagonal(&[2.0, 0.5, 0.1]), Side::Stable).unwrap();
        assert_eq!(s.cols(), 2);
    }

    #[test]
    fn unstable_plane_is_invariant() {
        let m = set_a_right();
        let b = invariant_basis(&m, Side::Unstable).unwrap();
        assert_eq!(b.cols(), 2);
        let bt = b.transpose();
        let mb = &m * &b;
        let proj = &(&b * &bt) * &mb;
        let resid = (&mb - &proj).norm();
        assert!(resid < 1e-9, "residual {resid}");
        let g = &bt * &b;
        assert!((&g - &Matrix::identity(2)).norm() < 1e-12);
    }

    #[test]
    fn rotation_with_unit_eigenvalue_is_non_hyperbolic() {
        let th = 0.3f64;
        let m = Matrix::from_rows(&[
            [2.0 * th.cos(), -2.0 * th.sin(), 0.0],
            [2.0 * th.sin(), 2.0 * th.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            invariant_basis(&m, Side::Unstable),
            Err(LinalgError::NonHyperbolic { .. })
        ));
    }

    #[test]
    fn larger_matrices_converge() {
        // 8x8 with a known spectrum: upper triangular plus similarity
        let n = 8;
        let mut t = Matrix::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = (i as f64) - 3.5;
            for j in i + 1..n {
                t[(i, j)] = 0.1 * ((i + 2 * j) % 5) as f64;
            }
        }
        let pairs = eigenpairs(&t).unwrap();
        for p in &pairs {
            assert!(p.value.im.abs() < 1e-9);
            assert!(p.residual(&t) < 1e-10 * t.norm());
        }
        let prod: f64 = pairs.iter().map(|p| p.modulus()).product();
        assert!((prod - t.determinant().abs()).abs() < 1e-8 * prod);
    }
}
