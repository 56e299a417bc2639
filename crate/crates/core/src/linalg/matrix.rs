use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::{Mat, MatRef};
pub use num_complex::Complex64 as C64;

use crate::error::{shape, Result};

/// Dense complex matrix, row-major, with optional subsystem dimensions.
///
/// When `dims` is present its product equals `rows`; for square operators it
/// describes the tensor-product structure of the space the operator acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    dims: Option<Vec<usize>>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols], dims: None }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data, dims: None }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(format!("{} entries cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data, dims: None })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("ragged rows"));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.iter().flatten().copied().collect(), dims: None })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v><v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Column vector with the given entries.
    pub fn column_vector(v: &[C64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec(), dims: None }
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn dims(&self) -> Option<&[usize]> {
        self.dims.as_deref()
    }

    /// Subsystem dimensions, or the single factor `[rows]` when unset.
    pub fn dims_or_flat(&self) -> Vec<usize> {
        self.dims.clone().unwrap_or_else(|| vec![self.rows])
    }

    /// Attaches subsystem dimensions; their product must equal `rows`.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let prod: usize = dims.iter().product();
        if prod != self.rows {
            return Err(shape(format!("subsystem dims {dims:?} (product {prod}) do not match {} rows", self.rows)));
        }
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn clear_dims(mut self) -> Self {
        self.dims = None;
        self
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj());
        m.dims = self.dims.clone();
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)]);
        m.dims = self.dims.clone();
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
            dims: self.dims.clone(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add_scaled shape");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "trace_product shape");
        assert_eq!(self.rows, other.cols, "trace_product shape");
        let mut acc = ZERO;
        for i in 0..self.rows {
            let row = self.row(i);
            for (k, &a) in row.iter().enumerate() {
                acc += a * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian within `tol * maxabs`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol * self.max_abs()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        let mut m = Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        m.dims = self.dims.clone();
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply shape");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    /// `<u| M |v>`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff shape");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    pub(crate) fn to_faer_real(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j].re)
    }

    pub(crate) fn from_faer(m: MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub(crate) fn from_faer_real(m: MatRef<'_, f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs)
    }
}

// Below this many multiply-adds the naive triple loop beats the faer round trip.
const NAIVE_MATMUL_LIMIT: usize = 1 << 15;

/// Matrix product. Large products go through `faer`, with a real-only path
/// when both operands have vanishing imaginary parts.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols, b.rows, "matmul shape {}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols);
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = if n * k * m <= NAIVE_MATMUL_LIMIT {
        let mut out = ComplexMatrix::zeros(n, m);
        for i in 0..n {
            for (l, &x) in a.row(i).iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                let brow = b.row(l);
                let orow = &mut out.data[i * m..(i + 1) * m];
                for (o, &y) in orow.iter_mut().zip(brow) {
                    *o += x * y;
                }
            }
        }
        out
    } else if a.is_real() && b.is_real() {
        let p = a.to_faer_real() * b.to_faer_real();
        ComplexMatrix::from_faer_real(p.as_ref())
    } else {
        let p = a.to_faer() * b.to_faer();
        ComplexMatrix::from_faer(p.as_ref())
    };
    if a.is_square() && b.is_square() && a.dims == b.dims {
        out.dims = a.dims.clone();
    }
    out
}

/// JSON form: `{ "dims": [..], "rows": [[[re, im], ..], ..] }`.
#[derive(serde::Serialize, serde::Deserialize)]
struct MatrixRepr {
    dims: Vec<usize>,
    rows: Vec<Vec<[f64; 2]>>,
}

impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.rows).map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
        MatrixRepr { dims: self.dims_or_flat(), rows }.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(d)?;
        let rows: Vec<Vec<C64>> =
            repr.rows.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
        let m = ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)?;
        if repr.dims.is_empty() || repr.dims == [m.rows] {
            return Ok(m);
        }
        m.with_dims(repr.dims).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dims_must_multiply_to_rows() {
        let m = ComplexMatrix::identity(6);
        assert!(m.clone().with_dims(vec![2, 3]).is_ok());
        assert!(matches!(m.with_dims(vec![2, 2]), Err(crate::Error::Shape(_))));
    }

    #[test]
    fn naive_and_faer_products_agree() {
        let a = ComplexMatrix::from_fn(40, 37, |i, j| c((i * 3 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.02));
        let b = ComplexMatrix::from_fn(37, 41, |i, j| c(((i + 2 * j) % 7) as f64, 0.5 * i as f64));
        let fast = matmul(&a, &b);
        let slow = ComplexMatrix::from_fn(40, 41, |i, j| (0..37).map(|l| a[(i, l)] * b[(l, j)]).sum());
        assert!(fast.max_abs_diff(&slow) < 1e-9 * slow.max_abs());
    }

    #[test]
    fn real_fast_path_matches_complex() {
        let a = ComplexMatrix::from_fn(50, 50, |i, j| c(((i * 7 + j) % 11) as f64, 0.0));
        let b = ComplexMatrix::from_fn(50, 50, |i, j| c(((i + 5 * j) % 13) as f64, 0.0));
        let p = matmul(&a, &b);
        let q = ComplexMatrix::from_faer((a.to_faer() * b.to_faer()).as_ref());
        assert!(p.max_abs_diff(&q) < 1e-9);
    }

    #[test]
    fn trace_product_matches_product_trace() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| c(i as f64, j as f64));
        let b = ComplexMatrix::from_fn(5, 5, |i, j| c(j as f64 - 1.0, (i * j) as f64));
        let direct = matmul(&a, &b).trace();
        assert!((a.trace_product(&b) - direct).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| c(i as f64 - 0.5, j as f64 * 0.25)).with_dims(vec![2, 2]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.starts_with(r#"{"dims":[2,2],"rows":[[[-0.5,0.0],"#));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"dims":[3],"rows":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
