//! Dense row-major matrices and the few factorizations the solvers need.
//!
//! Everything is 64-bit; grids stay in the low hundreds of nodes, so dense
//! (or banded) algebra is the right tool.

use crate::error::{shape_mismatch, Error, Result};

/// Row-major dense matrix of f64. A column vector is an n x 1 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "tensor shape/data mismatch");
        Tensor { rows, cols, data }
    }

    pub fn column(data: Vec<f64>) -> Self {
        let rows = data.len();
        Tensor {
            rows,
            cols: 1,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Reinterpret the storage with a new shape (row-major order kept).
    pub fn reshaped(&self, rows: usize, cols: usize) -> Tensor {
        assert_eq!(rows * cols, self.data.len(), "reshape size mismatch");
        Tensor {
            rows,
            cols,
            data: self.data.clone(),
        }
    }

    pub fn transposed(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Tensor {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add shape mismatch"
        );
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add shape mismatch"
        );
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub shape mismatch"
        );
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = f(*v);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// self * other, ikj loop order so the inner loop streams rows.
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Tensor::zeros(m, n);
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            let orow = &mut out.data[i * n..(i + 1) * n];
            for (p, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[p * n..(p + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// self^T * other without materializing the transpose.
    pub fn t_matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.rows, other.rows, "t_matmul shape mismatch");
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut out = Tensor::zeros(m, n);
        for p in 0..k {
            let arow = &self.data[p * m..(p + 1) * m];
            let brow = &other.data[p * n..(p + 1) * n];
            for (i, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// self * other^T without materializing the transpose.
    pub fn matmul_t(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.cols, "matmul_t shape mismatch");
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = Tensor::zeros(m, n);
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            for j in 0..n {
                let brow = &other.data[j * k..(j + 1) * k];
                let mut acc = 0.0;
                for (&a, &b) in arow.iter().zip(brow) {
                    acc += a * b;
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }
}

/// Dense LU factorization with partial pivoting.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &Tensor) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(shape_mismatch("LU requires a square matrix"));
        }
        let n = a.rows();
        let mut lu = a.data().to_vec();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut max = lu[k * n + k].abs();
            for r in (k + 1)..n {
                let v = lu[r * n + k].abs();
                if v > max {
                    max = v;
                    p = r;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::Numerical(format!(
                    "singular matrix in LU at column {k} (pivot {max:e})"
                )));
            }
            pivots[k] = p;
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in (k + 1)..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Ok(DenseLu { n, lu, pivots })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut x = rhs.to_vec();
        // The stored L carries every row swap, so P must be applied to the
        // right-hand side in full before forward substitution.
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            for r in (k + 1)..n {
                x[r] -= self.lu[r * n + k] * x[k];
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.lu[k * n + k];
            let xk = x[k];
            for r in 0..k {
                x[r] -= self.lu[r * n + k] * xk;
            }
        }
        x
    }

    /// Rough reciprocal condition estimate from the pivot magnitudes.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.n;
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for k in 0..n {
            let d = self.lu[k * n + k].abs();
            min = min.min(d);
            max = max.max(d);
        }
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }
}

/// Banded LU without pivoting, for diagonally dominant implicit steps.
/// Row i stores columns [i-kl, i+ku] in a band of width kl+ku+1.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<f64>,
}

impl BandedLu {
    pub fn width(kl: usize, ku: usize) -> usize {
        kl + ku + 1
    }

    /// `band[i * (kl+ku+1) + (j - i + kl)]` holds A[i][j].
    pub fn factor(n: usize, kl: usize, ku: usize, mut band: Vec<f64>) -> Result<Self> {
        let w = Self::width(kl, ku);
        if band.len() != n * w {
            return Err(shape_mismatch("banded storage size mismatch"));
        }
        for k in 0..n {
            let pivot = band[k * w + kl];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Numerical(format!(
                    "zero pivot in banded LU at row {k}"
                )));
            }
            let rmax = (k + kl).min(n - 1);
            for r in (k + 1)..=rmax {
                // A[r][k] sits at offset k - r + kl in row r.
                let off = k + kl - r;
                let factor = band[r * w + off] / pivot;
                band[r * w + off] = factor;
                if factor != 0.0 {
                    let cmax = (k + ku).min(n - 1);
                    for c in (k + 1)..=cmax {
                        let v = band[k * w + (c - k + kl)];
                        band[r * w + (c + kl - r)] -= factor * v;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, band })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = Self::width(kl, ku);
        let mut x = rhs.to_vec();
        for k in 0..n {
            let rmax = (k + kl).min(n - 1);
            for r in (k + 1)..=rmax {
                x[r] -= self.band[r * w + (k + kl - r)] * x[k];
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.band[k * w + kl];
            let xk = x[k];
            let rmin = k.saturating_sub(ku);
            for r in rmin..k {
                x[r] -= self.band[r * w + (k + kl - r)] * xk;
            }
        }
        x
    }
}
