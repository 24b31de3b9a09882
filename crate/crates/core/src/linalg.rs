//! Small dense linear algebra: row-major matrices and an LU factorization
//! with partial pivoting that solves both `Ax = b` and `Aᵀx = b`.

use crate::error::{AlgaeError, Result};

/// Residual tolerance asserted after every solve, scaled by `max(1, ‖b‖∞)`.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer has wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x` without materializing the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, factor: f64, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + factor * b)
            .collect();
        DenseMatrix::from_row_major(self.rows, self.cols, data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// LU factorization `PA = LU` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    original: DenseMatrix,
}

impl LuFactorization {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(AlgaeError::InvalidInput(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = inf_norm(&a.data).max(f64::MIN_POSITIVE);

        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= scale * 1e-14 {
                return Err(AlgaeError::Singular(format!(
                    "zero pivot in column {k} of a {n}x{n} system"
                )));
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu[i * n + k] = factor;
                let (upper, lower) = lu.split_at_mut(i * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                for (x, &u) in lower[k + 1..n].iter_mut().zip(krow) {
                    *x -= factor * u;
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            original: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `Ax = b` and checks the residual.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let x = self.solve_unchecked(b);
        let r = self.original.mul_vec(&x);
        check_residual("solve", &r, b)?;
        Ok(x)
    }

    /// Solves `Aᵀx = b` and checks the residual.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let x = self.solve_transpose_unchecked(b);
        let r = self.original.tr_mul_vec(&x);
        check_residual("solve_transpose", &r, b)?;
        Ok(x)
    }

    fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu[i * n..i * n + i], &y[..i]);
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu[i * n + i + 1..i * n + n], &y[i + 1..]);
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        y
    }

    fn solve_transpose_unchecked(&self, b: &[f64]) -> Vec<f64> {
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.lu[k * n + i] * z[k];
            }
            z[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.lu[k * n + i] * z[k];
            }
            z[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

fn check_residual(context: &'static str, ax: &[f64], b: &[f64]) -> Result<()> {
    let residual = max_abs_diff(ax, b);
    let tolerance = SOLVE_RESIDUAL_TOL * inf_norm(b).max(1.0);
    if !(residual <= tolerance) {
        return Err(AlgaeError::Residual {
            context,
            residual,
            tolerance,
        });
    }
    Ok(())
}

/// One-shot solve of `Ax = b`.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LuFactorization::new(a)?.solve(b)
}
