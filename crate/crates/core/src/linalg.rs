//! Small dense and tridiagonal linear algebra kernels.
//!
//! Only what the solvers need: a row-major matrix, LU with partial pivoting, Cholesky for
//! normal equations, and Sturm-count bisection for symmetric tridiagonal spectra.

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a matrix column by column.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `Aᵀ diag(w) A`, the Gram matrix of a weighted least-squares problem.
    pub fn weighted_gram(&self, weights: &[T]) -> Matrix<T> {
        assert_eq!(weights.len(), self.rows);
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for (i, &w) in weights.iter().enumerate() {
            let row = &self.data[i * n..(i + 1) * n];
            for a in 0..n {
                let wa = w * row[a];
                if wa == T::zero() {
                    continue;
                }
                let grow = &mut g.data[a * n..(a + 1) * n];
                for b in a..n {
                    grow[b] = grow[b] + wa * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g.data[a * n + b] = g.data[b * n + a];
            }
        }
        g
    }

    /// `Aᵀ diag(w) r`.
    pub fn weighted_transpose_apply(&self, weights: &[T], r: &[T]) -> Vec<T> {
        assert_eq!(r.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let wr = weights[i] * r[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * wr;
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub fn lu_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, T::zero()), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax == T::zero() || !pmax.is_finite() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                m[r * n + j] = m[r * n + j] - f * m[col * n + j];
            }
            x[r] = x[r] - f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s = s - m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

/// Solves a symmetric positive definite system by Cholesky factorization.
/// Returns `None` if the matrix is not numerically positive definite.
pub fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.data[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= T::zero() || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Some(y)
}

/// Minimizes `‖diag(w)^{1/2} (A x - r)‖₂` through the normal equations, falling back to LU
/// when Cholesky rejects the Gram matrix.
pub fn weighted_least_squares<T: Real>(a: &Matrix<T>, weights: &[T], r: &[T]) -> Option<Vec<T>> {
    let g = a.weighted_gram(weights);
    let rhs = a.weighted_transpose_apply(weights, r);
    cholesky_solve(&g, &rhs).or_else(|| lu_solve(&g, &rhs))
}

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence of the LDLᵀ pivots).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d < T::zero() {
            count += 1;
        }
        for i in 1..self.diag.len() {
            if d == T::zero() {
                d = tiny;
            }
            let b = self.off[i - 1];
            d = self.diag[i] - x - b * b / d;
            if d < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.off[i].abs() } else { T::zero() };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> T {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let two = T::lit(2.0);
        let eps = T::epsilon() * T::lit(4.0);
        for _ in 0..300 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= eps * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / two
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<T> {
        (0..count.min(self.dim())).map(|k| self.eigenvalue(k)).collect()
    }
}
