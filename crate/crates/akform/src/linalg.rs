//! Exact linear algebra over the Gaussian rationals: reduced row echelon
//! form, kernels, ranks, and canonical subspace arithmetic.

use crate::scalars::GaussRat;

/// Dense row-major matrix over [`GaussRat`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<GaussRat>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![GaussRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = GaussRat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussRat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &GaussRat {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut GaussRat {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[GaussRat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// In-place Gauss-Jordan reduction; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let Some(pivot_row) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, pivot_row);
            let inv = self.at(row, col).inv();
            for c in col..self.cols {
                let v = self.at(row, c).mul(&inv);
                *self.at_mut(row, c) = v;
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = self.at(r, c).sub(&factor.mul(self.at(row, c)));
                        *self.at_mut(r, c) = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Canonical kernel basis: one vector per free column, with `1` at the
    /// free column and the pivot entries back-substituted.
    pub fn kernel_basis(&self) -> Vec<Vec<GaussRat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut vec = vec![GaussRat::zero(); self.cols];
            vec[free] = GaussRat::one();
            for (r, &p) in pivots.iter().enumerate() {
                vec[p] = m.at(r, free).neg();
            }
            basis.push(vec);
        }
        basis
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j).add(&a.mul(other.at(k, j)));
                    *out.at_mut(i, j) = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = GaussRat::zero();
                for (c, value) in v.iter().enumerate() {
                    if !value.is_zero() && !self.at(r, c).is_zero() {
                        acc = acc.add(&self.at(r, c).mul(value));
                    }
                }
                acc
            })
            .collect()
    }
}

/// A precomputed solver for a fixed full-column-rank system `M x = b`.
/// Reduces `[M | I]` once, then solves each right-hand side by one sparse
/// matrix-vector product.
pub struct UniqueSolver {
    cols: usize,
    pivots: Vec<usize>,
    reduced: Mat, // rref of [M | I]; right block holds the row transform
}

impl UniqueSolver {
    /// `None` when `M` does not have full column rank.
    pub fn new(m: &Mat) -> Option<Self> {
        let rows = m.rows();
        let cols = m.cols();
        let mut aug = Mat::zero(rows, cols + rows);
        for r in 0..rows {
            for c in 0..cols {
                *aug.at_mut(r, c) = m.at(r, c).clone();
            }
            *aug.at_mut(r, cols + r) = GaussRat::one();
        }
        let pivots = aug.rref();
        let struct_pivots: Vec<usize> = pivots.iter().copied().filter(|&p| p < cols).collect();
        if struct_pivots.len() != cols {
            return None;
        }
        Some(UniqueSolver { cols, pivots: struct_pivots, reduced: aug })
    }

    /// Solves `M x = b` for a sparse right-hand side given as
    /// `(row, value)` pairs; `None` when the system is inconsistent.
    pub fn solve_sparse(&self, b: &[(usize, GaussRat)]) -> Option<Vec<GaussRat>> {
        let rows = self.reduced.rows();
        let cols = self.cols;
        // y = T b where T is the stored row transform.
        let mut y = vec![GaussRat::zero(); rows];
        for (r, yr) in y.iter_mut().enumerate() {
            for (br, bv) in b {
                let t = self.reduced.at(r, cols + br);
                if !t.is_zero() {
                    *yr = yr.add(&t.mul(bv));
                }
            }
        }
        // Rows beyond the column rank must vanish for consistency.
        for (r, yr) in y.iter().enumerate() {
            if r >= self.pivots.len() && !yr.is_zero() {
                return None;
            }
        }
        let mut x = vec![GaussRat::zero(); cols];
        for (r, &p) in self.pivots.iter().enumerate() {
            x[p] = y[r].clone();
        }
        Some(x)
    }
}

/// A linear subspace held as a reduced-echelon row basis; the canonical
/// representation makes subspace equality a structural comparison.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    cols: usize,
    rows: Vec<Vec<GaussRat>>,
}

impl Subspace {
    pub fn zero(cols: usize) -> Self {
        Subspace { cols, rows: Vec::new() }
    }

    pub fn from_vectors(cols: usize, vectors: impl IntoIterator<Item = Vec<GaussRat>>) -> Self {
        let vecs: Vec<Vec<GaussRat>> = vectors.into_iter().collect();
        if vecs.is_empty() {
            return Subspace::zero(cols);
        }
        assert!(vecs.iter().all(|v| v.len() == cols));
        let mut m = Mat::from_rows(vecs);
        let pivots = m.rref();
        let rows = (0..pivots.len()).map(|r| m.row(r).to_vec()).collect();
        Subspace { cols, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[Vec<GaussRat>] {
        &self.rows
    }

    /// Reduces `v` against the echelon basis; the remainder is zero exactly
    /// when `v` lies in the subspace.
    pub fn contains(&self, v: &[GaussRat]) -> bool {
        assert_eq!(v.len(), self.cols);
        let mut work = v.to_vec();
        for row in &self.rows {
            let lead = row.iter().position(|x| !x.is_zero()).expect("no zero rows stored");
            if !work[lead].is_zero() {
                let factor = work[lead].clone();
                for c in lead..self.cols {
                    work[c] = work[c].sub(&factor.mul(&row[c]));
                }
            }
        }
        work.iter().all(|x| x.is_zero())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.cols, other.cols);
        Subspace::from_vectors(self.cols, self.rows.iter().chain(other.rows.iter()).cloned())
    }

    /// Intersection via the kernel of `[A^T | -B^T]`.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.cols, other.cols);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.cols);
        }
        let a = self.dim();
        let b = other.dim();
        let mut m = Mat::zero(self.cols, a + b);
        for (j, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                *m.at_mut(i, j) = v.clone();
            }
        }
        for (j, row) in other.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                *m.at_mut(i, a + j) = v.neg();
            }
        }
        let kernel = m.kernel_basis();
        let vectors = kernel.into_iter().map(|z| {
            let mut v = vec![GaussRat::zero(); self.cols];
            for (j, row) in self.rows.iter().enumerate() {
                if !z[j].is_zero() {
                    for (i, x) in row.iter().enumerate() {
                        v[i] = v[i].add(&z[j].mul(x));
                    }
                }
            }
            v
        });
        Subspace::from_vectors(self.cols, vectors)
    }
}
