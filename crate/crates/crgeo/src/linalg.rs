//! Exact rational linear algebra (row reduction, rank, null spaces,
//! orthogonal projectors) and a few floating-point helpers on top of
//! nalgebra for the numeric paths.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let mut m = QMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a * b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigRational::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc += a * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        })
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            // pick the entry with the smallest representation among nonzeros
            let mut sel: Option<usize> = None;
            for r in row..self.rows {
                if !self.get(r, col).is_zero() {
                    sel = match sel {
                        None => Some(r),
                        Some(s) => {
                            let cur = self.get(r, col);
                            let best = self.get(s, col);
                            let cur_size =
                                cur.numer().magnitude().bits() + cur.denom().magnitude().bits();
                            let best_size =
                                best.numer().magnitude().bits() + best.denom().magnitude().bits();
                            if cur_size < best_size {
                                Some(r)
                            } else {
                                Some(s)
                            }
                        }
                    };
                }
            }
            let Some(sel) = sel else { continue };
            self.swap_rows(row, sel);
            let inv = BigRational::one() / self.get(row, col).clone();
            for j in col..self.cols {
                let v = self.get(row, j) * &inv;
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row || self.get(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col).clone();
                for j in col..self.cols {
                    let v = self.get(r, j) - &factor * self.get(row, j);
                    self.set(r, j, v);
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
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<BigRational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![BigRational::zero(); self.cols];
            v[fc] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(r, fc).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * x = b` exactly. Returns `None` when inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(self.rows, b.len());
        let mut aug = QMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column: inconsistent
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Gram-based orthogonal projector onto the column space, exact.
    /// Returns `P` with `P^2 = P`, `im P = im self`.
    pub fn column_space_projector(&self) -> QMat {
        // independent columns
        let mut m = self.clone();
        let pivots = m.rref();
        if pivots.is_empty() {
            return QMat::zeros(self.rows, self.rows);
        }
        let b = QMat::from_fn(self.rows, pivots.len(), |i, j| {
            self.get(i, pivots[j]).clone()
        });
        let bt = b.transpose();
        let g = bt.mul(&b);
        // Solve G X = B^T column by column: X = G^{-1} B^T
        let mut x = QMat::zeros(pivots.len(), self.rows);
        for col in 0..self.rows {
            let rhs: Vec<BigRational> = (0..pivots.len()).map(|i| bt.get(i, col).clone()).collect();
            let sol = g.solve(&rhs).expect("Gram matrix is invertible");
            for i in 0..pivots.len() {
                x.set(i, col, sol[i].clone());
            }
        }
        b.mul(&x)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("rational out of f64 range")
        })
    }
}

pub fn qr_from_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Numeric rank with the cutoff rule `sigma > tol_rel * sigma_max`.
pub fn f64_rank(m: &DMatrix<f64>, tol_rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > tol_rel * smax)
        .count()
}

/// Minimum-norm least-squares solution via SVD.
pub fn f64_least_squares(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>, tol_rel: f64) -> nalgebra::DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, tol_rel * svd.singular_values.iter().cloned().fold(0.0, f64::max))
        .expect("svd solve")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rref_rank_nullspace() {
        // [[1,2,3],[2,4,6],[1,0,1]] has rank 2, nullity 1
        let m = QMat::from_fn(3, 3, |i, j| {
            let rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]];
            q(rows[i][j], 1)
        });
        assert_eq!(m.rank(), 2);
        let ns = m.null_space();
        assert_eq!(ns.len(), 1);
        // check A v = 0
        let v = &ns[0];
        for i in 0..3 {
            let mut acc = BigRational::zero();
            for j in 0..3 {
                acc += m.get(i, j) * &v[j];
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = QMat::from_fn(2, 2, |i, j| q([[1, 1], [2, 2]][i][j], 1));
        assert!(m.solve(&[q(3, 1), q(6, 1)]).is_some());
        assert!(m.solve(&[q(3, 1), q(7, 1)]).is_none());
    }

    #[test]
    fn projector_is_idempotent_and_fixes_columns() {
        let a = QMat::from_fn(3, 2, |i, j| q([[1, 0], [1, 1], [0, 2]][i][j], 1));
        let p = a.column_space_projector();
        assert_eq!(p.mul(&p), p);
        for j in 0..2 {
            let col: Vec<BigRational> = (0..3).map(|i| a.get(i, j).clone()).collect();
            assert_eq!(p.mul_vec(&col), col);
        }
        // P annihilates a vector orthogonal to the columns: (2, -2, 1)
        let w = vec![q(2, 1), q(-2, 1), q(1, 1)];
        let pw = p.mul_vec(&w);
        assert!(pw.iter().all(|x| x.is_zero()));
    }
}
