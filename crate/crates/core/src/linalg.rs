//! Linear solvers used by the quenched oracles.
//!
//! Systems coming from cylinder graphs are banded once vertices are ordered by
//! level, so the float path is a banded LU with partial pivoting followed by
//! a few rounds of iterative refinement. Small systems can be solved exactly
//! over the rationals instead.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::{Error, Rational, Result};

/// Row-major sparse matrix. Duplicate entries are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, rows: vec![Vec::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if let Some(entry) = self.rows[row].iter_mut().find(|(c, _)| *c == col) {
            entry.1 += value;
        } else {
            self.rows[row].push((col, value));
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::new(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                t.rows[j].push((i, v));
            }
        }
        t
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }
}

/// LU factorization of a band matrix with partial pivoting.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; pivoting widens the upper
/// band of `U` to `kl + ku`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            band: vec![0.0; n * width],
            lower: vec![0.0; n * kl],
            pivots: (0..n).collect(),
        };
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, v) in row {
                *lu.at(i, j) += v;
            }
        }
        let reach = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..=last {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem(alloc::format!("zero pivot in column {k}")));
            }
            let end = (k + reach).min(n - 1);
            if p != k {
                for j in k..=end {
                    let a_kj = lu.get(k, j);
                    let a_pj = lu.get(p, j);
                    *lu.at(k, j) = a_pj;
                    *lu.at(p, j) = a_kj;
                }
                lu.pivots[k] = p;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..=last {
                let factor = lu.get(i, k) / pivot;
                lu.lower[k * kl + (i - k - 1)] = factor;
                *lu.at(i, k) = 0.0;
                if factor != 0.0 {
                    for j in k + 1..=end {
                        let a_kj = lu.get(k, j);
                        *lu.at(i, j) -= factor * a_kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.band[i * self.width + (j + self.kl - i)]
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.band[i * self.width + (j + self.kl - i)]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + self.kl).min(n.saturating_sub(1));
            for i in k + 1..=last {
                x[i] -= self.lower[k * self.kl + (i - k - 1)] * x[k];
            }
        }
        let reach = self.kl + self.ku;
        for i in (0..n).rev() {
            let end = (i + reach).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=end {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
        x
    }
}

/// Solution of a float system together with its max-norm residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub residual: f64,
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Banded LU solve with up to four rounds of iterative refinement.
pub fn solve_sparse(a: &SparseMatrix, b: &[f64]) -> Result<Solution> {
    if a.dim() == 0 {
        return Ok(Solution { x: Vec::new(), residual: 0.0 });
    }
    let lu = BandLu::factor(a)?;
    let mut x = lu.solve(b);
    let mut r = residual(a, &x, b);
    let mut res = max_abs(&r);
    for _ in 0..4 {
        if res < 1e-15 {
            break;
        }
        let dx = lu.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let r_new = residual(a, &candidate, b);
        let res_new = max_abs(&r_new);
        if !(res_new < res) {
            break;
        }
        x = candidate;
        r = r_new;
        res = res_new;
    }
    if !res.is_finite() {
        return Err(Error::SingularSystem("non-finite solution".into()));
    }
    Ok(Solution { x, residual: res })
}

/// Exact Gaussian elimination over the rationals.
pub fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Result<Vec<Rational>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("system is not square".into()));
    }
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[i][k].is_zero())
            .ok_or_else(|| Error::SingularSystem(alloc::format!("no pivot in column {k}")))?;
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &factor * &a[k][j];
                a[i][j] -= v;
            }
            let v = &factor * &b[k];
            b[i] -= v;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{int, ratio};

    fn tridiagonal(n: usize) -> SparseMatrix {
        let mut a = SparseMatrix::new(n);
        for i in 0..n {
            a.add(i, i, 4.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -2.0);
            }
        }
        a
    }

    #[test]
    fn banded_solve_matches_known_solution() {
        let a = tridiagonal(50);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x_true);
        let sol = solve_sparse(&a, &b).unwrap();
        assert!(sol.residual < 1e-12);
        for (x, t) in sol.x.iter().zip(&x_true) {
            assert!((x - t).abs() < 1e-10);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] x = [2, 3]
        let mut a = SparseMatrix::new(2);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let sol = solve_sparse(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(sol.x, vec![3.0, 2.0]);
    }

    #[test]
    fn dense_corner_entries() {
        let mut a = SparseMatrix::new(4);
        for i in 0..4 {
            a.add(i, i, 3.0);
        }
        a.add(0, 3, 1.0);
        a.add(3, 0, 1.0);
        a.add(1, 2, -1.0);
        let x_true = [1.0, -2.0, 0.5, 4.0];
        let b = a.mul_vec(&x_true);
        let sol = solve_sparse(&a, &b).unwrap();
        for (x, t) in sol.x.iter().zip(&x_true) {
            assert!((x - t).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut a = SparseMatrix::new(2);
        a.add(0, 0, 1.0);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 1.0);
        assert!(matches!(solve_sparse(&a, &[1.0, 1.0]), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn rational_elimination() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let x = solve_rational(a, vec![int(1), int(2)]).unwrap();
        assert_eq!(x, vec![ratio(1, 5), ratio(3, 5)]);
        let singular = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve_rational(singular, vec![int(1), int(1)]).is_err());
    }
}
