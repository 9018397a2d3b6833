//! Tridiagonal line solves and a block-tridiagonal direct solver.

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tridiagonal matrix; `sub[k]` sits on row `k+1`, `sup[k]` on row `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
}

impl<T: Real> TriDiag<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>) -> Result<Self> {
        let n = diag.len();
        let off = n.saturating_sub(1);
        if sub.len() != off {
            return Err(Error::DimensionMismatch { expected: off, got: sub.len() });
        }
        if sup.len() != off {
            return Err(Error::DimensionMismatch { expected: off, got: sup.len() });
        }
        Ok(TriDiag { sub, diag, sup })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn off_sum(&self, k: usize) -> T {
        let mut s = T::zero();
        if k > 0 {
            s += self.sub[k - 1].abs();
        }
        if k + 1 < self.len() {
            s += self.sup[k].abs();
        }
        s
    }

    /// First row breaking diagonal dominance, if any. Rows may be weakly
    /// dominant as long as at least one row is strict.
    pub fn dominance_failure(&self) -> Option<usize> {
        if let Some(k) = (0..self.len()).find(|&k| !(self.diag[k] > T::zero() && self.diag[k] >= self.off_sum(k))) {
            return Some(k);
        }
        if !self.is_empty() && !(0..self.len()).any(|k| self.diag[k] > self.off_sum(k)) {
            return Some(0);
        }
        None
    }

    /// Strict dominance on every row.
    pub fn strictly_dominant(&self) -> bool {
        (0..self.len()).all(|k| self.diag[k] > self.off_sum(k))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * x[k];
                if k > 0 {
                    v += self.sub[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    v += self.sup[k] * x[k + 1];
                }
                v
            })
            .collect()
    }

    pub fn factor(&self) -> Result<TriFactor<T>> {
        if let Some(row) = self.dominance_failure() {
            return Err(Error::NotDiagonallyDominant { row });
        }
        let f = self.factor_unchecked();
        if let Some(k) = f.inv_piv.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular(k));
        }
        Ok(f)
    }

    fn factor_unchecked(&self) -> TriFactor<T> {
        let n = self.len();
        let mut inv_piv = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = T::zero();
        for k in 0..n {
            let p = if k == 0 { self.diag[0] } else { self.diag[k] - self.sub[k - 1] * prev };
            let ip = T::one() / p;
            inv_piv.push(ip);
            if k + 1 < n {
                prev = self.sup[k] * ip;
                upper.push(prev);
            }
        }
        TriFactor { sub: self.sub.clone(), inv_piv, upper }
    }
}

/// Precomputed two-sweep elimination for repeated solves with one matrix.
#[derive(Debug, Clone)]
pub struct TriFactor<T> {
    sub: Vec<T>,
    inv_piv: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> TriFactor<T> {
    pub fn len(&self) -> usize {
        self.inv_piv.len()
    }
    pub fn is_empty(&self) -> bool {
        self.inv_piv.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        if n == 0 {
            return;
        }
        x[0] *= self.inv_piv[0];
        for k in 1..n {
            x[k] = (x[k] - self.sub[k - 1] * x[k - 1]) * self.inv_piv[k];
        }
        for k in (0..n - 1).rev() {
            x[k] -= self.upper[k] * x[k + 1];
        }
    }
}

pub fn solve_tridiag<T: Real>(sys: &TriDiag<T>, rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != sys.len() {
        return Err(Error::DimensionMismatch { expected: sys.len(), got: rhs.len() });
    }
    let f = sys.factor()?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}

/// Solve with unit vectors and `trials` random nonnegative right-hand sides;
/// true iff every solution is `>= -1e-13`. Never errors: a system that cannot
/// be eliminated simply fails the check.
pub fn inverse_positivity_check<T: Real>(sys: &TriDiag<T>, trials: usize) -> bool {
    let n = sys.len();
    let f = sys.factor_unchecked();
    let slack = T::lit(-1e-13);
    let ok = |x: &[T]| x.iter().all(|v| v.is_finite() && *v >= slack);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..n {
        let mut x = vec![T::zero(); n];
        x[k] = T::one();
        f.solve_in_place(&mut x);
        if !ok(&x) {
            return false;
        }
    }
    for _ in 0..trials {
        let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen::<f64>())).collect();
        f.solve_in_place(&mut x);
        if !ok(&x) {
            return false;
        }
    }
    true
}

/// Row-major dense LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    pub fn new(n: usize, mut a: Vec<T>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&r, &s| a[r * n + k].abs().partial_cmp(&a[s * n + k].abs()).unwrap())
                .unwrap();
            if a[p * n + k] == T::zero() || !a[p * n + k].is_finite() {
                return Err(Error::Singular(k));
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let inv = T::one() / a[k * n + k];
            for r in k + 1..n {
                let m = a[r * n + k] * inv;
                a[r * n + k] = m;
                if m != T::zero() {
                    for c in k + 1..n {
                        let v = a[k * n + c];
                        a[r * n + c] -= m * v;
                    }
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }
}

/// One block row `-L x_{i-1} + A x_i - R x_{i+1}` of a block-tridiagonal
/// system with tridiagonal `A` and diagonal `L`, `R`.
pub struct BlockRow<'a, T> {
    pub a: &'a TriDiag<T>,
    pub left: &'a [T],
    pub right: &'a [T],
}

/// Direct block elimination; `rhs[i]` is the right-hand side of block row `i`.
pub fn solve_block_tridiag<T: Real>(rows: &[BlockRow<'_, T>], rhs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let nb = rows.len();
    if rhs.len() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: rhs.len() });
    }
    if nb == 0 {
        return Ok(Vec::new());
    }
    let n = rows[0].a.len();
    let mut factors: Vec<DenseLu<T>> = Vec::with_capacity(nb);
    let mut ys: Vec<Vec<T>> = Vec::with_capacity(nb);
    // W = S_{i-1}^{-1} R_{i-1}, dense row-major
    let mut w: Vec<T> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.a.len() != n || rhs[i].len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rhs[i].len() });
        }
        let mut s = vec![T::zero(); n * n];
        for k in 0..n {
            s[k * n + k] = row.a.diag[k];
            if k > 0 {
                s[k * n + k - 1] = row.a.sub[k - 1];
            }
            if k + 1 < n {
                s[k * n + k + 1] = row.a.sup[k];
            }
        }
        let mut y = rhs[i].clone();
        if i > 0 {
            // S_i = A_i - L_i W ; y_i = b_i + L_i S_{i-1}^{-1} y_{i-1}
            let z = factors[i - 1].solve(&ys[i - 1]);
            for r in 0..n {
                let l = row.left[r];
                for c in 0..n {
                    s[r * n + c] -= l * w[r * n + c];
                }
                y[r] += l * z[r];
            }
        }
        let lu = DenseLu::new(n, s)?;
        if i + 1 < nb {
            let mut next = vec![T::zero(); n * n];
            for c in 0..n {
                let mut e = vec![T::zero(); n];
                e[c] = row.right[c];
                let col = lu.solve(&e);
                for r in 0..n {
                    next[r * n + c] = col[r];
                }
            }
            w = next;
        }
        factors.push(lu);
        ys.push(y);
    }
    let mut x = vec![Vec::new(); nb];
    x[nb - 1] = factors[nb - 1].solve(&ys[nb - 1]);
    for i in (0..nb - 1).rev() {
        let mut b = ys[i].clone();
        for r in 0..n {
            b[r] += rows[i].right[r] * x[i + 1][r];
        }
        x[i] = factors[i].solve(&b);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let s = TriDiag::<f64>::new(vec![0.0; 2], vec![1.0; 3], vec![0.0; 2]).unwrap();
        assert_eq!(solve_tridiag(&s, &[3.0, -1.0, 2.5]).unwrap(), vec![3.0, -1.0, 2.5]);
    }

    #[test]
    fn three_by_three() {
        let s = TriDiag::<f64>::new(vec![-1.0; 2], vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let x = solve_tridiag(&s, &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two() {
        let s = TriDiag::<f64>::new(vec![-1.0], vec![2.0; 2], vec![-1.0]).unwrap();
        let x = solve_tridiag(&s, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(inverse_positivity_check(&s, 5));
    }

    #[test]
    fn positive_off_diagonal_breaks_positivity() {
        // inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3
        let s = TriDiag::<f64>::new(vec![1.0], vec![2.0; 2], vec![1.0]).unwrap();
        assert!(!inverse_positivity_check(&s, 5));
    }

    #[test]
    fn rejects_non_dominant() {
        let s = TriDiag::<f64>::new(vec![-3.0], vec![2.0; 2], vec![0.0]).unwrap();
        assert_eq!(solve_tridiag(&s, &[1.0, 1.0]), Err(Error::NotDiagonallyDominant { row: 1 }));
        let w = TriDiag::<f64>::new(vec![-1.0], vec![1.0; 2], vec![-1.0]).unwrap();
        assert!(solve_tridiag(&w, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(TriDiag::<f64>::new(vec![0.0; 3], vec![1.0; 3], vec![0.0; 2]).is_err());
        let s = TriDiag::<f64>::new(vec![0.0; 2], vec![1.0; 3], vec![0.0; 2]).unwrap();
        assert!(solve_tridiag(&s, &[1.0]).is_err());
    }

    #[test]
    fn block_solve_matches_product() {
        let a = TriDiag::<f64>::new(vec![-1.0; 2], vec![5.0; 3], vec![-1.5; 2]).unwrap();
        let l = [1.0, 0.5, 0.25];
        let r = [0.75, 1.0, 0.5];
        let rows: Vec<BlockRow<f64>> = (0..4).map(|_| BlockRow { a: &a, left: &l, right: &r }).collect();
        let xs: Vec<Vec<f64>> = (0..4).map(|i| (0..3).map(|j| (i * 3 + j) as f64 * 0.1 - 0.3).collect()).collect();
        let rhs: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let mut b = a.mul_vec(&xs[i]);
                for k in 0..3 {
                    if i > 0 {
                        b[k] -= l[k] * xs[i - 1][k];
                    }
                    if i < 3 {
                        b[k] -= r[k] * xs[i + 1][k];
                    }
                }
                b
            })
            .collect();
        let got = solve_block_tridiag(&rows, &rhs).unwrap();
        for (g, e) in got.iter().flatten().zip(xs.iter().flatten()) {
            assert!((g - e).abs() < 1e-13);
        }
    }
}
