//! Tridiagonal storage and the Thomas algorithm.

use crate::error::{Error, Result};

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
/// `lower[0]` and `upper[n-1]` are unused and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        [self.lower[i], self.diag[i], self.upper[i]]
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        if n == 1 {
            out[0] = self.diag[0] * x[0];
            return;
        }
        out[0] = self.diag[0] * x[0] + self.upper[0] * x[1];
        for i in 1..n - 1 {
            out[i] = self.lower[i] * x[i - 1] + self.diag[i] * x[i] + self.upper[i] * x[i + 1];
        }
        out[n - 1] = self.lower[n - 1] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    /// Solves `A x = rhs`, overwriting `rhs` with `x`. `scratch` must have
    /// length `n`. No pivoting: callers supply diagonally dominant systems.
    pub fn solve_in_place(&self, rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        debug_assert_eq!(scratch.len(), n);
        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular { row: 0 });
        }
        scratch[0] = self.upper[0] / denom;
        rhs[0] /= denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i] * scratch[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Singular { row: i });
            }
            scratch[i] = self.upper[i] / denom;
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i] * rhs[i + 1];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        // Gaussian elimination with partial pivoting, test oracle only.
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .map(|(row, &bi)| {
                let mut r = row.clone();
                r.push(bi);
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
                .unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
            x[r] = (m[r][n] - s) / m[r][r];
        }
        x
    }

    #[test]
    fn singular_first_pivot_is_reported() {
        let mut t = Tridiagonal::zeros(3);
        t.diag = vec![0.0, 1.0, 1.0];
        let mut rhs = vec![1.0; 3];
        let mut s = vec![0.0; 3];
        assert!(matches!(
            t.solve_in_place(&mut rhs, &mut s),
            Err(Error::Singular { row: 0 })
        ));
    }

    proptest! {
        #[test]
        fn thomas_matches_dense_elimination(
            n in 2usize..12,
            seed in prop::collection::vec(-1.0f64..1.0, 48),
        ) {
            let mut t = Tridiagonal::zeros(n);
            for i in 0..n {
                if i > 0 { t.lower[i] = seed[i]; }
                if i + 1 < n { t.upper[i] = seed[i + 12]; }
                t.diag[i] = 2.5 + seed[i + 24].abs();
            }
            let b: Vec<f64> = seed[36..36 + n].to_vec();
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                dense[i][i] = t.diag[i];
                if i > 0 { dense[i][i - 1] = t.lower[i]; }
                if i + 1 < n { dense[i][i + 1] = t.upper[i]; }
            }
            let expect = dense_solve(&dense, &b);
            let mut x = b.clone();
            let mut s = vec![0.0; n];
            t.solve_in_place(&mut x, &mut s).unwrap();
            for (a, e) in x.iter().zip(&expect) {
                prop_assert!((a - e).abs() < 1e-12);
            }
            let mut back = vec![0.0; n];
            t.apply(&x, &mut back);
            for (a, e) in back.iter().zip(&b) {
                prop_assert!((a - e).abs() < 1e-12);
            }
        }
    }
}
