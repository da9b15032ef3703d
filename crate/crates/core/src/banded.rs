//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: the factor needs `kl` extra
//! super-diagonals for fill-in from row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major over matrix rows; each row stores columns `i − kl ..= i + ku + kl`.
    data: Vec<f64>,
    width: usize,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * width],
            width,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let off = col as isize - row as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width {
            None
        } else {
            Some(row * self.width + off as usize)
        }
    }

    /// Adds `value` at `(row, col)`; panics when outside the declared band.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let d = col as isize - row as isize;
        assert!(
            d >= -(self.kl as isize) && d <= self.ku as isize,
            "entry ({row}, {col}) outside band"
        );
        let s = self.slot(row, col).expect("in band");
        self.data[s] += value;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.slot(row, col).map_or(0.0, |s| self.data[s])
    }

    /// `y = A x`, for the matrix as assembled (before factorization).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    /// Scales every row to unit max-norm, applying the same scale to `rhs`.
    pub fn equilibrate_rows(&mut self, rhs: &mut [f64]) {
        for r in 0..self.n {
            let row = &mut self.data[r * self.width..(r + 1) * self.width];
            let m = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m > 0.0 {
                row.iter_mut().for_each(|v| *v /= m);
                rhs[r] /= m;
            }
        }
    }

    /// Solves `A x = b` in place, consuming the matrix.
    pub fn solve(mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let reach = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularSystem { row: k });
            }
            let col_end = (k + reach).min(n - 1);
            if piv != k {
                for c in k..=col_end {
                    let a = self.slot(k, c).expect("band");
                    let p = self.slot(piv, c).expect("band");
                    self.data.swap(a, p);
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last {
                let s = self.slot(r, k).expect("band");
                let factor = self.data[s] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[s] = 0.0;
                let kbase = k * self.width;
                let rbase = r * self.width;
                for c in k + 1..=col_end {
                    let ko = kbase + (c + kl - k);
                    let ro = rbase + (c + kl - r);
                    self.data[ro] -= factor * self.data[ko];
                }
                b[r] -= factor * b[k];
            }
        }
        for k in (0..n).rev() {
            let col_end = (k + reach).min(n - 1);
            let mut s = b[k];
            for c in k + 1..=col_end {
                s -= self.get(k, c) * b[c];
            }
            b[k] = s / self.get(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn solves_random_banded_systems(
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
            n in 5usize..40,
            kl in 0usize..4,
            ku in 0usize..4,
        ) {
            let mut a = BandMatrix::zeros(n, kl, ku);
            let mut k = 0;
            let mut next = || { k += 1; seed[k % seed.len()] };
            for r in 0..n {
                for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                    let v = next() + if r == c { 0.1 } else { 0.0 };
                    a.add(r, c, v);
                }
            }
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut b = a.mul_vec(&x);
            if a.clone().solve(&mut b).is_ok() && b.iter().all(|v| v.abs() < 1e6) {
                let resid: f64 = a.mul_vec(&b).iter().zip(a.mul_vec(&x)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                prop_assert!(resid < 1e-6);
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 2, 1.0);
        a.add(2, 1, 1.0);
        a.add(2, 2, 1.0);
        let mut b = vec![2.0, 4.0, 5.0];
        a.solve(&mut b).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14 && (b[1] - 2.0).abs() < 1e-14 && (b[2] - 3.0).abs() < 1e-14);
    }
}
