//! Banded LU factorisation with partial pivoting.
//!
//! Row `i` is stored densely over columns `i - kl ..= i + ku + kl`; the extra `kl`
//! columns absorb fill-in from row swaps.

use crate::error::{Error, Result};

pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width], pivots: Vec::new(), factored: false }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let (mut kl, mut ku) = (0, 0);
        for &(i, j, _) in entries {
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut m = Self::zeros(n, kl, ku);
        for &(i, j, v) in entries {
            *m.at_mut(i, j) += v;
        }
        m
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // column j lives at offset j - (i - kl) in row i
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let s = self.slot(i, j);
        &mut self.data[s]
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    fn swap_rows(&mut self, a: usize, b: usize, from_col: usize) {
        let last = (a.min(b) + self.kl + self.ku).min(self.n - 1);
        for j in from_col..=last {
            let (sa, sb) = (self.slot(a, j), self.slot(b, j));
            self.data.swap(sa, sb);
        }
    }

    pub fn factor(&mut self) -> Result<()> {
        let n = self.n;
        self.pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for r in k + 1..=last_row {
                let v = self.at(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            self.pivots.push(p);
            if p != k {
                self.swap_rows(k, p, k);
            }
            let piv = self.at(k, k);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            for r in k + 1..=last_row {
                let m = self.at(r, k) / piv;
                if m == 0.0 {
                    continue;
                }
                *self.at_mut(r, k) = m;
                for j in k + 1..=last_col {
                    let u = self.at(k, j);
                    if u != 0.0 {
                        *self.at_mut(r, j) -= m * u;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place; factors first if needed.
    pub fn solve(&mut self, b: &mut [f64]) -> Result<()> {
        if !self.factored {
            self.factor()?;
        }
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last_row = (k + self.kl).min(n - 1);
            for r in k + 1..=last_row {
                b[r] -= self.at(r, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.at(k, j) * b[j];
            }
            b[k] = s / self.at(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_dense_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let (kl, ku) = (3usize, 5usize);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces pivoting
                let v: f64 = if i == j { 0.01 * rng.gen::<f64>() } else { rng.gen::<f64>() - 0.5 };
                dense[(i, j)] = v;
                trip.push((i, j, v));
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x_dense = dense.clone().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        let mut m = BandMatrix::from_triplets(n, &trip);
        let mut x = b.clone();
        m.solve(&mut x).unwrap();
        for i in 0..n {
            assert!((x[i] - x_dense[i]).abs() < 1e-8 * (1.0 + x_dense[i].abs()));
        }
    }
}
