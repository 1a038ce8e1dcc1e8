//! Banded LU with partial pivoting for the pentadiagonal step systems.

use crate::error::{Error, Result};

/// `n × n` matrix with `kl` sub- and `ku` super-diagonals. Row `i` stores
/// columns `i - kl ..= i + kl + ku`; the extra `kl` columns hold pivoting fill.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Solves `A x = b` in place, consuming the factorization.
    pub fn solve(&mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Solver(format!("singular banded system at row {k}")));
            }
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let c = self.get(p, j);
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            for i in k + 1..=last_row {
                let l = self.get(i, k) / piv;
                if l == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
        Ok(())
    }
}
