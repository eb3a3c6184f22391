//! Symmetric positive definite band matrices and their Cholesky factor.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: `entry(p, q)` for `p - bw <= q <= p`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bw: usize,
    // Row p holds columns p - bw ..= p; slot bw is the diagonal.
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, p: usize, q: usize) -> usize {
        debug_assert!(q <= p && p - q <= self.bw);
        p * (self.bw + 1) + self.bw - (p - q)
    }

    /// Adds `v` to entry `(p, q)` (and implicitly `(q, p)`).
    #[inline]
    pub fn add(&mut self, p: usize, q: usize, v: f64) {
        let (p, q) = if p >= q { (p, q) } else { (q, p) };
        let s = self.slot(p, q);
        self.data[s] += v;
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        let (p, q) = if p >= q { (p, q) } else { (q, p) };
        if p - q > self.bw {
            0.0
        } else {
            self.data[self.slot(p, q)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for p in 0..self.n {
            let lo = p.saturating_sub(self.bw);
            for q in lo..p {
                let a = self.data[self.slot(p, q)];
                y[p] += a * x[q];
                y[q] += a * x[p];
            }
            y[p] += self.data[self.slot(p, p)] * x[p];
        }
        y
    }

    /// In-place Cholesky `A = L L^T`; fails if a pivot is not positive.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for p in 0..n {
            let lo = p.saturating_sub(bw);
            for q in lo..=p {
                // L[p][q] = (A[p][q] - sum_k L[p][k] L[q][k]) / L[q][q], k in max(lo, q-bw)..q
                let k0 = lo.max(q.saturating_sub(bw));
                let mut s = self.data[p * w + bw - (p - q)];
                let rp = p * w + bw - p;
                let rq = q * w + bw - q;
                for k in k0..q {
                    s -= self.data[rp + k] * self.data[rq + k];
                }
                if q == p {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "band matrix is not positive definite (pivot {s:e} at row {p})"
                        )));
                    }
                    self.data[rp + p] = s.sqrt();
                } else {
                    self.data[rp + q] = s / self.data[rq + q];
                }
            }
        }
        Ok(BandCholesky { band: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    band: SymBand,
}

impl BandCholesky {
    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.band.n, self.band.bw);
        let w = bw + 1;
        let d = &self.band.data;
        let mut x = b.to_vec();
        for p in 0..n {
            let lo = p.saturating_sub(bw);
            let r = p * w + bw - p;
            let mut s = x[p];
            for k in lo..p {
                s -= d[r + k] * x[k];
            }
            x[p] = s / d[r + p];
        }
        for p in (0..n).rev() {
            let r = p * w + bw - p;
            x[p] /= d[r + p];
            let xp = x[p];
            let lo = p.saturating_sub(bw);
            for k in lo..p {
                x[k] -= d[r + k] * xp;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, bw: usize, seed: u64) -> SymBand {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymBand::zeros(n, bw);
        for p in 0..n {
            for q in p.saturating_sub(bw)..p {
                let v = rng.gen_range(-1.0..1.0);
                a.add(p, q, v);
            }
        }
        for p in 0..n {
            let row: f64 = (0..n).map(|q| a.get(p, q).abs()).sum();
            a.add(p, p, row + 1.0);
        }
        a
    }

    #[test]
    fn solves_random_band_systems() {
        for (n, bw) in [(1, 0), (7, 2), (40, 9), (64, 63)] {
            let a = random_spd(n, bw, n as u64);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x);
            let got = a.clone().cholesky().unwrap().solve(&b);
            let err = x.iter().zip(&got).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} bw={bw}: {err}");
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = SymBand::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(a.cholesky().is_err());
    }
}
