//! Banded matrices and pivot-free LU.
//!
//! Storage is diagonal-major: diagonal `d = j - i` (from `-kl` to `ku`) is a
//! contiguous row of length `n` indexed by column. Without pivoting the LU
//! factors stay inside the original band, so factorization is done in place.

use crate::error::{invalid, Error, Result};

/// Pivots smaller than this in magnitude are treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    bands: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if kl >= n {
            return Err(invalid("kl", format!("lower bandwidth {kl} must be below n = {n}")));
        }
        if ku >= n {
            return Err(invalid("ku", format!("upper bandwidth {ku} must be below n = {n}")));
        }
        Ok(BandedMatrix {
            n,
            kl,
            ku,
            bands: vec![0.0; (kl + ku + 1) * n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && i + self.ku >= j
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (j + self.kl - i) * self.n + j
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.bands[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let k = self.checked_idx(i, j)?;
        self.bands[k] = value;
        Ok(())
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let k = self.checked_idx(i, j)?;
        self.bands[k] += value;
        Ok(())
    }

    fn checked_idx(&self, i: usize, j: usize) -> Result<usize> {
        if self.in_band(i, j) {
            Ok(self.idx(i, j))
        } else {
            Err(Error::OutsideBand {
                row: i,
                col: j,
                kl: self.kl,
                ku: self.ku,
            })
        }
    }

    #[inline]
    fn cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.cols(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.cols(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.bands.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// In-band LU without pivoting (Thomas-style elimination generalized to
    /// `kl` sub- and `ku` super-diagonals).
    pub fn lu(mut self) -> Result<BandedLU> {
        let n = self.n;
        let scale = self.max_abs();
        let mut largest = scale;
        for k in 0..n {
            let pivot = self.bands[self.idx(k, k)];
            if !pivot.is_finite() || pivot.abs() < PIVOT_FLOOR {
                return Err(Error::SingularMatrix {
                    index: k,
                    value: pivot,
                });
            }
            let row_end = (k + self.kl + 1).min(n);
            let col_end = (k + self.ku + 1).min(n);
            for i in k + 1..row_end {
                let ik = self.idx(i, k);
                let l = self.bands[ik] / pivot;
                self.bands[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..col_end {
                    let kj = self.bands[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.bands[ij] -= l * kj;
                    largest = largest.max(self.bands[ij].abs());
                }
            }
        }
        let growth_factor = if scale > 0.0 { largest / scale } else { 1.0 };
        Ok(BandedLU {
            factors: self,
            growth_factor,
        })
    }
}

/// Unit-lower `L` and upper `U` sharing the band storage of the original
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedLU {
    factors: BandedMatrix,
    growth_factor: f64,
}

impl BandedLU {
    pub fn n(&self) -> usize {
        self.factors.n
    }

    /// Largest entry magnitude seen during elimination over the largest
    /// entry of the input.
    pub fn growth_factor(&self) -> f64 {
        self.growth_factor
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => self.factors.get(i, j),
            std::cmp::Ordering::Less => 0.0,
        }
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        if j >= i {
            self.factors.get(i, j)
        } else {
            0.0
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let a = &self.factors;
        let n = a.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        for i in 1..n {
            let mut acc = x[i];
            for j in i.saturating_sub(a.kl)..i {
                acc -= a.bands[a.idx(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..(i + a.ku + 1).min(n) {
                acc -= a.bands[a.idx(i, j)] * x[j];
            }
            x[i] = acc / a.bands[a.idx(i, i)];
        }
        Ok(())
    }
}

/// Dense Gaussian elimination with partial pivoting. Reference solver for
/// checking the banded path.
pub fn solve_dense(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: row.len(),
        });
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if !(a[p][k].abs() > f64::EPSILON * scale * n as f64) {
            return Err(Error::SingularMatrix {
                index: k,
                value: a[p][k],
            });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            if l == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_dense(d: &[Vec<f64>], kl: usize, ku: usize) -> BandedMatrix {
        let mut m = BandedMatrix::new(d.len(), kl, ku).unwrap();
        for (i, row) in d.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.set(i, j, v).unwrap();
                }
            }
        }
        m
    }

    fn random_banded(rng: &mut ChaCha8Rng, n: usize, kl: usize, ku: usize) -> BandedMatrix {
        let mut m = BandedMatrix::new(n, kl, ku).unwrap();
        for i in 0..n {
            let mut off = 0.0;
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                if i != j {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    m.set(i, j, v).unwrap();
                }
            }
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            m.set(i, i, sign * (off + rng.gen_range(0.5..2.0))).unwrap();
        }
        m
    }

    #[test]
    fn construction() {
        let m = BandedMatrix::new(3, 1, 1).unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.0; 3]; 3]);
        let n = 2 * 3000 + 2;
        let m = BandedMatrix::new(n, 3, 3).unwrap();
        assert_eq!((m.n(), m.kl(), m.ku()), (n, 3, 3));
        assert!(BandedMatrix::new(1, 0, 0).is_ok());
        assert!(BandedMatrix::new(3, 3, 1).is_err());
        assert!(BandedMatrix::new(3, 0, 5).is_err());
        assert!(BandedMatrix::new(0, 0, 0).is_err());
    }

    #[test]
    fn writes_outside_band_rejected() {
        let mut m = BandedMatrix::new(5, 1, 2).unwrap();
        assert!(m.set(0, 2, 1.0).is_ok());
        assert!(matches!(m.set(0, 3, 1.0), Err(Error::OutsideBand { .. })));
        assert!(matches!(m.set(2, 0, 1.0), Err(Error::OutsideBand { .. })));
        assert!(m.set(5, 5, 1.0).is_err());
        assert_eq!(m.get(4, 0), 0.0);
    }

    #[test]
    fn identity_factors() {
        let mut m = BandedMatrix::new(2, 1, 1).unwrap();
        m.set(0, 0, 1.0).unwrap();
        m.set(1, 1, 1.0).unwrap();
        let lu = m.lu().unwrap();
        assert_eq!(lu.growth_factor(), 1.0);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_eq!(lu.lower(i, j), e);
                assert_eq!(lu.upper(i, j), e);
            }
        }
        assert_eq!(lu.solve(&[4.0, -1.0]).unwrap(), vec![4.0, -1.0]);
    }

    #[test]
    fn two_by_two() {
        let d = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let lu = from_dense(&d, 1, 1).lu().unwrap();
        // L = [[1,0],[1/2,1]], U = [[2,1],[0,3/2]]
        assert_eq!(lu.lower(1, 0), 0.5);
        assert_eq!(lu.upper(1, 1), 1.5);
        let x = lu.solve(&[1.0, 1.0]).unwrap();
        let oracle = solve_dense(&d, &[1.0, 1.0]).unwrap();
        for k in 0..2 {
            assert!((x[k] - 1.0 / 3.0).abs() < 1e-15);
            assert!((x[k] - oracle[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_first_pivot() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        match from_dense(&d, 1, 1).lu() {
            Err(Error::SingularMatrix { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected singular matrix, got {other:?}"),
        }
    }

    #[test]
    fn length_mismatch() {
        let mut m = BandedMatrix::new(2, 0, 0).unwrap();
        m.set(0, 0, 1.0).unwrap();
        m.set(1, 1, 1.0).unwrap();
        let lu = m.lu().unwrap();
        assert!(matches!(
            lu.solve(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn dense_oracle_basics() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(solve_dense(&id, &[3.0, 7.0]).unwrap(), vec![3.0, 7.0]);
        let perm = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(solve_dense(&perm, &[3.0, 7.0]).unwrap(), vec![7.0, 3.0]);
        let sing = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&sing, &[1.0, 1.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let b: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_dense(&a, &b).unwrap();
        let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let an = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        for i in 0..8 {
            let r: f64 = (0..8).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() <= 1e-12 * (an * xn + 1.0));
        }
    }

    #[test]
    fn reconstruction_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(4..40);
            let a = random_banded(&mut rng, n, 3, 3);
            let norm = a.norm_inf();
            let lu = a.clone().lu().unwrap();
            for i in 0..n {
                for j in 0..n {
                    let lu_ij: f64 = (0..n).map(|k| lu.lower(i, k) * lu.upper(k, j)).sum();
                    assert!((lu_ij - a.get(i, j)).abs() <= 1e-12 * norm);
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let x = lu.solve(&b).unwrap();
            let ax = a.matvec(&x).unwrap();
            let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                assert!((ax[i] - b[i]).abs() <= 1e-10 * (norm * xn + bn));
            }
        }
    }

    #[test]
    fn twelve_by_twelve_against_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_banded(&mut rng, 12, 3, 3);
        let b: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = a.clone().lu().unwrap().solve(&b).unwrap();
        let y = solve_dense(&a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() <= 1e-11 * v.abs().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn deterministic_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_banded(&mut rng, 30, 3, 3);
        let f1 = a.clone().lu().unwrap();
        let f2 = a.lu().unwrap();
        assert_eq!(f1, f2);
    }
}
