//! Banded complex linear systems.
//!
//! The Floquet recursion produces a pentadiagonal matrix, and ordering the
//! dot site next to its contact site keeps the lattice Hamiltonian banded as
//! well, so one Gaussian elimination with partial pivoting serves both.

use num_traits::Zero;

use crate::{Complex, Error, Real, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` slots hold
/// the fill-in created by row interchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![Complex::zero(); n * (2 * kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if i < self.n && j < self.n && off >= 0 && (off as usize) < self.width() {
            Some(i * self.width() + off as usize)
        } else {
            None
        }
    }

    /// Entry `(i, j)`; zero outside the stored band.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.slot(i, j).map_or(Complex::zero(), |s| self.data[s])
    }

    /// Sets entry `(i, j)`. Panics if it lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        let inside = j + self.kl >= i && j <= i + self.ku;
        let s = self.slot(i, j).filter(|_| inside);
        match s {
            Some(s) => self.data[s] = v,
            None => panic!("entry ({i}, {j}) outside band (kl={}, ku={})", self.kl, self.ku),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).fold(Complex::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    /// Solves `A x = rhs` in place, consuming the matrix.
    pub fn solve(self, rhs: &mut [Complex<T>]) -> Result<()> {
        self.factor()?.solve(rhs);
        Ok(())
    }

    /// LU factorisation with partial pivoting (row interchanges limited to
    /// the `kl` rows below the diagonal).
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, reach, width) = (self.kl, self.ku + self.kl, self.width());
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let tiny = scale * T::epsilon() * T::lit(1e-3);
        let at = |i: usize, j: usize| i * width + j + kl - i;
        let mut piv = Vec::with_capacity(n);
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut best_row = c;
            let mut best = self.data[at(c, c)].norm();
            for r in c + 1..=last {
                let v = self.data[at(r, c)].norm();
                if v > best {
                    best = v;
                    best_row = r;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular { pivot: c });
            }
            piv.push(best_row);
            let right = (c + reach).min(n - 1);
            if best_row != c {
                for j in c..=right {
                    self.data.swap(at(c, j), at(best_row, j));
                }
            }
            let d = self.data[at(c, c)];
            for r in c + 1..=last {
                let f = self.data[at(r, c)] / d;
                self.data[at(r, c)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in c + 1..=right {
                    let u = self.data[at(c, j)];
                    let s = at(r, j);
                    self.data[s] = self.data[s] - f * u;
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// Factorised band matrix, reusable for many right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    /// Solves `A x = rhs` in place.
    pub fn solve(&self, rhs: &mut [Complex<T>]) {
        let m = &self.m;
        let n = m.n;
        assert_eq!(rhs.len(), n, "right-hand side length mismatch");
        let (kl, reach, width) = (m.kl, m.ku + m.kl, m.width());
        let at = |i: usize, j: usize| i * width + j + kl - i;
        for c in 0..n {
            rhs.swap(c, self.piv[c]);
            let x = rhs[c];
            for r in c + 1..=(c + kl).min(n - 1) {
                rhs[r] = rhs[r] - m.data[at(r, c)] * x;
            }
        }
        for c in (0..n).rev() {
            let mut acc = rhs[c];
            for j in c + 1..=(c + reach).min(n - 1) {
                acc = acc - m.data[at(c, j)] * rhs[j];
            }
            rhs[c] = acc / m.data[at(c, c)];
        }
    }
}

/// Dense Gaussian elimination with partial pivoting, for cross-checks.
pub fn dense_solve<T: Real>(mut a: Vec<Vec<Complex<T>>>, mut b: Vec<Complex<T>>) -> Result<Vec<Complex<T>>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].norm().partial_cmp(&a[j][c].norm()).unwrap())
            .unwrap();
        if a[piv][c].is_zero() {
            return Err(Error::Singular { pivot: c });
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                let v = a[c][j];
                a[r][j] = a[r][j] - f * v;
            }
            b[r] = b[r] - f * b[c];
        }
    }
    for c in (0..n).rev() {
        let mut acc = b[c];
        for j in c + 1..n {
            acc = acc - a[c][j] * b[j];
        }
        b[c] = acc / a[c][c];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn sample(n: usize) -> BandMatrix<f64> {
        let mut m = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let x = (i * 7 + j * 3) as f64;
                // weak diagonal forces row interchanges
                let d = if i == j { 0.1 } else { 1.0 };
                m.set(i, j, C64::new(d * x.sin(), (0.5 * x).cos()));
            }
        }
        m
    }

    #[test]
    fn matches_dense_solution() {
        let n = 17;
        let m = sample(n);
        let rhs: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let dense: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
        let want = dense_solve(dense, rhs.clone()).unwrap();
        let mut got = rhs.clone();
        m.clone().solve(&mut got).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
        let back = m.mul_vec(&got);
        for (b, r) in back.iter().zip(&rhs) {
            assert!((b - r).norm() < 1e-10);
        }
    }

    #[test]
    fn factor_reused_for_several_rhs() {
        let n = 12;
        let m = sample(n);
        let lu = m.clone().factor().unwrap();
        for shift in 0..3 {
            let rhs: Vec<C64> = (0..n).map(|i| C64::new((i + shift) as f64, -1.0)).collect();
            let mut x = rhs.clone();
            lu.solve(&mut x);
            for (b, r) in m.mul_vec(&x).iter().zip(&rhs) {
                assert!((b - r).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let m = BandMatrix::<f64>::zeros(4, 1, 1);
        let mut rhs = vec![C64::new(1.0, 0.0); 4];
        assert!(matches!(m.solve(&mut rhs), Err(Error::Singular { .. })));
    }

    #[test]
    #[should_panic]
    fn outside_band_panics() {
        let mut m = BandMatrix::<f64>::zeros(5, 1, 1);
        m.set(0, 3, C64::new(1.0, 0.0));
    }
}
