//! Small banded-matrix helpers for the radial stiffness matrix and the
//! Crank-Nicolson solves.

use num_complex::Complex64;

/// Square band matrix with equal lower and upper half-bandwidth.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    // row-major, entry (i, j) at i * (2bw+1) + (j + bw - i)
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = 2 * self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += row[j + self.bw - i] * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_c(&self, x: &[Complex64], y: &mut [Complex64]) {
        let w = 2 * self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += x[j] * row[j + self.bw - i];
            }
            y[i] = acc;
        }
    }

    /// Largest |A_ij - A_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=(i + self.bw).min(self.n - 1) {
                num = num.max((self.get(i, j) - self.get(j, i)).abs());
                den = den.max(self.get(i, j).abs());
            }
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// LU factors (no pivoting) of the complex band matrix `diag(m) + z * S`.
///
/// With `m > 0` and `S` symmetric positive semidefinite the Hermitian part
/// of the matrix is positive definite for `Re z >= 0`, so elimination
/// without pivoting is safe.
#[derive(Debug, Clone)]
pub struct ComplexBandLu {
    n: usize,
    bw: usize,
    lu: Vec<Complex64>,
}

impl ComplexBandLu {
    pub fn new(m: &[f64], z: Complex64, s: &BandMatrix) -> Option<Self> {
        let n = s.n();
        let bw = s.bandwidth();
        let w = 2 * bw + 1;
        let mut lu = vec![Complex64::new(0.0, 0.0); n * w];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                let mut v = z * s.get(i, j);
                if i == j {
                    v += m[i];
                }
                lu[i * w + j + bw - i] = v;
            }
        }
        for k in 0..n {
            let piv = lu[k * w + bw];
            if piv.norm() == 0.0 || !piv.is_finite() {
                return None;
            }
            for i in (k + 1)..=(k + bw).min(n - 1) {
                let l = lu[i * w + k + bw - i] / piv;
                lu[i * w + k + bw - i] = l;
                for j in (k + 1)..=(k + bw).min(n - 1) {
                    let u = lu[k * w + j + bw - k];
                    lu[i * w + j + bw - i] -= l * u;
                }
            }
        }
        Some(Self { n, bw, lu })
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let (n, bw) = (self.n, self.bw);
        let w = 2 * bw + 1;
        for i in 0..n {
            let mut acc = x[i];
            for k in i.saturating_sub(bw)..i {
                acc -= self.lu[i * w + k + bw - i] * x[k];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..=(i + bw).min(n - 1) {
                acc -= self.lu[i * w + j + bw - i] * x[j];
            }
            x[i] = acc / self.lu[i * w + bw];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_lu_solves_tridiagonal() {
        let n = 6;
        let mut s = BandMatrix::zeros(n, 1);
        for i in 0..n {
            s.add(i, i, 2.0);
            if i + 1 < n {
                s.add(i, i + 1, -1.0);
                s.add(i + 1, i, -1.0);
            }
        }
        let m = vec![1.0; n];
        let z = Complex64::new(0.0, 0.3);
        let lu = ComplexBandLu::new(&m, z, &s).unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        s.matvec_c(&x, &mut b);
        for i in 0..n {
            b[i] = b[i] * z + x[i] * m[i];
        }
        lu.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).norm() < 1e-13);
        }
    }
}
