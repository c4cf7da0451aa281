//! Small dense kernels: packed Cholesky factorization of symmetric positive
//! definite blocks.

use alloc::vec::Vec;

/// Lower Cholesky factor `L` of an SPD matrix, packed row by row
/// (`L[i][j]` at `i (i + 1) / 2 + j` for `j <= i`).
#[derive(Debug, Clone, PartialEq)]
pub struct PackedCholesky {
    n: usize,
    data: Vec<f64>,
}

/// A non-positive pivot met during factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
    pub value: f64,
}

#[inline]
fn tri(i: usize) -> usize {
    i * (i + 1) / 2
}

impl PackedCholesky {
    /// Factorizes the symmetric matrix whose lower triangle is given packed
    /// row by row. The buffer is overwritten in place.
    pub fn factor_packed(n: usize, mut data: Vec<f64>) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(data.len(), tri(n));
        for i in 0..n {
            let ri = tri(i);
            for j in 0..=i {
                let rj = tri(j);
                let mut s = data[ri + j];
                let (li, lj) = (&data[ri..ri + j], &data[rj..rj + j]);
                s -= dot(li, lj);
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(NotPositiveDefinite { pivot: i, value: s });
                    }
                    data[ri + i] = libm::sqrt(s);
                } else {
                    data[ri + j] = s / data[rj + j];
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Factorizes a dense row-major `n x n` symmetric matrix (only the lower
    /// triangle is read).
    pub fn factor_dense(n: usize, a: &[f64]) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.len(), n * n);
        let mut data = Vec::with_capacity(tri(n));
        for i in 0..n {
            data.extend_from_slice(&a[i * n..i * n + i + 1]);
        }
        Self::factor_packed(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let ri = tri(i);
            let s = x[i] - dot(&self.data[ri..ri + i], &x[..i]);
            x[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            x[i] /= self.data[tri(i) + i];
            let xi = x[i];
            let ri = tri(i);
            for (xj, lij) in x[..i].iter_mut().zip(&self.data[ri..ri + i]) {
                *xj -= lij * xi;
            }
        }
    }

    /// Smallest and largest diagonal entry of `L`.
    pub fn pivot_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..self.n {
            let d = self.data[tri(i) + i];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators; keeps the reduction order fixed and vectorizable.
    let n = a.len().min(b.len());
    let chunks = n / 4;
    let mut acc = [0.0f64; 4];
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> Vec<f64> {
        // B^T B + n I from a cheap LCG.
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b: Vec<f64> = (0..n * n).map(|_| next()).collect();
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += b[k * n + i] * b[k * n + j];
                }
                a[i * n + j] = v + if i == j { n as f64 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn solves_spd_system() {
        for n in [1, 2, 5, 17, 40] {
            let a = spd(n, n as u64);
            let f = PackedCholesky::factor_dense(n, &a).unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
            let mut b = alloc::vec![0.0; n];
            for i in 0..n {
                b[i] = dot(&a[i * n..(i + 1) * n], &x_true);
            }
            f.solve_in_place(&mut b);
            for i in 0..n {
                assert!((b[i] - x_true[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        let e = PackedCholesky::factor_dense(2, &a).unwrap_err();
        assert_eq!(e.pivot, 1);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..13).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..13).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}
