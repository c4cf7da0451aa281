//! Preconditioned conjugate gradients.

use alloc::vec::Vec;

use crate::dense::{axpy, dot, norm2};
use crate::mg::cycle::Multigrid;
use crate::mg::report::SolveReport;
use crate::mg::smoother::Smoother;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum Preconditioner<'a> {
    None,
    /// One application of `M^{-1}` of a single-level smoother.
    Smoother(&'a Smoother),
    /// One V-cycle.
    Multigrid(&'a Multigrid),
}

impl Preconditioner<'_> {
    fn apply(&self, a: &CsrMatrix, r: &[f64], z: &mut [f64]) -> Result<()> {
        match self {
            Preconditioner::None => z.copy_from_slice(r),
            Preconditioner::Smoother(s) => s.apply_inverse(a, r, z),
            Preconditioner::Multigrid(mg) => z.copy_from_slice(&mg.v_cycle(r)?),
        }
        Ok(())
    }
}

/// Conjugate gradients from `x = 0` until `||r|| / ||b|| < tol`.
pub fn pcg(a: &CsrMatrix, b: &[f64], pre: &Preconditioner<'_>, tol: f64, max_it: usize) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let mut x = alloc::vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((x, SolveReport::from_history(alloc::vec![0.0], true, false)));
    }
    let mut r = b.to_vec();
    let mut z = alloc::vec![0.0; n];
    let mut q = alloc::vec![0.0; n];
    pre.apply(a, &r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = alloc::vec![1.0];
    let mut converged = false;
    for _ in 0..max_it {
        a.mul_vec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Indefinite(pq));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel < tol {
            converged = true;
            break;
        }
        if !rel.is_finite() {
            break;
        }
        pre.apply(a, &r, &mut z)?;
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            return Err(Error::Indefinite(rz_new));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok((x, SolveReport::from_history(history, converged, false)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_cg_converges_in_n_steps() {
        let n = 8;
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0 + i as f64;
            if i > 0 {
                d[i * n + i - 1] = -1.0;
                d[(i - 1) * n + i] = -1.0;
            }
        }
        let a = CsrMatrix::from_dense(n, n, &d);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let (x, rep) = pcg(&a, &b, &Preconditioner::None, 1e-12, 100).unwrap();
        assert!(rep.converged && rep.iterations <= n);
        let mut r = alloc::vec![0.0; n];
        a.residual(&b, &x, &mut r);
        assert!(norm2(&r) < 1e-10);
    }

    #[test]
    fn indefinite_is_detected() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(pcg(&a, &[0.0, 1.0], &Preconditioner::None, 1e-12, 10), Err(Error::Indefinite(_))));
    }
}
