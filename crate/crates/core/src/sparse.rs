//! Compressed sparse row matrices.

use alloc::vec::Vec;

use crate::dense::dot;

/// Square (or rectangular) CSR matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i as u32, j as u32, v));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Converts to CSR. Summation order of duplicates follows insertion
    /// order, so the result is deterministic.
    pub fn into_csr(mut self) -> CsrMatrix {
        // Stable sort keeps insertion order among duplicates.
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = alloc::vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i as usize + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: alloc::vec![1.0; n],
        }
    }

    pub fn from_dense(n: usize, m: usize, a: &[f64]) -> Self {
        let mut b = TripletBuilder::new(n, m);
        for i in 0..n {
            for j in 0..m {
                if a[i * m + j] != 0.0 {
                    b.push(i, j, a[i * m + j]);
                }
            }
        }
        b.into_csr()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c as usize];
            }
            *yi = s;
        }
    }

    /// `r = b - A x`
    pub fn residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        for (i, ri) in r.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c as usize];
            }
            *ri = b[i] - s;
        }
    }

    /// Row `i` dotted with `x`.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        let mut s = 0.0;
        for (c, v) in cols.iter().zip(vals) {
            s += v * x[*c as usize];
        }
        s
    }

    /// Principal submatrix on the sorted index set `idx`.
    pub fn principal_submatrix(&self, idx: &[u32]) -> CsrMatrix {
        let mut map = alloc::vec![u32::MAX; self.ncols];
        for (local, &g) in idx.iter().enumerate() {
            map[g as usize] = local as u32;
        }
        let mut row_ptr = Vec::with_capacity(idx.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &g in idx {
            let (cols, vals) = self.row(g as usize);
            for (c, v) in cols.iter().zip(vals) {
                let l = map[*c as usize];
                if l != u32::MAX {
                    col_idx.push(l);
                    values.push(*v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: idx.len(), ncols: idx.len(), row_ptr, col_idx, values }
    }

    /// Dense row-major copy (for tests and tiny systems).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = alloc::vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                a[i * self.ncols + *c as usize] = *v;
            }
        }
        a
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `||A - A^T||_inf`
    pub fn asymmetry_inf(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += (v - self.get(*c as usize, i)).abs();
            }
            worst = worst.max(s);
        }
        worst
    }

    /// Quadratic form `x^T A x`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut y = alloc::vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        dot(x, &y)
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(c, v)| (i, *c as usize, *v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(1, 0, 2.0);
        b.push(0, 0, 3.0);
        b.push(0, 1, -1.0);
        let a = b.into_csr();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.to_dense(), alloc::vec![4.0, -1.0, 2.0, 0.0]);
    }

    #[test]
    fn submatrix_matches_dense_selection() {
        let n = 6;
        let dense: Vec<f64> = (0..n * n).map(|k| if (k * 7) % 3 == 0 { k as f64 } else { 0.0 }).collect();
        let a = CsrMatrix::from_dense(n, n, &dense);
        let idx = [1u32, 3, 4];
        let s = a.principal_submatrix(&idx);
        for (li, &gi) in idx.iter().enumerate() {
            for (lj, &gj) in idx.iter().enumerate() {
                assert_eq!(s.get(li, lj), dense[gi as usize * n + gj as usize]);
            }
        }
    }

    #[test]
    fn residual_and_matvec() {
        let a = CsrMatrix::from_dense(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let mut y = [0.0; 2];
        a.mul_vec(&[1.0, 1.0], &mut y);
        assert_eq!(y, [1.0, 1.0]);
        let mut r = [0.0; 2];
        a.residual(&[1.0, 1.0], &[1.0, 1.0], &mut r);
        assert_eq!(r, [0.0, 0.0]);
        assert_eq!(a.asymmetry_inf(), 0.0);
        assert_eq!(a.norm_inf(), 3.0);
    }
}
