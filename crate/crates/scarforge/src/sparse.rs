//! Row-compressed complex sparse matrices with deterministic column order.

use rayon::prelude::*;

use crate::dense::DMat;
use crate::{Error, Result, C64};

/// Entries at or below this magnitude are dropped at assembly.
pub const DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, n, (0..n).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect(), 0.0)
    }

    /// Sums duplicate `(row, col)` entries and drops those with magnitude
    /// `<= drop`.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, C64)>, drop: f64) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            rows[r].push((c, v));
        }
        Self::from_rows(nrows, ncols, rows, drop)
    }

    /// Assembles from unsorted per-row entry lists.
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, C64)>>, drop: f64) -> Self {
        let rows: Vec<Vec<(usize, C64)>> = rows.into_par_iter().map(|r| compact_row(r, drop)).collect();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                debug_assert!(c < ncols);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn from_dense(m: &DMat, drop: f64) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self::from_rows(m.nrows(), m.ncols(), rows, drop)
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

    /// Column indices and values of a row.
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> DMat {
        let mut m = crate::dense::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.ncols];
        for (i, j, v) in self.iter() {
            rows[j].push((i, v.conj()));
        }
        Self::from_rows(self.ncols, self.nrows, rows, 0.0)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: C64, other: &Self, b: C64, drop: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let rows = (0..self.nrows)
            .into_par_iter()
            .map(|i| {
                let (c1, v1) = self.row(i);
                let (c2, v2) = other.row(i);
                let mut out = Vec::with_capacity(c1.len() + c2.len());
                let (mut p, mut q) = (0, 0);
                while p < c1.len() || q < c2.len() {
                    if q == c2.len() || (p < c1.len() && c1[p] < c2[q]) {
                        out.push((c1[p], a * v1[p]));
                        p += 1;
                    } else if p == c1.len() || c2[q] < c1[p] {
                        out.push((c2[q], b * v2[q]));
                        q += 1;
                    } else {
                        out.push((c1[p], a * v1[p] + b * v2[q]));
                        p += 1;
                        q += 1;
                    }
                }
                out.retain(|(_, v)| v.norm() > drop);
                out
            })
            .collect();
        Ok(self.assemble_sorted(self.nrows, self.ncols, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpby(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0), 0.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpby(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0), 0.0)
    }

    fn assemble_sorted(&self, nrows: usize, ncols: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in rows {
            for (c, v) in r {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    /// `self · other`, dropping entries with magnitude `<= drop`.
    pub fn matmul(&self, other: &Self, drop: f64) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!("{}x{} · {}x{}", self.nrows, self.ncols, other.nrows, other.ncols)));
        }
        let n = other.ncols;
        let rows: Vec<Vec<(usize, C64)>> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![C64::new(0.0, 0.0); n], vec![false; n], Vec::<usize>::new()),
                |(acc, mark, touched), i| {
                    let (ca, va) = self.row(i);
                    for (&k, &a) in ca.iter().zip(va) {
                        let (cb, vb) = other.row(k);
                        for (&j, &b) in cb.iter().zip(vb) {
                            if !mark[j] {
                                mark[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut out = Vec::with_capacity(touched.len());
                    for &j in touched.iter() {
                        let v = acc[j];
                        if v.norm() > drop {
                            out.push((j, v));
                        }
                        acc[j] = C64::new(0.0, 0.0);
                        mark[j] = false;
                    }
                    touched.clear();
                    out
                },
            )
            .collect();
        Ok(self.assemble_sorted(self.nrows, n, rows))
    }

    /// `[self, other]` with entries below `rel_drop · max|entry|` removed.
    pub fn commutator(&self, other: &Self, rel_drop: f64) -> Result<Self> {
        let ab = self.matmul(other, 0.0)?;
        let ba = other.matmul(self, 0.0)?;
        let c = ab.sub(&ba)?;
        let cut = rel_drop * c.max_abs();
        Ok(c.filtered(cut.max(DROP_TOL)))
    }

    /// Removes entries with magnitude `<= cut`.
    pub fn filtered(&self, cut: f64) -> Self {
        let rows = (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).filter(|(_, v)| v.norm() > cut).map(|(&c, &v)| (c, v)).collect()
            })
            .collect();
        self.assemble_sorted(self.nrows, self.ncols, rows)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .into_par_iter()
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    /// Largest `|self - self†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for (i, j, v) in self.iter() {
            err = err.max((v - self.get(j, i).conj()).norm());
        }
        err
    }

    /// Sub-block with the given rows and columns (positions are kept in the
    /// order supplied).
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut colmap = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            colmap[c] = k;
        }
        let out = rows
            .iter()
            .map(|&i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(&c, _)| colmap[c] != usize::MAX)
                    .map(|(&c, &v)| (colmap[c], v))
                    .collect()
            })
            .collect();
        Self::from_rows(rows.len(), cols.len(), out, 0.0)
    }

    /// Squared Frobenius norm of the block selected by row and column masks.
    pub fn masked_norm_sqr(&self, row_mask: &[bool], col_mask: &[bool]) -> f64 {
        self.iter()
            .filter(|&(i, j, _)| row_mask[i] && col_mask[j])
            .map(|(_, _, v)| v.norm_sqr())
            .sum()
    }
}

fn compact_row(mut r: Vec<(usize, C64)>, drop: f64) -> Vec<(usize, C64)> {
    r.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(r.len());
    for (c, v) in r {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| v.norm() > drop);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample(n: usize, seed: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let h = (i * 31 + j * 17 + seed * 7) % 11;
                if h < 3 {
                    t.push((i, j, c(h as f64 - 1.0, (i + j) as f64 * 0.1)));
                }
            }
        }
        SparseOperator::from_triplets(n, n, t, DROP_TOL)
    }

    #[test]
    fn triplets_merge_and_drop() {
        let m = SparseOperator::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(1e-15, 0.0))], DROP_TOL);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0, 0.0));
    }

    #[test]
    fn products_match_dense() {
        let (a, b) = (sample(9, 1), sample(9, 2));
        let p = a.matmul(&b, 0.0).unwrap();
        assert!(dense::max_abs_diff(&p.to_dense(), &(a.to_dense() * b.to_dense())) < 1e-12);
        let k = a.commutator(&b, 0.0).unwrap();
        assert!(dense::max_abs_diff(&k.to_dense(), &dense::commutator(&a.to_dense(), &b.to_dense())) < 1e-12);
        let s = a.axpby(c(2.0, 0.0), &b, c(0.0, -1.0), 0.0).unwrap();
        let want = &dense::scale(&a.to_dense(), c(2.0, 0.0)) + &dense::scale(&b.to_dense(), c(0.0, -1.0));
        assert!(dense::max_abs_diff(&s.to_dense(), &want) < 1e-12);
        assert!(dense::max_abs_diff(&a.adjoint().to_dense(), &dense::adjoint(&a.to_dense())) < 1e-15);
    }

    #[test]
    fn matvec_and_blocks() {
        let a = sample(7, 3);
        let x: Vec<C64> = (0..7).map(|i| c(i as f64, 1.0)).collect();
        let y = a.matvec(&x);
        let d = a.to_dense();
        for i in 0..7 {
            let want: C64 = (0..7).map(|j| d[(i, j)] * x[j]).sum();
            assert!((y[i] - want).norm() < 1e-12);
        }
        let blk = a.block(&[4, 1], &[0, 6]);
        assert_eq!(blk.get(0, 1), a.get(4, 6));
        assert_eq!(blk.get(1, 0), a.get(1, 0));
        let mask: Vec<bool> = (0..7).map(|i| i % 2 == 0).collect();
        let all = vec![true; 7];
        assert!((a.masked_norm_sqr(&all, &all) - a.frobenius().powi(2)).abs() < 1e-12);
        assert!(a.masked_norm_sqr(&mask, &all) <= a.frobenius().powi(2));
    }
}
