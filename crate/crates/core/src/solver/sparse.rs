use rayon::prelude::*;

/// Chunk length for reductions. Partial sums are combined in chunk order,
/// so results do not depend on the thread count.
const REDUCE_CHUNK: usize = 8192;

/// Compressed sparse rows with `u32` column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn empty(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from unsorted triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            rows[i].push((j as u32, v));
        }
        let mut m = Self::empty(nrows, ncols);
        for (i, mut r) in rows.into_iter().enumerate() {
            merge_row(&mut r);
            for (j, v) in r {
                m.cols.push(j);
                m.vals.push(v);
            }
            m.row_ptr[i + 1] = m.cols.len();
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&(j as u32)) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`, parallel over rows.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let (c, v) = self.row(i);
            let mut acc = 0.0;
            for (j, a) in c.iter().zip(v) {
                acc += a * x[*j as usize];
            }
            *yi = acc;
        });
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.cols {
            count[j as usize + 1] += 1;
        }
        for k in 0..self.ncols {
            count[k + 1] += count[k];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                let slot = &mut next[*j as usize];
                cols[*slot] = i as u32;
                vals[*slot] = *a;
                *slot += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Squared Euclidean norm of every row.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.nrows)
            .into_par_iter()
            .map(|i| self.row(i).1.iter().map(|a| a * a).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                row[*j as usize] = *a;
            }
        }
        d
    }
}

/// Sorts by column, sums duplicates and drops exact zeros.
pub(crate) fn merge_row(r: &mut Vec<(u32, f64)>) {
    r.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(r.len());
    for &(j, v) in r.iter() {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    *r = out;
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let partial: Vec<f64> = a
        .par_chunks(REDUCE_CHUNK)
        .zip(b.par_chunks(REDUCE_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
