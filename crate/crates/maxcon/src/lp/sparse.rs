//! Compressed sparse row storage for constraint matrices.

/// Sparse matrix in CSR layout. Rows are stored contiguously with sorted,
/// duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triplets. Duplicate entries are
    /// summed; explicit zeros are kept out of the structure.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            if v != 0.0 {
                rows[r].push((c as u32, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut entries in rows {
            entries.sort_unstable_by_key(|&(c, _)| c);
            let mut last: Option<u32> = None;
            for (c, v) in entries {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds from dense row slices; zeros are dropped.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let triplets = rows.iter().enumerate().flat_map(|(i, row)| {
            assert_eq!(row.len(), ncols, "ragged dense rows");
            row.iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(move |(j, &v)| (i, j, v))
        });
        Self::from_triplets(nrows, ncols, triplets)
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

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c as usize];
            }
            y[r] = acc;
        }
    }

    /// Inner product of row `r` with `x`.
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter()
            .zip(vals)
            .map(|(&c, &v)| v * x[c as usize])
            .sum()
    }

    /// y = A^T x
    pub fn tr_matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c as usize] += v * xr;
            }
        }
    }

    /// Scales row `r` in place by `factor`.
    pub fn scale_row(&mut self, r: usize, factor: f64) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        for v in &mut self.values[lo..hi] {
            *v *= factor;
        }
    }

    /// Max absolute value in row `r`; 0.0 for an empty row.
    pub fn row_inf_norm(&self, r: usize) -> f64 {
        let (_, vals) = self.row(r);
        vals.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[r][c as usize] = v;
            }
        }
        out
    }
}
