//! Sparse LDL^T factorization of symmetric positive definite systems.
//!
//! Up-looking simplicial factorization driven by the elimination tree. The
//! input is the upper triangle of the matrix in compressed sparse column
//! form; the symbolic step (etree + column counts) is done once per sparsity
//! pattern, the numeric step once per set of values.

/// Elimination tree and column pointers of L for a fixed sparsity pattern.
pub struct SymbolicLdl {
    n: usize,
    parent: Vec<i64>,
    /// Column pointers of L (length n + 1).
    pub col_ptr: Vec<usize>,
}

impl SymbolicLdl {
    /// Analyzes the upper-triangular CSC pattern (`col_ptr_a`, `row_idx_a`).
    pub fn analyze(n: usize, col_ptr_a: &[usize], row_idx_a: &[u32]) -> Self {
        let mut parent = vec![-1i64; n];
        let mut flag = vec![u32::MAX; n];
        let mut counts = vec![0usize; n];
        for k in 0..n {
            parent[k] = -1;
            flag[k] = k as u32;
            for p in col_ptr_a[k]..col_ptr_a[k + 1] {
                let mut i = row_idx_a[p] as usize;
                while i < k {
                    if flag[i] == k as u32 {
                        break;
                    }
                    flag[i] = k as u32;
                    if parent[i] == -1 {
                        parent[i] = k as i64;
                    }
                    counts[i] += 1;
                    i = parent[i] as usize;
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        SymbolicLdl {
            n,
            parent,
            col_ptr,
        }
    }

    pub fn l_nnz(&self) -> usize {
        self.col_ptr[self.n]
    }
}

/// Numeric factor L (unit lower triangular, CSC) and diagonal D.
pub struct NumericLdl {
    n: usize,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    diag: Vec<f64>,
    // scratch
    y: Vec<f64>,
    pattern: Vec<u32>,
    flag: Vec<u32>,
    fill: Vec<usize>,
}

impl NumericLdl {
    pub fn new(symbolic: &SymbolicLdl) -> Self {
        NumericLdl {
            n: symbolic.n,
            row_idx: vec![0; symbolic.l_nnz()],
            values: vec![0.0; symbolic.l_nnz()],
            diag: vec![0.0; symbolic.n],
            y: vec![0.0; symbolic.n],
            pattern: vec![0; symbolic.n],
            flag: vec![u32::MAX; symbolic.n],
            fill: vec![0; symbolic.n],
        }
    }

    /// Factors the matrix with the same pattern that `symbolic` was built
    /// from. Returns Err(k) if pivot k is not positive.
    pub fn factor(
        &mut self,
        symbolic: &SymbolicLdl,
        col_ptr_a: &[usize],
        row_idx_a: &[u32],
        values_a: &[f64],
    ) -> Result<(), usize> {
        let n = self.n;
        let lp = &symbolic.col_ptr;
        let parent = &symbolic.parent;
        self.fill.fill(0);
        for k in 0..n {
            self.y[k] = 0.0;
            let mut top = n;
            self.flag[k] = k as u32;
            for p in col_ptr_a[k]..col_ptr_a[k + 1] {
                let mut i = row_idx_a[p] as usize;
                debug_assert!(i <= k, "matrix must be upper triangular");
                self.y[i] += values_a[p];
                let mut len = 0usize;
                while self.flag[i] != k as u32 {
                    self.pattern[len] = i as u32;
                    len += 1;
                    self.flag[i] = k as u32;
                    i = parent[i] as usize;
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    self.pattern[top] = self.pattern[len];
                }
            }
            let mut dk = self.y[k];
            self.y[k] = 0.0;
            for t in top..n {
                let i = self.pattern[t] as usize;
                let yi = self.y[i];
                self.y[i] = 0.0;
                let p2 = lp[i] + self.fill[i];
                for p in lp[i]..p2 {
                    self.y[self.row_idx[p] as usize] -= self.values[p] * yi;
                }
                let l_ki = yi / self.diag[i];
                dk -= l_ki * yi;
                self.row_idx[p2] = k as u32;
                self.values[p2] = l_ki;
                self.fill[i] += 1;
            }
            if !(dk > 0.0) || !dk.is_finite() {
                return Err(k);
            }
            self.diag[k] = dk;
        }
        Ok(())
    }

    /// Solves L D L^T x = b in place.
    pub fn solve(&self, symbolic: &SymbolicLdl, x: &mut [f64]) {
        let n = self.n;
        let lp = &symbolic.col_ptr;
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for p in lp[j]..lp[j + 1] {
                    x[self.row_idx[p] as usize] -= self.values[p] * xj;
                }
            }
        }
        for j in 0..n {
            x[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in lp[j]..lp[j + 1] {
                xj -= self.values[p] * x[self.row_idx[p] as usize];
            }
            x[j] = xj;
        }
    }
}
