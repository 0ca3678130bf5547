//! Normal-equations system G^T D G + r I for the interior-point solver.
//!
//! The sparsity pattern is fixed for a given constraint matrix, so symbolic
//! work (pattern union, fill-reducing permutation, elimination tree, value
//! slot maps) happens once per solve; each interior-point iteration only
//! rebuilds the numeric values and refactors.

use super::ldl::{NumericLdl, SymbolicLdl};
use super::sparse::SparseMatrix;

pub struct NormalEquations {
    n: usize,
    inv_perm: Vec<u32>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
    diag_slots: Vec<u32>,
    // per constraint row: values in permuted-sorted order and the K slot of
    // every support pair (a <= b)
    row_val_ptr: Vec<usize>,
    row_vals: Vec<f64>,
    row_slot_ptr: Vec<usize>,
    row_slots: Vec<u32>,
    symbolic: SymbolicLdl,
    numeric: NumericLdl,
    shift: f64,
    scratch: Vec<f64>,
    resid: Vec<f64>,
    corr: Vec<f64>,
}

fn pair_key(i: u32, j: u32) -> u64 {
    debug_assert!(i <= j);
    ((j as u64) << 32) | i as u64
}

impl NormalEquations {
    pub fn new(g: &SparseMatrix) -> Self {
        let n = g.ncols();
        let m = g.nrows();

        // Column degrees of the K pattern in original numbering.
        let mut keys: Vec<u64> = Vec::new();
        for r in 0..m {
            let (cols, _) = g.row(r);
            for a in 0..cols.len() {
                for b in a..cols.len() {
                    keys.push(pair_key(cols[a], cols[b]));
                }
            }
        }
        for i in 0..n as u32 {
            keys.push(pair_key(i, i));
        }
        keys.sort_unstable();
        keys.dedup();
        let mut degree = vec![0u32; n];
        for &k in &keys {
            let i = (k & 0xffff_ffff) as usize;
            let j = (k >> 32) as usize;
            if i != j {
                degree[i] += 1;
                degree[j] += 1;
            }
        }

        // Eliminate low-degree columns first. For the slack-plus-model LPs
        // solved here this orders slack columns ahead of model columns and
        // keeps fill near the minimum.
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by_key(|&c| (degree[c as usize], c));
        let mut inv_perm = vec![0u32; n];
        for (new, &orig) in order.iter().enumerate() {
            inv_perm[orig as usize] = new as u32;
        }

        // Rebuild the unique pair set in permuted numbering (upper CSC order).
        let mut pkeys: Vec<u64> = keys
            .iter()
            .map(|&k| {
                let i = inv_perm[(k & 0xffff_ffff) as usize];
                let j = inv_perm[(k >> 32) as usize];
                pair_key(i.min(j), i.max(j))
            })
            .collect();
        pkeys.sort_unstable();
        pkeys.dedup();

        let nnz = pkeys.len();
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = vec![0u32; nnz];
        for (slot, &k) in pkeys.iter().enumerate() {
            let j = (k >> 32) as usize;
            col_ptr[j + 1] += 1;
            row_idx[slot] = (k & 0xffff_ffff) as u32;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }

        let slot_of = |i: u32, j: u32| -> u32 {
            let key = pair_key(i, j);
            pkeys.binary_search(&key).expect("pair in pattern") as u32
        };

        let mut diag_slots = vec![0u32; n];
        for i in 0..n as u32 {
            diag_slots[i as usize] = slot_of(i, i);
        }

        let mut row_val_ptr = vec![0usize; m + 1];
        let mut row_slot_ptr = vec![0usize; m + 1];
        let mut row_vals = Vec::with_capacity(g.nnz());
        let mut row_slots = Vec::new();
        let mut support: Vec<(u32, f64)> = Vec::new();
        for r in 0..m {
            let (cols, vals) = g.row(r);
            support.clear();
            support.extend(
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| (inv_perm[c as usize], v)),
            );
            support.sort_unstable_by_key(|&(c, _)| c);
            for &(_, v) in &support {
                row_vals.push(v);
            }
            for a in 0..support.len() {
                for b in a..support.len() {
                    row_slots.push(slot_of(support[a].0, support[b].0));
                }
            }
            row_val_ptr[r + 1] = row_vals.len();
            row_slot_ptr[r + 1] = row_slots.len();
        }

        let symbolic = SymbolicLdl::analyze(n, &col_ptr, &row_idx);
        let numeric = NumericLdl::new(&symbolic);
        NormalEquations {
            n,
            inv_perm,
            col_ptr,
            row_idx,
            values: vec![0.0; nnz],
            diag_slots,
            row_val_ptr,
            row_vals,
            row_slot_ptr,
            row_slots,
            symbolic,
            numeric,
            shift: 0.0,
            scratch: vec![0.0; n],
            resid: vec![0.0; n],
            corr: vec![0.0; n],
        }
    }

    /// Rebuilds K = G^T diag(d) G + reg I and factors it. `reg` is relative
    /// to the largest diagonal entry. Returns the absolute shift used.
    pub fn factor(&mut self, d: &[f64], reg: f64) -> Result<f64, usize> {
        self.values.fill(0.0);
        let m = self.row_val_ptr.len() - 1;
        for r in 0..m {
            let dr = d[r];
            if dr == 0.0 {
                continue;
            }
            let vals = &self.row_vals[self.row_val_ptr[r]..self.row_val_ptr[r + 1]];
            let slots = &self.row_slots[self.row_slot_ptr[r]..self.row_slot_ptr[r + 1]];
            let mut t = 0;
            for a in 0..vals.len() {
                let va = dr * vals[a];
                for b in a..vals.len() {
                    self.values[slots[t] as usize] += va * vals[b];
                    t += 1;
                }
            }
        }
        let mut max_diag: f64 = 0.0;
        for &s in &self.diag_slots {
            max_diag = max_diag.max(self.values[s as usize]);
        }
        let shift = reg * (1.0 + max_diag);
        for &s in &self.diag_slots {
            self.values[s as usize] += shift;
        }
        self.shift = shift;
        self.numeric
            .factor(&self.symbolic, &self.col_ptr, &self.row_idx, &self.values)
            .map(|_| shift)
    }

    /// Solves K x = rhs (in original variable numbering) with the current
    /// factor, polishing away the regularization shift and factorization
    /// error with a few rounds of iterative refinement.
    pub fn solve(&mut self, rhs: &[f64], x: &mut [f64]) {
        for (orig, &new) in self.inv_perm.iter().enumerate() {
            self.scratch[new as usize] = rhs[orig];
        }
        let rhs_norm = self.scratch.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let mut xp = std::mem::take(&mut self.corr);
        xp.copy_from_slice(&self.scratch);
        self.numeric.solve(&self.symbolic, &mut xp);
        for _ in 0..3 {
            sym_matvec(
                self.n,
                &self.col_ptr,
                &self.row_idx,
                &self.values,
                self.shift,
                &xp,
                &mut self.resid,
            );
            let mut worst = 0.0f64;
            for (orig, &new) in self.inv_perm.iter().enumerate() {
                let r = rhs[orig] - self.resid[new as usize];
                self.resid[new as usize] = r;
                worst = worst.max(r.abs());
            }
            if worst <= 1e-14 * (1.0 + rhs_norm) {
                break;
            }
            self.numeric.solve(&self.symbolic, &mut self.resid);
            for (xi, &di) in xp.iter_mut().zip(self.resid.iter()) {
                *xi += di;
            }
        }
        for (orig, &new) in self.inv_perm.iter().enumerate() {
            x[orig] = xp[new as usize];
        }
        self.corr = xp;
    }
}

/// y = (K - shift I) x for K given by its upper triangle in CSC form.
fn sym_matvec(
    n: usize,
    col_ptr: &[usize],
    row_idx: &[u32],
    values: &[f64],
    shift: f64,
    x: &[f64],
    y: &mut [f64],
) {
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = -shift * x[j];
    }
    for j in 0..n {
        let xj = x[j];
        for p in col_ptr[j]..col_ptr[j + 1] {
            let i = row_idx[p] as usize;
            let v = values[p];
            y[i] += v * xj;
            if i != j {
                y[j] += v * x[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_normal_equations() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.random_range(1..6);
            let m = rng.random_range(n..n + 8);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.random_bool(0.6) {
                                rng.random_range(-2.0..2.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let g = SparseMatrix::from_dense_rows(&rows);
            let d: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..3.0)).collect();
            let mut ne = NormalEquations::new(&g);
            let shift = ne.factor(&d, 1e-12).expect("factor");
            // dense K
            let mut k = vec![vec![0.0; n]; n];
            for (r, row) in rows.iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        k[i][j] += d[r] * row[i] * row[j];
                    }
                }
            }
            for (i, krow) in k.iter_mut().enumerate() {
                krow[i] += shift;
            }
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut x = vec![0.0; n];
            ne.solve(&rhs, &mut x);
            let x_scale = 1.0 + x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            for i in 0..n {
                let mut kx = 0.0;
                for j in 0..n {
                    kx += k[i][j] * x[j];
                }
                assert!(
                    (kx - rhs[i]).abs() < 1e-8 * x_scale,
                    "row {i}: {kx} vs {}",
                    rhs[i]
                );
            }
        }
    }
}
