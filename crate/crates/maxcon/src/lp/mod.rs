//! Linear programming with certified primal-dual answers.
//!
//! Inequality-form problems `min c'x s.t. Ax <= b, l <= x <= u` are solved by
//! a Mehrotra-style predictor-corrector interior-point method over sparse
//! constraint storage. Both the primal point and the row multipliers are
//! returned, with the relative duality gap as the quality certificate; the
//! consensus solvers rely on both sides.

mod ipm;
mod ldl;
mod normal;
pub mod sparse;

pub use sparse::SparseMatrix;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solver tolerances. `feas_tol` is the per-constraint violation allowance
/// (absolute for unit-scale rows, relaxed proportionally to |b_i| for large
/// right-hand sides), `gap_tol` the relative duality gap at which a solve is
/// certified optimal.
#[derive(Debug, Clone, Copy)]
pub struct SolverTolerances {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iters: 200,
        }
    }
}

/// Inequality-form linear program. Bounds default to free variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    cost: Vec<f64>,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>, matrix: SparseMatrix, rhs: Vec<f64>) -> Result<Self, LpError> {
        if matrix.ncols() != cost.len() {
            return Err(LpError::MalformedProblem(format!(
                "cost has {} entries but matrix has {} columns",
                cost.len(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != rhs.len() {
            return Err(LpError::MalformedProblem(format!(
                "rhs has {} entries but matrix has {} rows",
                rhs.len(),
                matrix.nrows()
            )));
        }
        if cost.is_empty() {
            return Err(LpError::MalformedProblem("no variables".into()));
        }
        let n = cost.len();
        Ok(LinearProgram {
            cost,
            matrix,
            rhs,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        })
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if lower > upper {
            return Err(LpError::MalformedProblem(format!(
                "variable {var}: lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }
}

/// Primal-dual answer for a [`LinearProgram`]. `primal` and `dual` are
/// meaningful only when `status` is `Optimal`; an infeasible problem carries a
/// Farkas ray over the inequality rows instead.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub infeasibility_certificate: Option<Vec<f64>>,
}

impl LpSolution {
    /// Relative duality gap |p - d| / (1 + |p|).
    pub fn duality_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs() / (1.0 + self.primal_objective.abs())
    }
}

/// Solves the program to the requested tolerances.
pub fn solve_lp(lp: &LinearProgram, tol: &SolverTolerances) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let m_user = lp.num_rows();
    for (j, (&lo, &hi)) in lp.lower.iter().zip(&lp.upper).enumerate() {
        if lo > hi {
            return Err(LpError::MalformedProblem(format!(
                "variable {j}: lower bound {lo} exceeds upper bound {hi}"
            )));
        }
    }
    if lp.cost.iter().any(|v| !v.is_finite())
        || lp.rhs.iter().any(|v| !v.is_finite())
    {
        return Err(LpError::MalformedProblem(
            "cost and rhs entries must be finite".into(),
        ));
    }

    // Internal rows: scaled user rows plus finite bounds as extra rows.
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(lp.matrix.nnz() + 2 * n);
    let mut b_int: Vec<f64> = Vec::with_capacity(m_user + 2 * n);
    let mut row_scale: Vec<f64> = Vec::new();
    let mut user_of_internal: Vec<Option<usize>> = Vec::new();
    for r in 0..m_user {
        let (cols, vals) = lp.matrix.row(r);
        if cols.is_empty() {
            // 0 <= b_r: trivially true or trivially infeasible.
            if lp.rhs[r] < 0.0 {
                let mut cert = vec![0.0; m_user];
                cert[r] = 1.0;
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    primal: Vec::new(),
                    dual: Vec::new(),
                    primal_objective: f64::NAN,
                    dual_objective: f64::NAN,
                    iterations: 0,
                    infeasibility_certificate: Some(cert),
                });
            }
            continue;
        }
        let scale = lp.matrix.row_inf_norm(r).max(1.0);
        let row = b_int.len();
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push((row, c as usize, v / scale));
        }
        b_int.push(lp.rhs[r] / scale);
        row_scale.push(scale);
        user_of_internal.push(Some(r));
    }
    for j in 0..n {
        if lp.lower[j].is_finite() {
            let row = b_int.len();
            triplets.push((row, j, -1.0));
            b_int.push(-lp.lower[j]);
            row_scale.push(1.0);
            user_of_internal.push(None);
        }
        if lp.upper[j].is_finite() {
            let row = b_int.len();
            triplets.push((row, j, 1.0));
            b_int.push(lp.upper[j]);
            row_scale.push(1.0);
            user_of_internal.push(None);
        }
    }

    if b_int.is_empty() {
        // No constraints at all: optimal at zero iff the cost is zero.
        let unconstrained_optimal = lp.cost.iter().all(|&v| v == 0.0);
        return Ok(LpSolution {
            status: if unconstrained_optimal {
                LpStatus::Optimal
            } else {
                LpStatus::Unbounded
            },
            primal: vec![0.0; n],
            dual: vec![0.0; m_user],
            primal_objective: 0.0,
            dual_objective: 0.0,
            iterations: 0,
            infeasibility_certificate: None,
        });
    }

    let g = SparseMatrix::from_triplets(b_int.len(), n, triplets);
    let outcome = ipm::mehrotra(&ipm::IpmInput {
        g: &g,
        b: &b_int,
        c: &lp.cost,
        row_scale: &row_scale,
        tol: *tol,
    })?;

    let mut dual = vec![0.0; m_user];
    let mut dual_objective = 0.0;
    for (i, user) in user_of_internal.iter().enumerate() {
        let y_orig = outcome.y[i] / row_scale[i];
        dual_objective -= row_scale[i] * b_int[i] * y_orig;
        if let Some(r) = *user {
            dual[r] = y_orig;
        }
    }
    let certificate = outcome.certificate.map(|ray| {
        let mut cert = vec![0.0; m_user];
        for (i, user) in user_of_internal.iter().enumerate() {
            if let Some(r) = *user {
                cert[r] = ray[i] / row_scale[i];
            }
        }
        cert
    });

    match outcome.status {
        LpStatus::Optimal => {
            let primal_objective = lp
                .cost
                .iter()
                .zip(&outcome.z)
                .map(|(c, z)| c * z)
                .sum::<f64>();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                primal: outcome.z,
                dual,
                primal_objective,
                dual_objective,
                iterations: outcome.iterations,
                infeasibility_certificate: None,
            })
        }
        LpStatus::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            dual,
            primal_objective: f64::NAN,
            dual_objective,
            iterations: outcome.iterations,
            infeasibility_certificate: certificate,
        }),
        status => Ok(LpSolution {
            status,
            primal: outcome.z,
            dual,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            iterations: outcome.iterations,
            infeasibility_certificate: None,
        }),
    }
}

#[cfg(test)]
mod tests;
