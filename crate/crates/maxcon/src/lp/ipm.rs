//! Mehrotra-style predictor-corrector interior-point iteration for
//! inequality-form linear programs
//!
//! ```text
//!     minimize c'z   subject to  G z <= b
//! ```
//!
//! with free z. Row slacks w = b - Gz and multipliers y stay strictly
//! positive; each iteration factors the normal-equations matrix G' diag(y/w) G
//! once and reuses the factor for the predictor and corrector solves.

use super::normal::NormalEquations;
use super::sparse::SparseMatrix;
use super::{LpError, LpStatus, SolverTolerances};

pub(super) struct IpmInput<'a> {
    /// Row-scaled constraint matrix.
    pub g: &'a SparseMatrix,
    /// Row-scaled right-hand side.
    pub b: &'a [f64],
    pub c: &'a [f64],
    /// Scale factor applied to each row; original row = scale * stored row.
    pub row_scale: &'a [f64],
    pub tol: SolverTolerances,
}

pub(super) struct IpmOutcome {
    pub status: LpStatus,
    pub z: Vec<f64>,
    /// Multipliers for the scaled rows.
    pub y: Vec<f64>,
    pub iterations: usize,
    /// Farkas ray in scaled-row space when status is Infeasible.
    pub certificate: Option<Vec<f64>>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest alpha in (0, 1] with v + alpha * dv >= 0.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut alpha = 1.0f64;
    for (&vi, &di) in v.iter().zip(dv) {
        if di < 0.0 {
            alpha = alpha.min(-vi / di);
        }
    }
    alpha
}

/// Checks for a Farkas certificate of primal infeasibility: y >= 0 with
/// G'y ~ 0 and b'y < 0 proves no z satisfies Gz <= b. The residual of the
/// normalized ray must be small relative to the certified gain, so a feasible
/// problem can only be misclassified if its feasible set lies outside a ball
/// of radius gain/viol.
fn primal_infeasibility_ray(
    g: &SparseMatrix,
    b: &[f64],
    y: &[f64],
    gty: &mut [f64],
) -> Option<Vec<f64>> {
    let scale = y.iter().sum::<f64>();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let ray: Vec<f64> = y.iter().map(|&v| v / scale).collect();
    g.tr_matvec(&ray, gty);
    let viol = inf_norm(gty);
    let gain = -dot(b, &ray);
    if gain > 1e-8 && viol <= 1e-6 * gain {
        Some(ray)
    } else {
        None
    }
}

/// Checks for an unbounded ray: Gd <= 0 with c'd < 0.
fn unbounded_ray(g: &SparseMatrix, c: &[f64], z: &[f64], gz: &mut [f64]) -> bool {
    let scale = inf_norm(z);
    if !(scale > 0.0) || !scale.is_finite() {
        return false;
    }
    let d: Vec<f64> = z.iter().map(|&v| v / scale).collect();
    g.matvec(&d, gz);
    let ascent = gz.iter().fold(0.0f64, |m, &v| m.max(v));
    let decrease = -dot(c, &d);
    decrease > 1e-8 * (1.0 + inf_norm(c)) && ascent <= 1e-6 * decrease
}

pub(super) fn mehrotra(input: &IpmInput) -> Result<IpmOutcome, LpError> {
    let g = input.g;
    let b = input.b;
    let c = input.c;
    let m = g.nrows();
    let n = g.ncols();
    let tol = input.tol;

    let b_orig_abs: Vec<f64> = (0..m).map(|r| (input.row_scale[r] * b[r]).abs()).collect();
    let b_norm = inf_norm(b);
    let c_norm = inf_norm(c);

    let mut ne = NormalEquations::new(g);

    let mut z = vec![0.0; n];
    let mut w: Vec<f64> = b.iter().map(|&bi| bi.max(1.0)).collect();
    let mut y = vec![1.0; m];

    let mut gz = vec![0.0; m];
    let mut gty = vec![0.0; n];
    let mut r_p = vec![0.0; m];
    let mut r_d = vec![0.0; n];
    let mut dvec = vec![0.0; m];
    let mut t_m = vec![0.0; m];
    let mut t_n = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let mut dw = vec![0.0; m];
    let mut dy = vec![0.0; m];
    let mut scratch_m = vec![0.0; m];
    let mut scratch_n = vec![0.0; n];

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;

    let mut iterations = 0;
    for iter in 0..tol.max_iters {
        iterations = iter;

        g.matvec(&z, &mut gz);
        for r in 0..m {
            r_p[r] = gz[r] + w[r] - b[r];
        }
        g.tr_matvec(&y, &mut gty);
        for j in 0..n {
            r_d[j] = c[j] + gty[j];
        }
        let mu = dot(&w, &y) / m as f64;
        let p_obj = dot(c, &z);
        let d_obj = -dot(b, &y);

        // Termination: scaled residuals, per-row violation against the
        // original data, and relative duality gap.
        let rel_p = inf_norm(&r_p) / (1.0 + b_norm);
        let rel_d = inf_norm(&r_d) / (1.0 + c_norm);
        let rel_gap = (p_obj - d_obj).abs() / (1.0 + p_obj.abs());
        if rel_p <= tol.feas_tol && rel_d <= tol.feas_tol && rel_gap <= tol.gap_tol {
            let rows_ok = (0..m).all(|r| {
                input.row_scale[r] * (gz[r] - b[r]) <= tol.feas_tol * (1.0 + b_orig_abs[r])
            });
            if rows_ok {
                return Ok(IpmOutcome {
                    status: LpStatus::Optimal,
                    z,
                    y,
                    iterations: iter,
                    certificate: None,
                });
            }
        }

        // Track the most converged iterate. When the central path is
        // exhausted at floating-point precision the iterates blow up within a
        // few steps; cut over to the best iterate instead of amplifying noise.
        let merit = rel_p.max(rel_d).max(rel_gap);
        match &best {
            Some((best_merit, _, _)) if merit >= *best_merit => {
                if merit > 1e8 * best_merit {
                    break;
                }
            }
            _ => {
                best = Some((merit, z.clone(), y.clone()));
            }
        }

        // Divergence checks: certify infeasibility or unboundedness once the
        // iterates start running away, and bail out before overflow poisons
        // the factorization.
        let y_norm = inf_norm(&y);
        let z_norm = inf_norm(&z);
        if y_norm > 1e4 * (1.0 + c_norm) {
            if let Some(ray) = primal_infeasibility_ray(g, b, &y, &mut scratch_n) {
                return Ok(IpmOutcome {
                    status: LpStatus::Infeasible,
                    z: Vec::new(),
                    y,
                    iterations: iter,
                    certificate: Some(ray),
                });
            }
        }
        if z_norm > 1e4 * (1.0 + b_norm) && unbounded_ray(g, c, &z, &mut scratch_m) {
            return Ok(IpmOutcome {
                status: LpStatus::Unbounded,
                z,
                y,
                iterations: iter,
                certificate: None,
            });
        }
        let blown_up = !mu.is_finite()
            || y_norm > 1e13
            || z_norm > 1e13
            || inf_norm(&w) > 1e13;
        if blown_up {
            return Ok(IpmOutcome {
                status: LpStatus::IterationLimit,
                z,
                y,
                iterations: iter,
                certificate: None,
            });
        }

        for r in 0..m {
            dvec[r] = (y[r] / w[r]).clamp(1e-14, 1e14);
        }
        let mut reg = 1e-12;
        loop {
            match ne.factor(&dvec, reg) {
                Ok(_) => break,
                Err(_) if reg < 1e-4 => reg *= 1e4,
                Err(k) => {
                    return Err(LpError::NumericalFailure(format!(
                        "normal equations factorization broke down at pivot {k}"
                    )))
                }
            }
        }

        // Predictor (affine scaling) direction.
        for r in 0..m {
            t_m[r] = dvec[r] * r_p[r];
        }
        g.tr_matvec(&t_m, &mut t_n);
        for j in 0..n {
            rhs[j] = -(c[j] + t_n[j]);
        }
        ne.solve(&rhs, &mut dz);
        g.matvec(&dz, &mut scratch_m);
        for r in 0..m {
            dw[r] = -r_p[r] - scratch_m[r];
            dy[r] = -y[r] - dvec[r] * dw[r];
        }
        let alpha_p_aff = max_step(&w, &dw);
        let alpha_d_aff = max_step(&y, &dy);
        let mut mu_aff = 0.0;
        for r in 0..m {
            mu_aff += (w[r] + alpha_p_aff * dw[r]) * (y[r] + alpha_d_aff * dy[r]);
        }
        mu_aff /= m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        // Corrector with centering; reuses the factorization.
        for r in 0..m {
            let r_t = sigma * mu - w[r] * y[r] - dw[r] * dy[r];
            t_m[r] = r_t / w[r] + dvec[r] * r_p[r];
            scratch_m[r] = r_t;
        }
        g.tr_matvec(&t_m, &mut t_n);
        for j in 0..n {
            rhs[j] = -(r_d[j] + t_n[j]);
        }
        ne.solve(&rhs, &mut dz);
        g.matvec(&dz, &mut t_m);
        for r in 0..m {
            dw[r] = -r_p[r] - t_m[r];
            dy[r] = (scratch_m[r] - y[r] * dw[r]) / w[r];
        }

        let eta = 0.9995;
        let alpha_p = (eta * max_step(&w, &dw)).min(1.0);
        let alpha_d = (eta * max_step(&y, &dy)).min(1.0);
        for j in 0..n {
            z[j] += alpha_p * dz[j];
        }
        for r in 0..m {
            // The step keeps a fraction of the distance to the boundary, so
            // both stay positive in exact arithmetic; the floor only guards
            // against rounding at extreme scales.
            w[r] = (w[r] + alpha_p * dw[r]).max(1e-30);
            y[r] = (y[r] + alpha_d * dy[r]).max(1e-30);
        }
    }

    // Out of iterations or stalled: fall back to the best iterate seen, then
    // classify divergence before giving up.
    if let Some((_, bz, by)) = best {
        z = bz;
        y = by;
    }
    g.matvec(&z, &mut gz);
    g.tr_matvec(&y, &mut gty);
    let p_obj = dot(c, &z);
    let d_obj = -dot(b, &y);
    let rel_d = gty
        .iter()
        .zip(c)
        .fold(0.0f64, |m, (gt, ci)| m.max((ci + gt).abs()))
        / (1.0 + c_norm);
    let rel_gap = (p_obj - d_obj).abs() / (1.0 + p_obj.abs());
    let rows_ok = (0..m)
        .all(|r| input.row_scale[r] * (gz[r] - b[r]) <= tol.feas_tol * (1.0 + b_orig_abs[r]));
    if rows_ok && rel_d <= tol.feas_tol && rel_gap <= tol.gap_tol {
        return Ok(IpmOutcome {
            status: LpStatus::Optimal,
            z,
            y,
            iterations,
            certificate: None,
        });
    }
    if let Some(ray) = primal_infeasibility_ray(g, b, &y, &mut scratch_n) {
        return Ok(IpmOutcome {
            status: LpStatus::Infeasible,
            z: Vec::new(),
            y,
            iterations,
            certificate: Some(ray),
        });
    }
    if unbounded_ray(g, c, &z, &mut scratch_m) {
        return Ok(IpmOutcome {
            status: LpStatus::Unbounded,
            z,
            y,
            iterations,
            certificate: None,
        });
    }
    Ok(IpmOutcome {
        status: LpStatus::IterationLimit,
        z,
        y,
        iterations,
        certificate: None,
    })
}
