//! Damped Gauss-Newton (Levenberg-Marquardt) least squares for the small
//! dense fits in [`crate::calibrate`].
//!
//! The residual closure returns `None` outside its domain; such trial steps
//! are rejected like any cost increase. Jacobians are central finite
//! differences, so callers should scale their parameters to order one.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the infinity norm of the gradient J^T r.
    pub gradient_tol: f64,
    /// Convergence threshold on the relative cost decrease of a step.
    pub cost_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            gradient_tol: 1e-10,
            cost_tol: 1e-14,
        }
    }
}

/// Raw optimizer outcome; interpreting `converged`/`condition` is up to the
/// calling fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: Vec<f64>,
    /// Euclidean norm of the residual vector at the solution.
    pub residual_norm: f64,
    /// Infinity norm of the gradient at the solution.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Condition number of the correlation-scaled normal matrix at the
    /// solution; large values flag unidentifiable parameter combinations.
    pub condition: f64,
}

fn cost_of(residuals: &[f64]) -> f64 {
    0.5 * residuals.iter().map(|r| r * r).sum::<f64>()
}

/// Central-difference Jacobian, row-major m x n.
fn jacobian<F>(f: &F, p: &[f64], r_len: usize) -> Option<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let n = p.len();
    let mut jt: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let h = 1e-6 * p[j].abs().max(1.0);
        let mut plus = p.to_vec();
        plus[j] += h;
        let mut minus = p.to_vec();
        minus[j] -= h;
        let (rp, rm) = (f(&plus)?, f(&minus)?);
        if rp.len() != r_len || rm.len() != r_len {
            return None;
        }
        jt.push(
            rp.iter()
                .zip(&rm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    // transpose to m x n
    Some(
        (0..r_len)
            .map(|i| (0..n).map(|j| jt[j][i]).collect())
            .collect(),
    )
}

/// Solve (N + mu diag(N)) delta = -g by Gaussian elimination with partial
/// pivoting. Returns None if the damped system is still singular.
#[allow(clippy::needless_range_loop)]
fn solve_damped(n_mat: &[Vec<f64>], g: &[f64], mu: f64) -> Option<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = n_mat.to_vec();
    let mut b: Vec<f64> = g.iter().map(|x| -x).collect();
    for (i, row) in a.iter_mut().enumerate() {
        let d = row[i];
        row[i] = d + mu * d.abs().max(1e-300);
    }
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Condition number of the correlation-scaled normal matrix J^T J.
fn scaled_normal_condition(j: &[Vec<f64>]) -> f64 {
    let n = j.first().map_or(0, |row| row.len());
    if n == 0 {
        return f64::INFINITY;
    }
    let mut normal = vec![vec![0.0; n]; n];
    for row in j {
        for p in 0..n {
            for q in 0..n {
                normal[p][q] += row[p] * row[q];
            }
        }
    }
    let scale: Vec<f64> = (0..n).map(|i| normal[i][i].sqrt()).collect();
    if scale.iter().any(|&s| !(s > 0.0)) {
        return f64::INFINITY;
    }
    for p in 0..n {
        for q in 0..n {
            normal[p][q] /= scale[p] * scale[q];
        }
    }
    let eig = symmetric_eigenvalues(&normal);
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimize the sum of squared residuals starting from `initial`.
pub fn levenberg_marquardt<F>(f: &F, initial: &[f64], opts: &FitOptions) -> Result<FitOutcome>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut params = initial.to_vec();
    let mut residuals = f(&params).ok_or_else(|| {
        Error::NonConvergence("residuals undefined at the initial parameters".into())
    })?;
    let m = residuals.len();
    if m < params.len() {
        return Err(Error::DegenerateData(format!(
            "{} residuals cannot determine {} parameters",
            m,
            params.len()
        )));
    }
    let mut cost = cost_of(&residuals);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient_norm = f64::INFINITY;
    let mut last_jacobian: Option<Vec<Vec<f64>>> = None;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jac = match jacobian(f, &params, m) {
            Some(j) => j,
            None => break, // domain boundary; report best point so far
        };
        let n = params.len();
        let mut normal = vec![vec![0.0; n]; n];
        let mut gradient = vec![0.0; n];
        for (row, &r) in jac.iter().zip(&residuals) {
            for p in 0..n {
                gradient[p] += row[p] * r;
                for q in 0..n {
                    normal[p][q] += row[p] * row[q];
                }
            }
        }
        last_jacobian = Some(jac);
        gradient_norm = gradient.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gradient_norm <= opts.gradient_tol * (1.0 + cost) {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..60 {
            let Some(step) = solve_damped(&normal, &gradient, mu) else {
                mu *= 4.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, d)| p + d).collect();
            match f(&trial) {
                Some(trial_res) if cost_of(&trial_res) < cost => {
                    let new_cost = cost_of(&trial_res);
                    let rel_drop = (cost - new_cost) / cost.max(1e-300);
                    let step_small = step
                        .iter()
                        .zip(&params)
                        .all(|(d, p)| d.abs() <= 1e-12 * (1.0 + p.abs()));
                    params = trial;
                    residuals = trial_res;
                    cost = new_cost;
                    mu = (mu / 3.0).max(1e-14);
                    accepted = true;
                    if rel_drop < opts.cost_tol || step_small || cost == 0.0 {
                        converged = true;
                    }
                    break;
                }
                _ => mu *= 4.0,
            }
        }
        if converged || !accepted {
            converged = converged || accepted;
            break;
        }
    }

    let condition = match &last_jacobian {
        Some(j) => scaled_normal_condition(j),
        None => f64::INFINITY,
    };
    Ok(FitOutcome {
        params,
        residual_norm: (2.0 * cost).sqrt(),
        gradient_norm,
        iterations,
        converged,
        condition,
    })
}
