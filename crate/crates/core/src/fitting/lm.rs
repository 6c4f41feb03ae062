//! Bounded Levenberg–Marquardt with a central-difference Jacobian.
//!
//! Steps solve `(JᵀJ + λ·diag(JᵀJ)) δ = −Jᵀr` and are projected onto the
//! box. A step is taken only if it strictly lowers `‖r‖²`, so the accepted
//! residual sequence is monotone.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Converged when every `|δ_j| ≤ step_tol·(|x_j| + step_tol·scale_j)`.
    pub step_tol: f64,
    /// Converged when the accepted relative drop of `‖r‖²` is below this.
    pub cost_tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { max_iterations: 500, step_tol: 1e-10, cost_tol: 1e-12, fd_step: 6e-6 }
    }
}

/// Box-constrained least-squares problem `min ‖r(x)‖²`.
pub struct Problem<'a> {
    pub residuals: &'a dyn Fn(&[f64], &mut [f64]),
    pub n_residuals: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Typical magnitude per parameter, for steps near zero.
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r‖` after the start and after every accepted step.
    pub norm_history: Vec<f64>,
}

impl LmReport {
    pub fn residual_norm(&self) -> f64 {
        norm(&self.residuals)
    }
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn eval(p: &Problem<'_>, x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; p.n_residuals];
    (p.residuals)(x, &mut r);
    r
}

/// Central-difference Jacobian, falling back to one-sided differences at
/// the box edges.
pub fn numeric_jacobian(p: &Problem<'_>, x: &[f64], fd_step: f64) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(p.n_residuals, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = fd_step * x[j].abs().max(p.scale[j]);
        let (lo, hi) = ((x[j] - h).max(p.lower[j]), (x[j] + h).min(p.upper[j]));
        if hi <= lo {
            continue;
        }
        xp[j] = hi;
        let rp = eval(p, &xp);
        xp[j] = lo;
        let rm = eval(p, &xp);
        xp[j] = x[j];
        for i in 0..p.n_residuals {
            jac[(i, j)] = (rp[i] - rm[i]) / (hi - lo);
        }
    }
    jac
}

pub fn check_problem(p: &Problem<'_>, x0: &[f64]) -> Result<()> {
    let n = x0.len();
    if p.lower.len() != n || p.upper.len() != n || p.scale.len() != n {
        return invalid("bounds and scales must match the parameter count");
    }
    for j in 0..n {
        if !(p.lower[j] <= x0[j] && x0[j] <= p.upper[j]) {
            return invalid(format!(
                "initial value {} of parameter {j} lies outside [{}, {}]",
                x0[j], p.lower[j], p.upper[j]
            ));
        }
    }
    if p.n_residuals == 0 {
        return invalid("no residuals to fit");
    }
    Ok(())
}

pub fn levenberg_marquardt(p: &Problem<'_>, x0: &[f64], cfg: &LmConfig) -> Result<LmReport> {
    check_problem(p, x0)?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = eval(p, &x);
    if r.iter().any(|v| !v.is_finite()) {
        return invalid("residuals are not finite at the initial point");
    }
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut history = vec![cost.sqrt()];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = numeric_jacobian(p, &x, cfg.fd_step);
    while iterations < cfg.max_iterations && !converged {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let dmax = (0..n).map(|j| a[(j, j)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut accepted = false;
        while lambda < 1e20 {
            let mut m = a.clone();
            for j in 0..n {
                m[(j, j)] += lambda * a[(j, j)].max(1e-12 * dmax);
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let trial: Vec<f64> = (0..n).map(|j| (x[j] + delta[j]).clamp(p.lower[j], p.upper[j])).collect();
            let small_step =
                (0..n).all(|j| (trial[j] - x[j]).abs() <= cfg.step_tol * (x[j].abs() + cfg.step_tol * p.scale[j]));
            let rt = eval(p, &trial);
            let ct: f64 = rt.iter().map(|v| v * v).sum();
            if ct.is_finite() && ct < cost {
                let drop = (cost - ct) / cost;
                x = trial;
                r = rt;
                cost = ct;
                history.push(cost.sqrt());
                lambda = (lambda / 10.0).max(1e-15);
                converged = small_step || drop < cfg.cost_tol;
                accepted = true;
                break;
            }
            if small_step {
                // No meaningful move lowers the cost: a minimum to within
                // the step tolerance.
                converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted && !converged {
            break;
        }
        if accepted {
            jac = numeric_jacobian(p, &x, cfg.fd_step);
        }
    }
    Ok(LmReport { x, residuals: r, jacobian: jac, iterations, converged, norm_history: history })
}

/// Standard errors `√diag(s²(JᵀJ)⁻¹)` over the parameters in `free`.
///
/// Parameters whose column is (numerically) a combination of the others
/// get `None`, as do all of them when there are no spare degrees of
/// freedom.
pub fn standard_errors(jac: &DMatrix<f64>, residuals: &[f64], free: &[bool]) -> Vec<Option<f64>> {
    let n = jac.ncols();
    let mut out = vec![None; n];
    let mut active: Vec<usize> = (0..n).filter(|&j| free[j]).collect();
    // Drop columns that are zero, then those spanning near-null directions.
    active.retain(|&j| jac.column(j).norm() > 0.0);
    loop {
        if active.is_empty() {
            return out;
        }
        let norms: Vec<f64> = active.iter().map(|&j| jac.column(j).norm()).collect();
        let js = DMatrix::from_fn(jac.nrows(), active.len(), |i, k| jac[(i, active[k])] / norms[k]);
        let eig = SymmetricEigen::new(js.transpose() * &js);
        let (imin, &emin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let emax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if emin > 1e-10 * emax {
            let dof = residuals.len() as isize - active.len() as isize;
            if dof <= 0 {
                return out;
            }
            let s2 = residuals.iter().map(|v| v * v).sum::<f64>() / dof as f64;
            let Some(inv) = (js.transpose() * &js).try_inverse() else {
                return out;
            };
            for (k, &j) in active.iter().enumerate() {
                out[j] = Some((s2 * inv[(k, k)]).sqrt() / norms[k]);
            }
            return out;
        }
        // Remove every parameter with weight in the null direction.
        let v = eig.eigenvectors.column(imin);
        let drop: Vec<usize> = (0..active.len()).filter(|&k| v[k].abs() > 0.1).collect();
        active = active.into_iter().enumerate().filter(|(k, _)| !drop.contains(k)).map(|(_, j)| j).collect();
    }
}
