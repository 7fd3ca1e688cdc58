//! Nonlinear solve engine for the implicit time steps.
//!
//! Newton's method uses a dense forward-difference Jacobian and an LU solve;
//! the problem sizes here stay around a thousand unknowns.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// `x <- x - r(x)`; the caller shapes `r` so this is a contraction.
    FixedPoint,
    NewtonFd,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::FixedPoint => "fixed_point",
            SolveMethod::NewtonFd => "newton_fd",
        }
    }
}

impl std::str::FromStr for SolveMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed_point" => Ok(SolveMethod::FixedPoint),
            "newton_fd" => Ok(SolveMethod::NewtonFd),
            other => Err(format!("unknown solver method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub method: SolveMethod,
    /// Threshold on the residual infinity norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative Jacobian perturbation; column `j` moves by `fd_eps * max(1, |x_j|)`,
    /// rounded to the nearest power of two.
    pub fd_eps: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { method: SolveMethod::NewtonFd, tol: 1e-12, max_iter: 50, fd_eps: 1e-7 }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0) {
            return Err(format!("solver tol must be positive, got {}", self.tol));
        }
        if self.max_iter < 1 {
            return Err("solver max_iter must be at least 1".into());
        }
        if !(self.fd_eps > 0.0) {
            return Err(format!("solver fd_eps must be positive, got {}", self.fd_eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    NoConvergence(SolveReport),
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("non-finite value at iteration {iteration}")]
    NanDetected { iteration: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Infinity norm that propagates NaN (`f64::max` would drop it).
fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Solve `residual(x) = 0` starting from `x0`.
///
/// `residual(x, out)` writes the residual of `x` into `out` (same length).
pub fn solve<R>(
    mut residual: R,
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveReport), SolveError>
where
    R: FnMut(&[f64], &mut [f64]),
{
    cfg.validate().map_err(SolveError::InvalidConfig)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NanDetected { iteration: 0 });
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    residual(&x, &mut r);
    let mut norm = inf_norm(&r);
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if !norm.is_finite() {
            return Err(SolveError::NanDetected { iteration: iterations });
        }
        if norm <= cfg.tol {
            break;
        }
        match cfg.method {
            SolveMethod::FixedPoint => {
                for (xi, ri) in x.iter_mut().zip(&r) {
                    *xi -= ri;
                }
            }
            SolveMethod::NewtonFd => {
                let jac = fd_jacobian(&mut residual, &x, &r, cfg.fd_eps);
                let lu = jac.lu();
                let rhs = DVector::from_column_slice(&r);
                let delta = lu
                    .solve(&rhs)
                    .ok_or(SolveError::SingularJacobian { iteration: iterations })?;
                if delta.iter().any(|d| !d.is_finite()) {
                    return Err(SolveError::SingularJacobian { iteration: iterations });
                }
                for (xi, di) in x.iter_mut().zip(delta.iter()) {
                    *xi -= di;
                }
            }
        }
        iterations += 1;
        residual(&x, &mut r);
        norm = inf_norm(&r);
    }

    if !norm.is_finite() {
        return Err(SolveError::NanDetected { iteration: iterations });
    }
    let report = SolveReport { iterations, final_residual: norm, converged: norm <= cfg.tol };
    if report.converged {
        Ok((x, report))
    } else {
        Err(SolveError::NoConvergence(report))
    }
}

fn fd_jacobian<R>(residual: &mut R, x: &[f64], r0: &[f64], eps: f64) -> DMatrix<f64>
where
    R: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut rp = vec![0.0; n];
    for j in 0..n {
        // Rounded to a power of two so that `x + h` and the residual
        // difference lose no bits on well-scaled affine problems.
        let h = (eps * x[j].abs().max(1.0)).log2().round().exp2();
        xp[j] = x[j] + h;
        let h = xp[j] - x[j];
        residual(&xp, &mut rp);
        for i in 0..n {
            jac[(i, j)] = (rp[i] - r0[i]) / h;
        }
        xp[j] = x[j];
    }
    jac
}
