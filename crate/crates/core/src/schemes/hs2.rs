//! Two-component Hunter-Saxton system on a periodic grid.
//!
//! * `ms`: leapfrog on `(u, ρ)` with `(δ_x²)†`.
//! * `h1`: implicit midpoint form with `(δ̃_x²)†`, solved as one coupled
//!   system in the stacked unknowns `(u, ρ)`.

use crate::grid::{periodic, Field, Grid1D};
use crate::pinv::{CirculantPinv, SecondDifference};
use crate::solver::{solve, SolveConfig};

use super::mhs::{check_pinv, h1_bracket, leapfrog, ms_bracket};
use super::{check_dt, check_finite, midpoint, solve_failure, SchemeError};

#[derive(Debug, Clone, PartialEq)]
pub struct Hs2State {
    pub t: f64,
    pub step: usize,
    pub u: Field,
    pub rho: Field,
    pub kappa: f64,
    previous: Option<(Vec<f64>, Vec<f64>)>,
}

impl Hs2State {
    pub fn new(u: Field, rho: Field, kappa: f64) -> Result<Self, SchemeError> {
        if !u.grid().is_periodic() {
            return Err(SchemeError::InvalidState("2HS schemes need a periodic grid".into()));
        }
        if u.grid() != rho.grid() {
            return Err(SchemeError::InvalidState("u and rho live on different grids".into()));
        }
        if kappa != 1.0 && kappa != -1.0 {
            return Err(SchemeError::InvalidState(format!("kappa must be 1 or -1, got {kappa}")));
        }
        Ok(Self { t: 0.0, step: 0, u, rho, kappa, previous: None })
    }

    pub fn grid(&self) -> &Grid1D {
        self.u.grid()
    }

    /// Level `i - 1` of the leapfrog scheme as `(u, ρ)`.
    pub fn previous(&self) -> Option<(&[f64], &[f64])> {
        self.previous.as_ref().map(|(u, r)| (u.as_slice(), r.as_slice()))
    }
}

pub fn hs2_ms_step(state: &Hs2State, dt: f64, wide: &CirculantPinv) -> Result<Hs2State, SchemeError> {
    check_dt(dt)?;
    check_pinv(state.grid(), wide, SecondDifference::Wide)?;
    let dx = state.grid().dx();
    let (u, rho) = (state.u.values(), state.rho.values());
    let rho_sq: Vec<f64> = rho.iter().map(|r| r * r).collect();
    let coupling = periodic::centered(&rho_sq, dx);
    let bracket: Vec<f64> = ms_bracket(u, dx)
        .iter()
        .zip(&coupling)
        .map(|(b, c)| b + 0.5 * state.kappa * c)
        .collect();
    let gu = wide.apply_values(&bracket);
    let grho: Vec<f64> = periodic::centered(&periodic::mul(u, rho), dx).iter().map(|f| -f).collect();
    let (pu, prho) = match &state.previous {
        Some((pu, pr)) => (Some(pu.as_slice()), Some(pr.as_slice())),
        None => (None, None),
    };
    let u_new = leapfrog(u, pu, dt, &gu);
    let rho_new = leapfrog(rho, prho, dt, &grho);
    check_finite(&u_new, state.step)?;
    check_finite(&rho_new, state.step)?;
    let grid = *state.grid();
    Ok(Hs2State {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(grid, u_new)?,
        rho: Field::new(grid, rho_new)?,
        kappa: state.kappa,
        previous: Some((u.to_vec(), rho.to_vec())),
    })
}

/// Residual of the coupled `H_1` scheme for stacked unknowns `x = (u', ρ')`:
///
/// ```text
/// u' - u + Δt (δ̃²)† [(δ̃²ū)(δ_x ū) + δ_x(ū δ̃²ū) - κ ρ̄ δ_x ρ̄]
/// ρ' - ρ + Δt δ_x(ū ρ̄)
/// ```
pub fn hs2_h1_residual(
    narrow: &CirculantPinv,
    kappa: f64,
    dt: f64,
    u: &[f64],
    rho: &[f64],
    x: &[f64],
    out: &mut [f64],
) {
    let n = u.len();
    let dx = narrow.grid().dx();
    let (xu, xr) = x.split_at(n);
    let ubar = midpoint(u, xu);
    let rbar = midpoint(rho, xr);
    let rx = periodic::centered(&rbar, dx);
    let bracket: Vec<f64> = h1_bracket(&ubar, dx)
        .iter()
        .zip(rbar.iter().zip(&rx))
        .map(|(b, (r, d))| b - kappa * r * d)
        .collect();
    let g = narrow.apply_values(&bracket);
    let flux = periodic::centered(&periodic::mul(&ubar, &rbar), dx);
    let (ou, or) = out.split_at_mut(n);
    for k in 0..n {
        ou[k] = xu[k] - u[k] + dt * g[k];
        or[k] = xr[k] - rho[k] + dt * flux[k];
    }
}

pub fn hs2_h1_step(
    state: &Hs2State,
    dt: f64,
    narrow: &CirculantPinv,
    cfg: &SolveConfig,
) -> Result<Hs2State, SchemeError> {
    check_dt(dt)?;
    check_pinv(state.grid(), narrow, SecondDifference::Narrow)?;
    let (u, rho) = (state.u.values(), state.rho.values());
    check_finite(u, state.step)?;
    check_finite(rho, state.step)?;
    let x0: Vec<f64> = u.iter().chain(rho).copied().collect();
    let (x, _) = solve(|x, r| hs2_h1_residual(narrow, state.kappa, dt, u, rho, x, r), &x0, cfg)
        .map_err(solve_failure(state.step))?;
    check_finite(&x, state.step)?;
    let (xu, xr) = x.split_at(u.len());
    let grid = *state.grid();
    Ok(Hs2State {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(grid, xu.to_vec())?,
        rho: Field::new(grid, xr.to_vec())?,
        kappa: state.kappa,
        previous: None,
    })
}

/// `H_{1,d} = Σ Δx ((δ⁺u)² + κρ²)/2`, `H_{2,d} = Σ Δx (κuρ² + u(δ⁺u)²)/2`.
pub fn hs2_invariants(state: &Hs2State) -> (f64, f64) {
    let dx = state.grid().dx();
    let (u, rho) = (state.u.values(), state.rho.values());
    let fwd = periodic::forward(u, dx);
    let mut h1 = 0.0;
    let mut h2 = 0.0;
    for k in 0..u.len() {
        let d2 = fwd[k] * fwd[k];
        let r2 = rho[k] * rho[k];
        h1 += d2 + state.kappa * r2;
        h2 += state.kappa * u[k] * r2 + u[k] * d2;
    }
    (0.5 * dx * h1, 0.5 * dx * h2)
}
