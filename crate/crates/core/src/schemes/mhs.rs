//! Modified Hunter-Saxton on a periodic grid.
//!
//! * `ms`: leapfrog, `u^{i+1} = u^{i-1} + 2Δt (δ_x²)† [½δ_x((δ_x u)²) - δ_x²(u δ_x u) + 2ω δ_x u]`.
//! * `h1`: implicit midpoint form with `(δ̃_x²)†`, preserves `H_{1,d}` and the mean.

use crate::grid::{periodic, Field, Grid1D};
use crate::pinv::{CirculantPinv, SecondDifference};
use crate::solver::{solve, SolveConfig};

use super::{check_dt, check_finite, midpoint, solve_failure, SchemeError};

#[derive(Debug, Clone, PartialEq)]
pub struct MhsState {
    pub t: f64,
    pub step: usize,
    pub u: Field,
    pub omega: f64,
    previous: Option<Vec<f64>>,
}

impl MhsState {
    pub fn new(u: Field, omega: f64) -> Result<Self, SchemeError> {
        if !u.grid().is_periodic() {
            return Err(SchemeError::InvalidState("mHS schemes need a periodic grid".into()));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(SchemeError::InvalidState(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { t: 0.0, step: 0, u, omega, previous: None })
    }

    pub fn grid(&self) -> &Grid1D {
        self.u.grid()
    }

    /// Level `i - 1` of the leapfrog scheme.
    pub fn previous(&self) -> Option<&[f64]> {
        self.previous.as_deref()
    }
}

pub(crate) fn check_pinv(grid: &Grid1D, p: &CirculantPinv, kind: SecondDifference) -> Result<(), SchemeError> {
    if p.grid() != grid {
        return Err(SchemeError::InvalidState("pseudo-inverse grid does not match the state".into()));
    }
    if p.kind() != kind {
        return Err(SchemeError::InvalidState(format!("scheme needs the {kind:?} pseudo-inverse")));
    }
    Ok(())
}

/// Bracket of the multi-symplectic scheme without the `ω` term:
/// `½δ_x((δ_x u)²) - δ_x²(u δ_x u)`.
pub(crate) fn ms_bracket(u: &[f64], dx: f64) -> Vec<f64> {
    let ux = periodic::centered(u, dx);
    let sq: Vec<f64> = ux.iter().map(|d| d * d).collect();
    let a = periodic::centered(&sq, dx);
    let b = periodic::wide_second(&periodic::mul(u, &ux), dx);
    a.iter().zip(&b).map(|(a, b)| 0.5 * a - b).collect()
}

/// Combine a leapfrog or startup update `u^{i+1} = base + factor Δt g`.
pub(crate) fn leapfrog(current: &[f64], previous: Option<&[f64]>, dt: f64, g: &[f64]) -> Vec<f64> {
    match previous {
        Some(p) => p.iter().zip(g).map(|(p, g)| p + 2.0 * dt * g).collect(),
        None => current.iter().zip(g).map(|(c, g)| c + dt * g).collect(),
    }
}

pub fn mhs_ms_step(state: &MhsState, dt: f64, wide: &CirculantPinv) -> Result<MhsState, SchemeError> {
    check_dt(dt)?;
    check_pinv(state.grid(), wide, SecondDifference::Wide)?;
    let dx = state.grid().dx();
    let u = state.u.values();
    let ux = periodic::centered(u, dx);
    let bracket: Vec<f64> = ms_bracket(u, dx)
        .iter()
        .zip(&ux)
        .map(|(b, d)| b + 2.0 * state.omega * d)
        .collect();
    let g = wide.apply_values(&bracket);
    let u_new = leapfrog(u, state.previous.as_deref(), dt, &g);
    check_finite(&u_new, state.step)?;
    Ok(MhsState {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(*state.grid(), u_new)?,
        omega: state.omega,
        previous: Some(u.to_vec()),
    })
}

/// Bracket of the `H_1` scheme without the forcing term:
/// `(δ̃²ū)(δ_x ū) + δ_x(ū δ̃²ū)`.
pub(crate) fn h1_bracket(ubar: &[f64], dx: f64) -> Vec<f64> {
    let lap = periodic::narrow_second(ubar, dx);
    let ux = periodic::centered(ubar, dx);
    let flux = periodic::centered(&periodic::mul(ubar, &lap), dx);
    lap.iter().zip(&ux).zip(&flux).map(|((l, d), f)| l * d + f).collect()
}

/// `u' - u + Δt (δ̃²)† [(δ̃²ū)(δ_x ū) + δ_x(ū δ̃²ū) - 2ω δ_x ū]`.
pub fn mhs_h1_residual(narrow: &CirculantPinv, omega: f64, dt: f64, u: &[f64], x: &[f64], out: &mut [f64]) {
    let dx = narrow.grid().dx();
    let ubar = midpoint(u, x);
    let ux = periodic::centered(&ubar, dx);
    let bracket: Vec<f64> = h1_bracket(&ubar, dx)
        .iter()
        .zip(&ux)
        .map(|(b, d)| b - 2.0 * omega * d)
        .collect();
    let g = narrow.apply_values(&bracket);
    for k in 0..u.len() {
        out[k] = x[k] - u[k] + dt * g[k];
    }
}

pub fn mhs_h1_step(
    state: &MhsState,
    dt: f64,
    narrow: &CirculantPinv,
    cfg: &SolveConfig,
) -> Result<MhsState, SchemeError> {
    check_dt(dt)?;
    check_pinv(state.grid(), narrow, SecondDifference::Narrow)?;
    let u = state.u.values();
    check_finite(u, state.step)?;
    let (x, _) = solve(|x, r| mhs_h1_residual(narrow, state.omega, dt, u, x, r), u, cfg)
        .map_err(solve_failure(state.step))?;
    check_finite(&x, state.step)?;
    Ok(MhsState {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(*state.grid(), x)?,
        omega: state.omega,
        previous: None,
    })
}

/// `H_{1,d} = Σ Δx (δ⁺u)²/2`, `H_{2,d} = Σ Δx (u (δ⁺u)² + 2ω u²)/2`.
pub fn mhs_invariants(state: &MhsState) -> (f64, f64) {
    mhs_invariants_of(&state.u, state.omega)
}

pub fn mhs_invariants_of(u: &Field, omega: f64) -> (f64, f64) {
    let dx = u.grid().dx();
    let fwd = periodic::forward(u.values(), dx);
    let mut h1 = 0.0;
    let mut h2 = 0.0;
    for (v, d) in u.values().iter().zip(&fwd) {
        h1 += d * d;
        h2 += v * d * d + 2.0 * omega * v * v;
    }
    (0.5 * dx * h1, 0.5 * dx * h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinv::build_pinv;
    use crate::schemes::mean;

    fn grid() -> Grid1D {
        Grid1D::periodic(3.0, 32).unwrap()
    }

    fn smooth(g: Grid1D) -> Field {
        let l = g.length();
        Field::from_fn(g, |x| 0.2 + 0.3 * (2.0 * std::f64::consts::PI * x / l).sin()).unwrap()
    }

    #[test]
    fn constants_are_fixed() {
        let g = grid();
        let wide = build_pinv(g, SecondDifference::Wide).unwrap();
        let narrow = build_pinv(g, SecondDifference::Narrow).unwrap();
        let mut s = MhsState::new(Field::from_fn(g, |_| 0.7).unwrap(), 1.5).unwrap();
        for _ in 0..4 {
            s = mhs_ms_step(&s, 0.02, &wide).unwrap();
        }
        assert!(s.u.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
        let h = mhs_h1_step(&s, 0.02, &narrow, &SolveConfig::default()).unwrap();
        assert!(h.u.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn invariants_examples() {
        let g = grid();
        let zero = MhsState::new(Field::zeros(g), 1.5).unwrap();
        assert_eq!(mhs_invariants(&zero), (0.0, 0.0));
        let one = MhsState::new(Field::from_fn(g, |_| 1.0).unwrap(), 1.5).unwrap();
        let (h1, h2) = mhs_invariants(&one);
        assert_eq!(h1, 0.0);
        assert!((h2 - 1.5 * g.length()).abs() < 1e-13);
    }

    #[test]
    fn wrong_operator_rejected() {
        let g = grid();
        let narrow = build_pinv(g, SecondDifference::Narrow).unwrap();
        let s = MhsState::new(smooth(g), 1.5).unwrap();
        assert!(matches!(mhs_ms_step(&s, 0.02, &narrow), Err(SchemeError::InvalidState(_))));
        let other = build_pinv(Grid1D::periodic(3.0, 16).unwrap(), SecondDifference::Wide).unwrap();
        assert!(mhs_ms_step(&s, 0.02, &other).is_err());
        assert!(MhsState::new(smooth(g), 0.0).is_err());
    }

    #[test]
    fn h1_step_conserves_mean_and_energy() {
        let g = grid();
        let narrow = build_pinv(g, SecondDifference::Narrow).unwrap();
        let s = MhsState::new(smooth(g), 1.5).unwrap();
        let n = mhs_h1_step(&s, 0.02, &narrow, &SolveConfig::default()).unwrap();
        assert!((mean(n.u.values()) - mean(s.u.values())).abs() < 1e-13);
        assert!((mhs_invariants(&n).0 - mhs_invariants(&s).0).abs() < 1e-9);
    }

    #[test]
    fn ms_two_level_cache() {
        let g = grid();
        let wide = build_pinv(g, SecondDifference::Wide).unwrap();
        let s = MhsState::new(smooth(g), 1.5).unwrap();
        assert!(s.previous().is_none());
        let n = mhs_ms_step(&s, 0.02, &wide).unwrap();
        assert_eq!(n.previous().unwrap(), s.u.values());
    }
}
