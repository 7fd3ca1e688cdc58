//! Hunter-Saxton on the truncated half-line `[-L, L]`.
//!
//! Boundary data throughout: `u^0 = 0`, `u^{-1} = u^1`, `u^{N+1} = u^{N-1}`,
//! `u^{N+2} = 2u^N - u^{N-2}` (vanishing value and slope at `-L`, vanishing
//! slope and curvature at `L`).
//!
//! * `eb1`: leapfrog on `v = δ_x u`, `δ_t v + δ_x(u v) = v²/2`, with `u`
//!   recovered from `v` by inverting the centered difference.
//! * `eb2`: leapfrog on `(u, α)` with the pressure `P` from `-δ_x² P = α/2`.
//! * `h1`: implicit, preserves `H_{1,d}`.
//! * `h2`: implicit, satisfies an exact discrete `H_{2,d}` balance law.

use crate::grid::{trapz_values, DomainKind, Field, GhostRule, Grid1D, GHOST_DEPTH};
use crate::solver::{solve, SolveConfig};

use super::{check_dt, check_finite, midpoint, solve_failure, SchemeError};

const G: usize = GHOST_DEPTH;

/// Values of an earlier time level kept by the leapfrog schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct HsLevel {
    pub u: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsState {
    pub t: f64,
    /// Number of steps taken so far.
    pub step: usize,
    pub u: Field,
    /// `v = δ_x u`, evolved by `eb1`.
    pub v: Option<Field>,
    /// `α ≈ u_x²`, evolved by `eb2`.
    pub alpha: Option<Field>,
    /// Pressure from `α`, normalised to `P^0 = P^1 = 0`.
    pub pressure: Option<Field>,
    previous: Option<HsLevel>,
    rule: GhostRule,
}

impl HsState {
    /// State for the implicit schemes. Requires a half-line grid and `u^0 = 0`.
    pub fn new(u: Field) -> Result<Self, SchemeError> {
        let grid = *u.grid();
        if grid.kind() != DomainKind::HalfLineTruncated {
            return Err(SchemeError::InvalidState("half-line schemes need a half-line grid".into()));
        }
        if u.values()[0] != 0.0 {
            return Err(SchemeError::InvalidState(format!(
                "boundary value u^0 must be 0, got {}",
                u.values()[0]
            )));
        }
        let rule = GhostRule::hunter_saxton(&grid)?;
        Ok(Self { t: 0.0, step: 0, u, v: None, alpha: None, pressure: None, previous: None, rule })
    }

    /// State for `eb1`: `v^n = δ_x u^n` for `0 < n < N`, `v^0 = v^N = 0`.
    pub fn for_eb1(u: Field) -> Result<Self, SchemeError> {
        let mut s = Self::new(u)?;
        let n = s.grid().n();
        let dx = s.grid().dx();
        let uv = s.u.values();
        let mut v = vec![0.0; n + 1];
        for k in 1..n {
            v[k] = (uv[k + 1] - uv[k - 1]) / (2.0 * dx);
        }
        s.v = Some(Field::new(*s.grid(), v)?);
        Ok(s)
    }

    /// State for `eb2`: `α = (δ_x u)²` with ghosted `u`, and its pressure.
    pub fn for_eb2(u: Field) -> Result<Self, SchemeError> {
        let mut s = Self::new(u)?;
        let grid = *s.grid();
        let buf = s.padded(s.u.values());
        let dx = grid.dx();
        let alpha: Vec<f64> = (0..=grid.n() as isize)
            .map(|k| ((at(&buf, k + 1) - at(&buf, k - 1)) / (2.0 * dx)).powi(2))
            .collect();
        let (p, _) = solve_pressure(&alpha, dx);
        s.pressure = Some(Field::new(grid, p)?);
        s.alpha = Some(Field::new(grid, alpha)?);
        Ok(s)
    }

    pub fn grid(&self) -> &Grid1D {
        self.u.grid()
    }

    /// Level `i - 1`, present once a leapfrog scheme has taken a step.
    pub fn previous(&self) -> Option<&HsLevel> {
        self.previous.as_ref()
    }

    pub fn ghost_rule(&self) -> &GhostRule {
        &self.rule
    }

    fn padded(&self, u: &[f64]) -> Vec<f64> {
        padded_with(&self.rule, u)
    }
}

/// Ghost-extended copy; node `i` sits at `i + GHOST_DEPTH`, undefined
/// ghosts are NaN.
fn padded_with(rule: &GhostRule, u: &[f64]) -> Vec<f64> {
    let n = u.len() - 1;
    let mut buf = vec![f64::NAN; n + 1 + 2 * G];
    buf[G..G + n + 1].copy_from_slice(u);
    for g in rule.left().iter().chain(rule.right()) {
        buf[(g.index + G as isize) as usize] = g.terms.iter().map(|&(j, w)| w * u[j]).sum();
    }
    buf
}

#[inline]
fn at(buf: &[f64], n: isize) -> f64 {
    buf[(n + G as isize) as usize]
}

/// Invert the centered difference: `u^{n+1} = u^{n-1} + 2Δx v^n` from
/// `u^0 = u^1 = 0`.
pub fn reconstruct_from_slope(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let mut u = vec![0.0; n + 1];
    for k in 1..n {
        u[k + 1] = u[k - 1] + 2.0 * dx * v[k];
    }
    u
}

/// Pressure for `-δ_x² P = α/2` on `0..=N` by the wide-stencil recursion
/// `P^{n+2} = 2P^n - P^{n-2} - 2Δx² α^n`, with even reflection about
/// `x_0` (`P^{-k} = P^k`, so `δ_x P^0 = 0`) and `P^0 = P^1 = 0`.
/// Returns `(P, δ_x P)`, both on `0..=N`.
pub fn solve_pressure(alpha: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len() - 1;
    // p[k] holds P^{k-1} for k = 0..=N+2.
    let mut p = vec![0.0; n + 3];
    let dx2 = dx * dx;
    p[3] = -dx2 * alpha[0];
    for k in 1..n {
        let lower = if k >= 2 { p[k - 1] } else { p[3 - k] };
        p[k + 3] = 2.0 * p[k + 1] - lower - 2.0 * dx2 * alpha[k];
    }
    let q: Vec<f64> = (0..=n)
        .map(|k| {
            let left = if k == 0 { p[2] } else { p[k] };
            (p[k + 2] - left) / (2.0 * dx)
        })
        .collect();
    (p[1..=n + 1].to_vec(), q)
}

fn require<'a>(f: &'a Option<Field>, what: &str) -> Result<&'a Field, SchemeError> {
    f.as_ref().ok_or_else(|| SchemeError::InvalidState(format!("state has no {what} field")))
}

/// One step of the first Euler box scheme.
pub fn eb1_step(state: &HsState, dt: f64) -> Result<HsState, SchemeError> {
    check_dt(dt)?;
    let v = require(&state.v, "v")?.values();
    let grid = *state.grid();
    let (n, dx) = (grid.n(), grid.dx());
    let u = state.u.values();
    let prev_v = match &state.previous {
        Some(HsLevel { v: Some(pv), .. }) => Some(pv.as_slice()),
        Some(_) => return Err(SchemeError::InvalidState("previous level has no v".into())),
        None => None,
    };
    let mut v_new = vec![0.0; n + 1];
    for k in 1..n {
        let rhs = 0.5 * v[k] * v[k] - (u[k + 1] * v[k + 1] - u[k - 1] * v[k - 1]) / (2.0 * dx);
        v_new[k] = match prev_v {
            Some(pv) => pv[k] + 2.0 * dt * rhs,
            None => v[k] + dt * rhs,
        };
    }
    check_finite(&v_new, state.step)?;
    let u_new = reconstruct_from_slope(&v_new, dx);
    check_finite(&u_new, state.step)?;
    Ok(HsState {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(grid, u_new)?,
        v: Some(Field::new(grid, v_new)?),
        alpha: None,
        pressure: None,
        previous: Some(HsLevel { u: u.to_vec(), v: Some(v.to_vec()), alpha: None }),
        rule: state.rule.clone(),
    })
}

/// One step of the second Euler box scheme.
pub fn eb2_step(state: &HsState, dt: f64) -> Result<HsState, SchemeError> {
    check_dt(dt)?;
    let alpha = require(&state.alpha, "alpha")?.values();
    let grid = *state.grid();
    let (n, dx) = (grid.n(), grid.dx());
    let u = state.u.values();
    let prev = match &state.previous {
        Some(HsLevel { u: pu, alpha: Some(pa), .. }) => Some((pu.as_slice(), pa.as_slice())),
        Some(_) => return Err(SchemeError::InvalidState("previous level has no alpha".into())),
        None => None,
    };
    let (_, q) = solve_pressure(alpha, dx);
    // Even reflection of u and α about both ends.
    let refl = |k: isize| -> usize {
        if k < 0 {
            (-k) as usize
        } else if k as usize > n {
            2 * n - k as usize
        } else {
            k as usize
        }
    };
    let mut alpha_new = vec![0.0; n + 1];
    let mut u_new = vec![0.0; n + 1];
    for k in 0..=n {
        let (r, l) = (refl(k as isize + 1), refl(k as isize - 1));
        let flux = (u[r] * alpha[r] - u[l] * alpha[l]) / (2.0 * dx);
        alpha_new[k] = match prev {
            Some((_, pa)) => pa[k] - 2.0 * dt * flux,
            None => alpha[k] - dt * flux,
        };
        if k >= 1 {
            let force = (u[r] * u[r] - u[l] * u[l]) / (4.0 * dx) + q[k];
            u_new[k] = match prev {
                Some((pu, _)) => pu[k] - 2.0 * dt * force,
                None => u[k] - dt * force,
            };
        }
    }
    check_finite(&alpha_new, state.step)?;
    check_finite(&u_new, state.step)?;
    let (p_new, _) = solve_pressure(&alpha_new, dx);
    Ok(HsState {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(grid, u_new)?,
        v: None,
        alpha: Some(Field::new(grid, alpha_new)?),
        pressure: Some(Field::new(grid, p_new)?),
        previous: Some(HsLevel { u: u.to_vec(), v: None, alpha: Some(alpha.to_vec()) }),
        rule: state.rule.clone(),
    })
}

fn with_boundary(x: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(x.len() + 1);
    u.push(0.0);
    u.extend_from_slice(x);
    u
}

/// Residual of the `H_1`-preserving scheme for the unknowns `u^{1..N}` at
/// level `i + 1`, scaled by `Δt`:
/// `δ̃²(u' - u) + Δt [(δ̃²ū)(δ_x ū) + δ_x(ū δ̃²ū)]` at `n = 1..N`.
pub fn h1_residual(rule: &GhostRule, dx: f64, dt: f64, u: &[f64], x: &[f64], out: &mut [f64]) {
    let n = u.len() - 1;
    let a = padded_with(rule, u);
    let b = padded_with(rule, &with_boundary(x));
    let m = midpoint(&a, &b);
    let dx2 = dx * dx;
    let lap = |f: &[f64], k: usize| (f[k + 1] - 2.0 * f[k] + f[k - 1]) / dx2;
    for k in 1..=n {
        let s = k + G;
        let d2dt = lap(&b, s) - lap(&a, s);
        let rhs = -lap(&m, s) * (m[s + 1] - m[s - 1]) / (2.0 * dx)
            - (m[s + 1] * lap(&m, s + 1) - m[s - 1] * lap(&m, s - 1)) / (2.0 * dx);
        out[k - 1] = d2dt - dt * rhs;
    }
}

/// One step of the `H_1`-preserving scheme.
pub fn h1_step(state: &HsState, dt: f64, cfg: &SolveConfig) -> Result<HsState, SchemeError> {
    check_dt(dt)?;
    let grid = *state.grid();
    let u = state.u.values();
    check_finite(u, state.step)?;
    let (x, _) = solve(
        |x, r| h1_residual(&state.rule, grid.dx(), dt, u, x, r),
        &u[1..],
        cfg,
    )
    .map_err(solve_failure(state.step))?;
    implicit_result(state, dt, with_boundary(&x))
}

fn implicit_result(state: &HsState, dt: f64, u_new: Vec<f64>) -> Result<HsState, SchemeError> {
    check_finite(&u_new, state.step)?;
    Ok(HsState {
        t: state.t + dt,
        step: state.step + 1,
        u: Field::new(*state.grid(), u_new)?,
        v: None,
        alpha: None,
        pressure: None,
        previous: None,
        rule: state.rule.clone(),
    })
}

/// `v = δ_x u` on `0..=N` with `v^0 = 0` and `v^N = 0` (from `u^{N+1} = u^{N-1}`).
pub fn slope_with_boundary(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let mut v = vec![0.0; n + 1];
    for k in 1..n {
        v[k] = (u[k + 1] - u[k - 1]) / (2.0 * dx);
    }
    v
}

/// Discrete antiderivative paired with the centered difference:
/// `0` at `n = 0, 1`; `2Δx Σ_{k=1}^{m} w^{2k-1}` at `n = 2m`;
/// `2Δx Σ_{k=1}^{m} w^{2k}` at `n = 2m + 1`.
pub fn inverse_centered_difference(w: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for k in 2..w.len() {
        out[k] = out[k - 2] + 2.0 * dx * w[k - 1];
    }
    out
}

/// Residual of the `H_2` scheme:
/// `u' - u - Δt(-ū v̄ + δ_x^{-1}((v'² + v²)/4))` at `n = 1..N`.
pub fn h2_residual(dx: f64, dt: f64, u: &[f64], x: &[f64], out: &mut [f64]) {
    let n = u.len() - 1;
    let un = with_boundary(x);
    let v = slope_with_boundary(u, dx);
    let vn = slope_with_boundary(&un, dx);
    let w: Vec<f64> = v.iter().zip(&vn).map(|(a, b)| 0.25 * (a * a + b * b)).collect();
    let inv = inverse_centered_difference(&w, dx);
    for k in 1..=n {
        let ubar = 0.5 * (u[k] + un[k]);
        let vbar = 0.5 * (v[k] + vn[k]);
        out[k - 1] = un[k] - u[k] - dt * (-ubar * vbar + inv[k]);
    }
}

/// One step of the `H_2` scheme.
pub fn h2_step(state: &HsState, dt: f64, cfg: &SolveConfig) -> Result<HsState, SchemeError> {
    check_dt(dt)?;
    let dx = state.grid().dx();
    let u = state.u.values();
    check_finite(u, state.step)?;
    let (x, _) = solve(|x, r| h2_residual(dx, dt, u, x, r), &u[1..], cfg)
        .map_err(solve_failure(state.step))?;
    implicit_result(state, dt, with_boundary(&x))
}

/// `(H_{1,d}, H_{2,d})` with ghosts from `rule`:
///
/// ```text
/// H_{1,d} = Σ'' (Δx/2) ((δ⁺u)² + (δ⁻u)²) / 2
/// H_{2,d} = Σ'' (Δx/2) u (δ_x u)²
/// ```
pub fn hs_invariants_with(u: &Field, rule: &GhostRule) -> Result<(f64, f64), SchemeError> {
    let grid = *u.grid();
    if grid.kind() != DomainKind::HalfLineTruncated {
        return Err(SchemeError::InvalidState("half-line invariants need a half-line grid".into()));
    }
    let dx = grid.dx();
    let b = padded_with(rule, u.values());
    let n = grid.n() as isize;
    let mut e1 = Vec::with_capacity(grid.node_count());
    let mut e2 = Vec::with_capacity(grid.node_count());
    for k in 0..=n {
        let fwd = (at(&b, k + 1) - at(&b, k)) / dx;
        let bwd = (at(&b, k) - at(&b, k - 1)) / dx;
        let c = (at(&b, k + 1) - at(&b, k - 1)) / (2.0 * dx);
        e1.push(0.25 * (fwd * fwd + bwd * bwd));
        e2.push(0.5 * at(&b, k) * c * c);
    }
    let h1 = trapz_values(&e1, dx, DomainKind::HalfLineTruncated);
    let h2 = trapz_values(&e2, dx, DomainKind::HalfLineTruncated);
    if !(h1.is_finite() && h2.is_finite()) {
        return Err(SchemeError::InvalidState("ghost rule leaves a required ghost undefined".into()));
    }
    Ok((h1, h2))
}

/// Discrete Hamiltonians of a state under the scheme boundary conditions.
pub fn hs_invariants(state: &HsState) -> (f64, f64) {
    hs_invariants_with(&state.u, &state.rule).expect("Hunter-Saxton ghosts cover both stencils")
}

/// Discrete `H_2` balance of one step from `before` to `after`:
/// `(H_{2,d}' - H_{2,d})/Δt - [a^{N-1} a^N / 2 + ū^{N-1} v̄^{N-1} a^N / 2]`
/// with `a = δ_t⁺ u`. The `h2` scheme makes this vanish.
pub fn h2_balance_residual(before: &HsState, after: &HsState, dt: f64) -> f64 {
    let (_, h_before) = hs_invariants(before);
    let (_, h_after) = hs_invariants(after);
    let dx = before.grid().dx();
    let (u, un) = (before.u.values(), after.u.values());
    let n = u.len() - 1;
    let a = |k: usize| (un[k] - u[k]) / dt;
    let v = slope_with_boundary(u, dx);
    let vn = slope_with_boundary(un, dx);
    let ubar = 0.5 * (u[n - 1] + un[n - 1]);
    let vbar = 0.5 * (v[n - 1] + vn[n - 1]);
    let flux = 0.5 * a(n - 1) * a(n) + 0.5 * ubar * vbar * a(n);
    (h_after - h_before) / dt - flux
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::hs_exact;

    fn exact_state() -> HsState {
        let g = Grid1D::half_line(6.0, 201).unwrap();
        HsState::new(Field::from_fn(g, |x| hs_exact(x, 0.0)).unwrap()).unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = Grid1D::half_line(6.0, 40).unwrap();
        let z = Field::zeros(g);
        let cfg = SolveConfig::default();
        let mut s1 = HsState::for_eb1(z.clone()).unwrap();
        let mut s2 = HsState::for_eb2(z.clone()).unwrap();
        for _ in 0..3 {
            s1 = eb1_step(&s1, 0.01).unwrap();
            s2 = eb2_step(&s2, 0.01).unwrap();
        }
        assert!(s1.u.max_abs() == 0.0 && s1.v.as_ref().unwrap().max_abs() == 0.0);
        assert!(s2.u.max_abs() == 0.0 && s2.alpha.as_ref().unwrap().max_abs() == 0.0);
        let s = HsState::new(z).unwrap();
        assert_eq!(h1_step(&s, 0.01, &cfg).unwrap().u.max_abs(), 0.0);
        assert_eq!(h2_step(&s, 0.01, &cfg).unwrap().u.max_abs(), 0.0);
    }

    #[test]
    fn rejects_nonzero_left_value() {
        let g = Grid1D::half_line(1.0, 8).unwrap();
        assert!(HsState::new(Field::from_fn(g, |_| 1.0).unwrap()).is_err());
    }

    #[test]
    fn invariants_of_simple_fields() {
        let g = Grid1D::half_line(6.0, 24).unwrap();
        assert_eq!(hs_invariants(&HsState::new(Field::zeros(g)).unwrap()), (0.0, 0.0));
        let lin = Field::from_fn(g, |x| x).unwrap();
        let (h1, h2) = hs_invariants_with(&lin, &GhostRule::linear_extension(&g).unwrap()).unwrap();
        assert!((h1 - 6.0).abs() < 1e-12);
        assert!(h2.abs() < 1e-12);
    }

    #[test]
    fn invariants_of_exact_data_converge() {
        // Kinks at x = 0 and x = 1 fall between nodes, so sampled data sees
        // the slope of its piecewise-linear interpolant: H1 is low by O(Δx).
        let err = |n: usize| {
            let g = Grid1D::half_line(6.0, n).unwrap();
            let s = HsState::new(Field::from_fn(g, |x| hs_exact(x, 0.0)).unwrap()).unwrap();
            let (h1, h2) = hs_invariants(&s);
            ((h1 - 0.5).abs(), (h2 - 0.25).abs())
        };
        let (c1, c2) = err(201);
        let (f1, f2) = err(2001);
        assert!(c1 > 0.01 && c1 < 0.02, "coarse H1 error {c1}");
        assert!(f1 < c1 / 5.0 && f2 < c2 / 5.0, "H1 {c1} -> {f1}, H2 {c2} -> {f2}");
        assert!(f1 <= 0.01 && f2 <= 0.01);
    }

    #[test]
    fn inverse_centered_difference_table() {
        let dx = 0.5;
        let w = [10.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let out = inverse_centered_difference(&w, dx);
        // n = 2: w1; n = 3: w2; n = 4: w1 + w3; n = 5: w2 + w4.
        assert_eq!(out, vec![0.0, 0.0, 1.0, 2.0, 4.0, 6.0]);
        assert!(inverse_centered_difference(&[0.0; 7], dx).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pressure_recursion_satisfies_wide_equation() {
        let dx = 0.1;
        let alpha: Vec<f64> = (0..21).map(|k| (k as f64 * 0.3).sin().powi(2)).collect();
        let (p, q) = solve_pressure(&alpha, dx);
        assert_eq!((p[0], p[1], q[0]), (0.0, 0.0, 0.0));
        for k in 2..19 {
            let wide = (p[k + 2] - 2.0 * p[k] + p[k - 2]) / (4.0 * dx * dx);
            assert!((-wide - 0.5 * alpha[k]).abs() < 1e-12);
        }
        for k in 1..20 {
            assert!((q[k] - (p[k + 1] - p[k - 1]) / (2.0 * dx)).abs() < 1e-12);
        }
    }

    #[test]
    fn eb1_keeps_boundary_data() {
        let s0 = exact_state();
        let mut s = HsState::for_eb1(s0.u.clone()).unwrap();
        for _ in 0..10 {
            s = eb1_step(&s, 0.01).unwrap();
            let v = s.v.as_ref().unwrap().values();
            assert_eq!(v[0], 0.0);
            assert_eq!(v[v.len() - 1], 0.0);
            assert_eq!(s.u.values()[0], 0.0);
            assert_eq!(s.u.values()[1], s.u.values()[0]);
        }
        assert_eq!(s.step, 10);
        assert!((s.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn h1_one_step_conserves() {
        let s = exact_state();
        let n = h1_step(&s, 0.01, &SolveConfig::default()).unwrap();
        let (a, _) = hs_invariants(&s);
        let (b, _) = hs_invariants(&n);
        assert!((a - b).abs() <= 1e-9, "drift {}", (a - b).abs());
        assert_eq!(n.u.values()[0], 0.0);
    }

    #[test]
    fn h2_one_step_balance() {
        let s = exact_state();
        let n = h2_step(&s, 0.01, &SolveConfig::default()).unwrap();
        let r = h2_balance_residual(&s, &n, 0.01);
        assert!(r.abs() <= 1e-9, "balance residual {r}");
    }

    #[test]
    fn rejects_bad_dt() {
        let s = HsState::for_eb1(exact_state().u).unwrap();
        assert!(matches!(eb1_step(&s, 0.0), Err(SchemeError::InvalidState(_))));
        assert!(matches!(eb1_step(&s, f64::NAN), Err(SchemeError::InvalidState(_))));
    }

    #[test]
    fn scheme_specific_fields_required() {
        let s = exact_state();
        assert!(matches!(eb1_step(&s, 0.01), Err(SchemeError::InvalidState(_))));
        assert!(matches!(eb2_step(&s, 0.01), Err(SchemeError::InvalidState(_))));
    }
}
