//! Reference solutions: the exact weak half-line solution of the
//! Hunter-Saxton equation and periodic travelling waves of the modified and
//! two-component equations.
//!
//! A travelling wave `u = φ(x - ct)` satisfies `(φ')² = F(φ)` with
//!
//! ```text
//! mHS:  F(φ) = 2ω (M - φ)(φ - m) / (c - φ)
//! 2HS:  F(φ) = b (Z - φ)(φ - z) / (c - φ)²,    ρ = ψ = a / (c - φ),  a = √(b (c - z)(c - Z))
//! ```
//!
//! The square-root form is singular where `F` vanishes, so the generator
//! integrates the differentiated form `φ'' = F'(φ) / 2` from the minimum
//! with `φ' = 0` and detects the period as the distance to the next minimum.

use thiserror::Error;

use crate::grid::{periodic, Field, Grid1D, GridError};
use crate::ode::{Dopri5, OdeError};

/// Absolute and relative tolerance of the wave ODE integration.
pub const WAVE_ODE_TOL: f64 = 1e-11;
/// Width of the bracket around a detected minimum.
pub const EVENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("invalid wave parameters: {0}")]
    InvalidParameters(String),
    #[error("no period found within x <= {budget}")]
    PeriodNotFound { budget: f64 },
    #[error("wave ODE failed: {0}")]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Exact weak solution on the half-line:
/// `0` for `x <= 0`, `x / s` for `0 < x < s²`, `s` beyond, with `s = t/2 + 1`.
pub fn hs_exact(x: f64, t: f64) -> f64 {
    let s = 0.5 * t + 1.0;
    if x <= 0.0 {
        0.0
    } else if x < s * s {
        x / s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveSpec {
    /// Modified Hunter-Saxton wave oscillating between `min` and `max`.
    Mhs { omega: f64, min: f64, max: f64, speed: f64 },
    /// Two-component Hunter-Saxton wave; only `kappa = 1` has smooth waves here.
    Hs2 { b: f64, min: f64, max: f64, speed: f64, kappa: f64 },
}

impl WaveSpec {
    pub fn validate(&self) -> Result<(), WaveError> {
        let bad = |s: String| Err(WaveError::InvalidParameters(s));
        let (min, max, speed) = match *self {
            WaveSpec::Mhs { omega, min, max, speed } => {
                if !(omega > 0.0) {
                    return bad(format!("omega must be positive, got {omega}"));
                }
                (min, max, speed)
            }
            WaveSpec::Hs2 { b, min, max, speed, kappa } => {
                if !(b > 0.0) {
                    return bad(format!("b must be positive, got {b}"));
                }
                if kappa == -1.0 {
                    return bad("kappa = -1 travelling waves are not supported".into());
                }
                if kappa != 1.0 {
                    return bad(format!("kappa must be 1, got {kappa}"));
                }
                (min, max, speed)
            }
        };
        if !(min < max && max < speed) || ![min, max, speed].iter().all(|v| v.is_finite()) {
            return bad(format!("need min < max < speed, got {min}, {max}, {speed}"));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        match *self {
            WaveSpec::Mhs { speed, .. } | WaveSpec::Hs2 { speed, .. } => speed,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match *self {
            WaveSpec::Mhs { min, max, .. } | WaveSpec::Hs2 { min, max, .. } => (min, max),
        }
    }

    /// `a = √(b (c - z)(c - Z))` for 2HS waves.
    pub fn density_constant(&self) -> Option<f64> {
        match *self {
            WaveSpec::Hs2 { b, min, max, speed, .. } => Some((b * (speed - min) * (speed - max)).sqrt()),
            WaveSpec::Mhs { .. } => None,
        }
    }

    /// Right-hand side of `(φ')² = F(φ)`.
    pub fn first_integral(&self, phi: f64) -> f64 {
        match *self {
            WaveSpec::Mhs { omega, min, max, speed } => {
                2.0 * omega * (max - phi) * (phi - min) / (speed - phi)
            }
            WaveSpec::Hs2 { b, min, max, speed, .. } => {
                b * (max - phi) * (phi - min) / (speed - phi).powi(2)
            }
        }
    }

    /// `F'(φ)`.
    pub fn first_integral_derivative(&self, phi: f64) -> f64 {
        let (min, max) = self.range();
        let g = (max - phi) * (phi - min);
        let dg = max + min - 2.0 * phi;
        match *self {
            WaveSpec::Mhs { omega, speed, .. } => {
                let d = speed - phi;
                2.0 * omega * (dg * d + g) / (d * d)
            }
            WaveSpec::Hs2 { b, speed, .. } => {
                let d = speed - phi;
                b * (dg * d + 2.0 * g) / (d * d * d)
            }
        }
    }

    fn length_budget(&self) -> f64 {
        let (min, max) = self.range();
        100.0 * (max - min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravellingWave {
    pub spec: WaveSpec,
    pub grid: Grid1D,
    pub phi: Field,
    pub dphi: Field,
    /// Density profile `ψ = a / (c - φ)`, 2HS only.
    pub psi: Option<Field>,
    pub period: f64,
}

fn wave_ode(spec: WaveSpec) -> Dopri5<impl Fn(&[f64; 2]) -> [f64; 2], 2> {
    Dopri5::new(move |y: &[f64; 2]| [y[1], 0.5 * spec.first_integral_derivative(y[0])], WAVE_ODE_TOL)
}

/// Distance between the starting minimum and the next one.
pub fn detect_period(spec: &WaveSpec) -> Result<f64, WaveError> {
    spec.validate()?;
    let (min, _) = spec.range();
    let ode = wave_ode(*spec);
    let budget = spec.length_budget();
    let mut x = 0.0;
    let mut y = [min, 0.0];
    let mut h = 1e-3;
    let mut descending = false;
    while x < budget {
        let (taken, y_new, next) = ode.adaptive_step(x, &y, h, budget - x)?;
        if y[1] < 0.0 {
            descending = true;
        }
        if descending && y[1] < 0.0 && y_new[1] >= 0.0 {
            // Bisect on the step length from the bracket start.
            let (mut lo, mut hi) = (0.0, taken);
            while hi - lo > EVENT_TOL {
                let mid = 0.5 * (lo + hi);
                if ode.trial_step(&y, mid).y[1] < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(x + 0.5 * (lo + hi));
        }
        x += taken;
        y = y_new;
        h = next;
    }
    Err(WaveError::PeriodNotFound { budget })
}

/// Generate one period of the wave sampled on an `n`-node periodic grid
/// over `[0, L_per)`, with `φ(0)` at the minimum.
pub fn generate_wave(spec: &WaveSpec, n: usize) -> Result<TravellingWave, WaveError> {
    let period = detect_period(spec)?;
    let grid = Grid1D::periodic(period, n)?;
    let ode = wave_ode(*spec);
    let (min, _) = spec.range();
    let mut y = [min, 0.0];
    let mut h = 1e-3;
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    phi.push(y[0]);
    dphi.push(y[1]);
    for k in 1..n {
        let (y_new, h_next) = ode.integrate(grid.x(k - 1), y, grid.x(k), h)?;
        y = y_new;
        h = h_next.max(1e-4);
        phi.push(y[0]);
        dphi.push(y[1]);
    }
    let psi = spec
        .density_constant()
        .map(|a| Field::new(grid, phi.iter().map(|p| a / (spec.speed() - p)).collect()))
        .transpose()?;
    Ok(TravellingWave {
        spec: *spec,
        grid,
        phi: Field::new(grid, phi)?,
        dphi: Field::new(grid, dphi)?,
        psi,
        period,
    })
}

/// Integrate the wave ODE from the minimum to `x` without sampling.
pub fn integrate_profile(spec: &WaveSpec, x: f64) -> Result<[f64; 2], WaveError> {
    spec.validate()?;
    let (min, _) = spec.range();
    if x <= 0.0 {
        return Ok([min, 0.0]);
    }
    Ok(wave_ode(*spec).integrate(0.0, [min, 0.0], x, 1e-3)?.0)
}

impl TravellingWave {
    /// Profile at arbitrary `xi`, by periodic cubic Hermite interpolation of
    /// the samples and their exact slopes.
    pub fn phi_at(&self, xi: f64) -> f64 {
        let n = self.grid.n();
        let h = self.grid.dx();
        let s = xi.rem_euclid(self.period) / h;
        let k = (s.floor() as usize).min(n - 1);
        let t = s - k as f64;
        let k1 = (k + 1) % n;
        let (p0, p1) = (self.phi.values()[k], self.phi.values()[k1]);
        let (d0, d1) = (self.dphi.values()[k] * h, self.dphi.values()[k1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * d1
    }

    pub fn psi_at(&self, xi: f64) -> Option<f64> {
        self.spec.density_constant().map(|a| a / (self.spec.speed() - self.phi_at(xi)))
    }
}

/// `φ((x - ct) mod L_per)`.
pub fn exact_shifted(wave: &TravellingWave, t: f64, x: f64) -> f64 {
    wave.phi_at(x - wave.spec.speed() * t)
}

/// `ψ((x - ct) mod L_per)`; `None` for mHS waves.
pub fn exact_shifted_density(wave: &TravellingWave, t: f64, x: f64) -> Option<f64> {
    wave.psi_at(x - wave.spec.speed() * t)
}

/// Uniform periodic mean, the discrete form of `h = (1/L) ∫ f dx`.
pub fn mean_constant_h(f: &Field) -> f64 {
    f.values().iter().sum::<f64>() / f.values().len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConstants {
    /// Rank -1 constant.
    pub a: f64,
    /// Rank 0 constant.
    pub h: f64,
}

/// Integration constants of the periodic mHS equation for the state `u`,
/// with `u_t` supplied by the caller (e.g. `-c φ'` for a travelling wave).
///
/// `a = -mean(u_x²/2 + 2ωu)`; `h = mean(u_t + u u_x - ∂⁻¹(u_x²/2 + 2ωu + a))`,
/// where `∂⁻¹` is the cumulative trapezoid from `x_0`.
pub fn mhs_integration_constants(u: &Field, u_t: &Field, omega: f64) -> Result<IntegrationConstants, GridError> {
    if !u.grid().is_periodic() {
        return Err(GridError::WrongKind { expected: crate::grid::DomainKind::Periodic });
    }
    if u.grid() != u_t.grid() {
        return Err(GridError::GridMismatch);
    }
    let dx = u.grid().dx();
    let ux = periodic::centered(u.values(), dx);
    let source: Vec<f64> = ux.iter().zip(u.values()).map(|(d, v)| 0.5 * d * d + 2.0 * omega * v).collect();
    let a = -source.iter().sum::<f64>() / source.len() as f64;
    let integrand: Vec<f64> = source.iter().map(|s| s + a).collect();
    let mut cumulative = vec![0.0; integrand.len()];
    for k in 1..integrand.len() {
        cumulative[k] = cumulative[k - 1] + 0.5 * dx * (integrand[k - 1] + integrand[k]);
    }
    let rank0: Vec<f64> = (0..integrand.len())
        .map(|k| u_t.values()[k] + u.values()[k] * ux[k] - cumulative[k])
        .collect();
    let h = rank0.iter().sum::<f64>() / rank0.len() as f64;
    Ok(IntegrationConstants { a, h })
}
