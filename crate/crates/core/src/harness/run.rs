//! Run orchestration: initial data, time stepping, invariant recording.

use thiserror::Error;

use crate::grid::{trapz_values, DomainKind, Field, Grid1D, GridError};
use crate::pinv::{build_pinv, CirculantPinv, PinvError, SecondDifference};
use crate::schemes::hs::{self, HsState};
use crate::schemes::hs2::{self, Hs2State};
use crate::schemes::mhs::{self, MhsState};
use crate::schemes::{alternating_mean, mean, SchemeError};
use crate::waves::{self, generate_wave, hs_exact, TravellingWave, WaveError};

use super::config::{Problem, RunConfig, Scheme};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("wave generation failed: {0}")]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Pinv(#[from] PinvError),
    /// A step failed; `partial` holds everything recorded up to level `step`.
    #[error("step {step} failed: {source}")]
    Numerical { step: usize, source: SchemeError, partial: Box<RunResult> },
}

impl RunError {
    pub fn is_validation(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Wave(WaveError::InvalidParameters(_)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimState {
    Hs(HsState),
    Mhs(MhsState),
    Hs2(Hs2State),
}

impl SimState {
    pub fn t(&self) -> f64 {
        match self {
            SimState::Hs(s) => s.t,
            SimState::Mhs(s) => s.t,
            SimState::Hs2(s) => s.t,
        }
    }

    pub fn u(&self) -> &Field {
        match self {
            SimState::Hs(s) => &s.u,
            SimState::Mhs(s) => &s.u,
            SimState::Hs2(s) => &s.u,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.u().grid()
    }

    /// `(H_{1,d}, H_{2,d})` in the problem's discretisation.
    pub fn invariants(&self) -> (f64, f64) {
        match self {
            SimState::Hs(s) => hs::hs_invariants(s),
            SimState::Mhs(s) => mhs::mhs_invariants(s),
            SimState::Hs2(s) => hs2::hs2_invariants(s),
        }
    }

    /// Mean of `u`: uniform on periodic grids, trapezoidal over `[-L, L]` on the half-line.
    pub fn mean_u(&self) -> f64 {
        let u = self.u();
        match u.grid().kind() {
            DomainKind::Periodic => mean(u.values()),
            DomainKind::HalfLineTruncated => {
                trapz_values(u.values(), u.grid().dx(), DomainKind::HalfLineTruncated) / (2.0 * u.grid().length())
            }
        }
    }

    fn set_time(&mut self, t: f64) {
        match self {
            SimState::Hs(s) => s.t = t,
            SimState::Mhs(s) => s.t = t,
            SimState::Hs2(s) => s.t = t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantRow {
    pub t: f64,
    pub h1: f64,
    pub h2: f64,
    pub mean_u: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantSeries {
    pub rows: Vec<InvariantRow>,
}

impl InvariantSeries {
    pub fn h1(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h1).collect()
    }

    pub fn h2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h2).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// Auxiliary per-step diagnostics with a problem-specific column set.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Profile columns at one recorded level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub columns: Vec<(&'static str, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: RunConfig,
    pub state: SimState,
    pub invariants: InvariantSeries,
    pub diagnostics: Diagnostics,
    pub snapshots: Vec<Snapshot>,
    pub wave: Option<TravellingWave>,
}

enum Operators {
    None,
    Pinv(CirculantPinv),
}

/// Initial state for `cfg` and the travelling wave it came from, if any.
pub fn initial_state(cfg: &RunConfig) -> Result<(SimState, Option<TravellingWave>), RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.to_string()))?;
    match cfg.problem {
        Problem::Hs => {
            let l = cfg.length.expect("validated");
            let grid = Grid1D::half_line(l, cfg.n)?;
            let u = Field::from_fn(grid, |x| hs_exact(x, 0.0))?;
            let s = match cfg.scheme {
                Scheme::Eb1 => HsState::for_eb1(u),
                Scheme::Eb2 => HsState::for_eb2(u),
                _ => HsState::new(u),
            }
            .map_err(|e| RunError::Config(e.to_string()))?;
            Ok((SimState::Hs(s), None))
        }
        Problem::Mhs | Problem::Hs2 => {
            let spec = cfg.wave.expect("validated");
            let w = generate_wave(&spec, cfg.n)?;
            let s = match spec {
                waves::WaveSpec::Mhs { omega, .. } => SimState::Mhs(
                    MhsState::new(w.phi.clone(), omega).map_err(|e| RunError::Config(e.to_string()))?,
                ),
                waves::WaveSpec::Hs2 { kappa, .. } => SimState::Hs2(
                    Hs2State::new(w.phi.clone(), w.psi.clone().expect("2HS waves carry a density"), kappa)
                        .map_err(|e| RunError::Config(e.to_string()))?,
                ),
            };
            Ok((s, Some(w)))
        }
    }
}

fn operators(cfg: &RunConfig, grid: Grid1D) -> Result<Operators, RunError> {
    Ok(match (cfg.problem, cfg.scheme) {
        (Problem::Hs, _) => Operators::None,
        (_, Scheme::Ms) => Operators::Pinv(build_pinv(grid, SecondDifference::Wide)?),
        _ => Operators::Pinv(build_pinv(grid, SecondDifference::Narrow)?),
    })
}

fn advance(cfg: &RunConfig, state: &SimState, ops: &Operators) -> Result<SimState, SchemeError> {
    let dt = cfg.dt;
    let solver = &cfg.solver;
    Ok(match (state, ops) {
        (SimState::Hs(s), _) => SimState::Hs(match cfg.scheme {
            Scheme::Eb1 => hs::eb1_step(s, dt)?,
            Scheme::Eb2 => hs::eb2_step(s, dt)?,
            Scheme::H1 => hs::h1_step(s, dt, solver)?,
            Scheme::H2 => hs::h2_step(s, dt, solver)?,
            Scheme::Ms => unreachable!("rejected by validation"),
        }),
        (SimState::Mhs(s), Operators::Pinv(p)) => SimState::Mhs(match cfg.scheme {
            Scheme::Ms => mhs::mhs_ms_step(s, dt, p)?,
            _ => mhs::mhs_h1_step(s, dt, p, solver)?,
        }),
        (SimState::Hs2(s), Operators::Pinv(p)) => SimState::Hs2(match cfg.scheme {
            Scheme::Ms => hs2::hs2_ms_step(s, dt, p)?,
            _ => hs2::hs2_h1_step(s, dt, p, solver)?,
        }),
        _ => unreachable!("periodic problems always build a pseudo-inverse"),
    })
}

fn diagnostic_columns(problem: Problem) -> Vec<&'static str> {
    match problem {
        Problem::Hs => vec!["t", "alt_ux"],
        Problem::Mhs => vec!["t", "alt_u", "a"],
        Problem::Hs2 => vec!["t", "alt_u", "mass_rho"],
    }
}

fn diagnostic_row(state: &SimState) -> Vec<f64> {
    match state {
        SimState::Hs(s) => {
            let ux = hs_slope(s);
            vec![s.t, alternating_mean(&ux)]
        }
        SimState::Mhs(s) => {
            let ut = Field::zeros(*s.grid());
            let a = waves::mhs_integration_constants(&s.u, &ut, s.omega).map(|k| k.a).unwrap_or(f64::NAN);
            vec![s.t, alternating_mean(s.u.values()), a]
        }
        SimState::Hs2(s) => vec![s.t, alternating_mean(s.u.values()), s.rho.values().iter().sum()],
    }
}

/// `u_x` on the half-line: the evolved `v` for `eb1`, otherwise `δ_x u`
/// with the scheme ghosts.
fn hs_slope(s: &HsState) -> Vec<f64> {
    match &s.v {
        Some(v) => v.values().to_vec(),
        None => hs::slope_with_boundary(s.u.values(), s.grid().dx()),
    }
}

fn snapshot(state: &SimState, step: usize, wave: Option<&TravellingWave>) -> Snapshot {
    let grid = *state.grid();
    let x = grid.nodes();
    let t = state.t();
    let columns = match state {
        SimState::Hs(s) => vec![
            ("x", x.clone()),
            ("u", s.u.values().to_vec()),
            ("ux", hs_slope(s)),
            ("u_exact", x.iter().map(|&xi| hs_exact(xi, t)).collect()),
        ],
        SimState::Mhs(s) => {
            let w = wave.expect("mHS runs start from a wave");
            vec![
                ("x", x.clone()),
                ("u", s.u.values().to_vec()),
                ("u_exact", x.iter().map(|&xi| waves::exact_shifted(w, t, xi)).collect()),
            ]
        }
        SimState::Hs2(s) => {
            let w = wave.expect("2HS runs start from a wave");
            vec![
                ("x", x.clone()),
                ("u", s.u.values().to_vec()),
                ("rho", s.rho.values().to_vec()),
                ("u_exact", x.iter().map(|&xi| waves::exact_shifted(w, t, xi)).collect()),
                (
                    "rho_exact",
                    x.iter().map(|&xi| waves::exact_shifted_density(w, t, xi).expect("2HS density")).collect(),
                ),
            ]
        }
    };
    Snapshot { step, t, columns }
}

fn record(state: &SimState, inv: &mut InvariantSeries, diag: &mut Diagnostics) {
    let (h1, h2) = state.invariants();
    inv.rows.push(InvariantRow { t: state.t(), h1, h2, mean_u: state.mean_u() });
    diag.rows.push(diagnostic_row(state));
}

/// Run `cfg` to `tend`, recording invariants every step and profiles every
/// `record_every` steps (plus the first and last level).
pub fn run_simulation(cfg: &RunConfig) -> Result<RunResult, RunError> {
    let (mut state, wave) = initial_state(cfg)?;
    let ops = operators(cfg, *state.grid())?;
    let steps = cfg.steps();
    let mut invariants = InvariantSeries::default();
    let mut diagnostics = Diagnostics { columns: diagnostic_columns(cfg.problem), rows: Vec::new() };
    let mut snapshots = vec![snapshot(&state, 0, wave.as_ref())];
    record(&state, &mut invariants, &mut diagnostics);

    for k in 0..steps {
        match advance(cfg, &state, &ops) {
            Ok(mut next) => {
                next.set_time((k + 1) as f64 * cfg.dt);
                state = next;
            }
            Err(source) => {
                if snapshots.last().map(|s| s.step) != Some(k) {
                    snapshots.push(snapshot(&state, k, wave.as_ref()));
                }
                let partial = RunResult { config: cfg.clone(), state, invariants, diagnostics, snapshots, wave };
                return Err(RunError::Numerical { step: k, source, partial: Box::new(partial) });
            }
        }
        record(&state, &mut invariants, &mut diagnostics);
        let level = k + 1;
        if level % cfg.record_every == 0 || level == steps {
            snapshots.push(snapshot(&state, level, wave.as_ref()));
        }
    }
    Ok(RunResult { config: cfg.clone(), state, invariants, diagnostics, snapshots, wave })
}
