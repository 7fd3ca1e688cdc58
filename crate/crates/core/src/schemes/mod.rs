//! Time steppers: half-line HS schemes, periodic mHS schemes and periodic
//! 2HS schemes.
//!
//! Every stepper takes a state at level `i` and returns the state at level
//! `i + 1`. Two-level (leapfrog) schemes keep the previous level inside the
//! state and bootstrap with a single forward Euler step.

use thiserror::Error;

use crate::grid::GridError;
use crate::pinv::PinvError;
use crate::solver::SolveError;

pub mod hs;
pub mod hs2;
pub mod mhs;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    /// `step` is the zero-based index of the step being attempted.
    #[error("non-finite value at step {step}")]
    NanDetected { step: usize },
    #[error("implicit solve failed at step {step}: {source}")]
    Solve { step: usize, source: SolveError },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Pinv(#[from] PinvError),
}

impl SchemeError {
    /// Step index for failures raised while stepping.
    pub fn step(&self) -> Option<usize> {
        match self {
            SchemeError::NanDetected { step } | SchemeError::Solve { step, .. } => Some(*step),
            _ => None,
        }
    }
}

pub(crate) fn check_finite(values: &[f64], step: usize) -> Result<(), SchemeError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SchemeError::NanDetected { step })
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<(), SchemeError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(SchemeError::InvalidState(format!("time step must be positive, got {dt}")))
    }
}

pub(crate) fn solve_failure(step: usize) -> impl Fn(SolveError) -> SchemeError {
    move |source| match source {
        SolveError::NanDetected { .. } => SchemeError::NanDetected { step },
        source => SchemeError::Solve { step, source },
    }
}

/// `(a + b) / 2` elementwise.
pub(crate) fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Uniform mean of a periodic field.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `Σ (-1)^n f^n / N`: the coefficient of the alternating (checkerboard) mode.
pub fn alternating_mean(values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(n, v)| if n % 2 == 0 { *v } else { -*v })
        .sum::<f64>()
        / values.len() as f64
}
