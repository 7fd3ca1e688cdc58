//! Minimum-norm pseudo-inverses of the periodic second differences.
//!
//! Both stencils are circulant, so they diagonalise in the discrete Fourier
//! basis. On mode `k` (with `θ_k = 2πk/N`) the symbols are
//!
//! ```text
//! narrow  (f^{n+1} - 2f^n + f^{n-1}) / dx²      ->  -4 sin²(θ_k / 2) / dx²
//! wide    (f^{n+2} - 2f^n + f^{n-2}) / (4 dx²)  ->  -sin²(θ_k) / dx²
//! ```
//!
//! The pseudo-inverse multiplies each mode by the reciprocal symbol and sends
//! kernel modes to zero. The narrow stencil annihilates only constants; the
//! wide one also annihilates the alternating mode `(-1)^n` when `N` is even.
//!
//! [`dense_pinv_oracle`] builds the explicit matrix and applies its SVD-based
//! Moore-Penrose inverse; it exists to check the spectral path.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::grid::{Field, Grid1D, GridError};

/// Largest grid the dense oracle accepts.
pub const DENSE_ORACLE_MAX: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PinvError {
    #[error("pseudo-inverse needs a periodic grid")]
    NotPeriodic,
    #[error("dense oracle is limited to N <= {DENSE_ORACLE_MAX}, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecondDifference {
    /// Three-point `(f^{n+1} - 2f^n + f^{n-1}) / dx²`.
    Narrow,
    /// Five-point centered-squared `(f^{n+2} - 2f^n + f^{n-2}) / (4dx²)`.
    Wide,
}

impl SecondDifference {
    /// Fourier symbol of the stencil on mode `k` of an `n`-point grid.
    pub fn symbol(self, k: usize, n: usize, dx: f64) -> f64 {
        let theta = 2.0 * PI * k as f64 / n as f64;
        match self {
            SecondDifference::Narrow => -4.0 * (0.5 * theta).sin().powi(2) / (dx * dx),
            SecondDifference::Wide => -theta.sin().powi(2) / (dx * dx),
        }
    }

    /// Whether mode `k` lies in the kernel. Decided on integers so that the
    /// zero pattern of the spectrum is exact.
    pub fn is_kernel_mode(self, k: usize, n: usize) -> bool {
        match self {
            SecondDifference::Narrow => k == 0,
            SecondDifference::Wide => (2 * k) % n == 0,
        }
    }
}

#[derive(Clone)]
pub struct CirculantPinv {
    grid: Grid1D,
    kind: SecondDifference,
    spectrum: Vec<f64>,
    kernel_dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantPinv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantPinv")
            .field("grid", &self.grid)
            .field("kind", &self.kind)
            .field("kernel_dim", &self.kernel_dim)
            .finish_non_exhaustive()
    }
}

impl CirculantPinv {
    pub fn new(grid: Grid1D, kind: SecondDifference) -> Result<Self, PinvError> {
        build_pinv(grid, kind)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn kind(&self) -> SecondDifference {
        self.kind
    }

    /// Per-mode inverse multipliers, zero on kernel modes.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    /// `A† f` for raw periodic values.
    pub fn apply_values(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        assert_eq!(f.len(), n, "field length does not match pseudo-inverse grid");
        let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (c, &m) in buf.iter_mut().zip(&self.spectrum) {
            *c *= m * scale;
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

pub fn build_pinv(grid: Grid1D, kind: SecondDifference) -> Result<CirculantPinv, PinvError> {
    if !grid.is_periodic() {
        return Err(PinvError::NotPeriodic);
    }
    let n = grid.n();
    let spectrum: Vec<f64> = (0..n)
        .map(|k| if kind.is_kernel_mode(k, n) { 0.0 } else { 1.0 / kind.symbol(k, n, grid.dx()) })
        .collect();
    let kernel_dim = spectrum.iter().filter(|&&m| m == 0.0).count();
    let mut planner = FftPlanner::new();
    Ok(CirculantPinv {
        grid,
        kind,
        spectrum,
        kernel_dim,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    })
}

pub fn apply_pinv(p: &CirculantPinv, f: &Field) -> Result<Field, PinvError> {
    if f.grid() != p.grid() {
        return Err(GridError::GridMismatch.into());
    }
    Ok(Field::new(p.grid, p.apply_values(f.values()))?)
}

/// Explicit `N × N` matrix of the stencil on a periodic grid.
pub fn circulant_matrix(grid: &Grid1D, kind: SecondDifference) -> Result<DMatrix<f64>, PinvError> {
    if !grid.is_periodic() {
        return Err(PinvError::NotPeriodic);
    }
    let n = grid.n();
    if n > DENSE_ORACLE_MAX {
        return Err(PinvError::TooLarge(n));
    }
    let dx2 = grid.dx() * grid.dx();
    let (reach, scale) = match kind {
        SecondDifference::Narrow => (1, 1.0 / dx2),
        SecondDifference::Wide => (2, 0.25 / dx2),
    };
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, (i + reach) % n)] += scale;
        a[(i, i)] -= 2.0 * scale;
        a[(i, (i + n - reach) % n)] += scale;
    }
    Ok(a)
}

/// Dense Moore-Penrose inverse of the circulant matrix, via SVD.
pub fn dense_pinv_matrix(grid: &Grid1D, kind: SecondDifference) -> Result<DMatrix<f64>, PinvError> {
    let a = circulant_matrix(grid, kind)?;
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = sigma_max * 1e-10;
    Ok(svd.pseudo_inverse(cutoff).expect("both singular-vector sets were computed"))
}

/// Rank of the dense circulant matrix with the same relative cutoff as
/// [`dense_pinv_matrix`].
pub fn dense_rank(grid: &Grid1D, kind: SecondDifference) -> Result<usize, PinvError> {
    let a = circulant_matrix(grid, kind)?;
    let sv = a.singular_values();
    let cutoff = sv.max() * 1e-10;
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

pub fn dense_pinv_oracle(
    grid: &Grid1D,
    kind: SecondDifference,
    f: &Field,
) -> Result<Field, PinvError> {
    if f.grid() != grid {
        return Err(GridError::GridMismatch.into());
    }
    let pinv = dense_pinv_matrix(grid, kind)?;
    let g = pinv * DVector::from_column_slice(f.values());
    Ok(Field::new(*grid, g.as_slice().to_vec())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::periodic;

    fn grid(n: usize, dx: f64) -> Grid1D {
        Grid1D::periodic(n as f64 * dx, n).unwrap()
    }

    #[test]
    fn kernel_dimensions() {
        for n in [4, 8, 9, 64, 255, 256] {
            let g = grid(n, 0.1);
            assert_eq!(build_pinv(g, SecondDifference::Narrow).unwrap().kernel_dim(), 1);
            let wide = build_pinv(g, SecondDifference::Wide).unwrap();
            assert_eq!(wide.kernel_dim(), if n % 2 == 0 { 2 } else { 1 }, "n = {n}");
        }
        let s = build_pinv(grid(8, 1.0), SecondDifference::Wide).unwrap();
        let zeros: Vec<usize> = (0..8).filter(|&k| s.spectrum()[k] == 0.0).collect();
        assert_eq!(zeros, vec![0, 4]);
    }

    #[test]
    fn odd_wide_kernel_matches_dense_rank() {
        let g = grid(9, 1.0);
        assert_eq!(dense_rank(&g, SecondDifference::Wide).unwrap(), 8);
        assert_eq!(dense_rank(&grid(8, 1.0), SecondDifference::Wide).unwrap(), 6);
    }

    #[test]
    fn rejects_half_line() {
        let g = Grid1D::half_line(1.0, 8).unwrap();
        assert!(matches!(build_pinv(g, SecondDifference::Narrow), Err(PinvError::NotPeriodic)));
    }

    #[test]
    fn dense_oracle_size_cap() {
        let g = grid(1025, 0.01);
        let f = Field::zeros(g);
        assert_eq!(
            dense_pinv_oracle(&g, SecondDifference::Narrow, &f),
            Err(PinvError::TooLarge(1025))
        );
    }

    #[test]
    fn constants_map_to_zero() {
        let g = grid(16, 0.3);
        for kind in [SecondDifference::Narrow, SecondDifference::Wide] {
            let p = build_pinv(g, kind).unwrap();
            let out = p.apply_values(&[2.5; 16]);
            assert!(out.iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn single_cosine_mode() {
        // Frozen via the dense SVD oracle: g = f / (2 cos(2π/8) - 2) = f / (√2 - 2).
        let g = grid(8, 1.0);
        let f: Vec<f64> = (0..8).map(|n| (2.0 * PI * n as f64 / 8.0).cos()).collect();
        let p = build_pinv(g, SecondDifference::Narrow).unwrap();
        let out = p.apply_values(&f);
        let field = Field::new(g, f.clone()).unwrap();
        let dense = dense_pinv_oracle(&g, SecondDifference::Narrow, &field).unwrap();
        for i in 0..8 {
            let expect = f[i] / (2.0_f64.sqrt() - 2.0);
            assert!((out[i] - expect).abs() < 1e-14);
            assert!((dense.values()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_mode_killed_by_wide() {
        let g = grid(10, 0.5);
        let f: Vec<f64> = (0..10).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let p = build_pinv(g, SecondDifference::Wide).unwrap();
        assert!(p.apply_values(&f).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn inverts_on_zero_mean_fields() {
        let g = grid(32, 0.2);
        let f: Vec<f64> =
            (0..32).map(|n| (n as f64 * 0.7).sin() + 0.3 * (n as f64 * 1.9).cos()).collect();
        let mean = f.iter().sum::<f64>() / 32.0;
        let f: Vec<f64> = f.iter().map(|v| v - mean).collect();
        let p = build_pinv(g, SecondDifference::Narrow).unwrap();
        let back = periodic::narrow_second(&p.apply_values(&f), g.dx());
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
