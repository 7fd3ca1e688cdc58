//! Uniform one-dimensional grids, ghost-point extensions and the
//! finite-difference stencils shared by every scheme.
//!
//! Two domain kinds exist. A truncated half-line grid covers `[-L, L]` with
//! nodes `x_0 = -L, ..., x_N = L`; its fields carry `N + 1` values and reach
//! outside the domain through an explicit [`GhostRule`]. A periodic grid
//! covers `[0, L)` with `N` nodes and resolves out-of-range indices modulo `N`.

use thiserror::Error;

/// Number of ghost cells materialised on each side of a half-line field.
pub const GHOST_DEPTH: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid argument: {0}")]
    InvalidArgument(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field value at node {index} is not finite")]
    NonFinite { index: usize },
    #[error("stencil needs node {index}, which has no ghost value")]
    MissingGhost { index: isize },
    #[error("operation requires a {expected:?} grid")]
    WrongKind { expected: DomainKind },
    #[error("fields live on different grids")]
    GridMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `[-L, L]`, nodes `x_n = -L + n dx` for `n = 0..=N`, `dx = 2L/N`.
    HalfLineTruncated,
    /// `[0, L)`, nodes `x_n = n dx` for `n = 0..N`, `dx = L/N`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    kind: DomainKind,
    length: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(kind: DomainKind, length: f64, n: usize) -> Result<Self, GridError> {
        if n < 4 {
            return Err(GridError::InvalidArgument(format!("N must be at least 4, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(GridError::InvalidArgument(format!(
                "L must be positive and finite, got {length}"
            )));
        }
        let dx = match kind {
            DomainKind::HalfLineTruncated => 2.0 * length / n as f64,
            DomainKind::Periodic => length / n as f64,
        };
        Ok(Self { kind, length, n, dx })
    }

    pub fn half_line(half_width: f64, n: usize) -> Result<Self, GridError> {
        Self::new(DomainKind::HalfLineTruncated, half_width, n)
    }

    pub fn periodic(period: f64, n: usize) -> Result<Self, GridError> {
        Self::new(DomainKind::Periodic, period, n)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == DomainKind::Periodic
    }

    /// Half-width for half-line grids, period for periodic grids.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// The node-count parameter `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of stored values: `N + 1` on the half-line, `N` when periodic.
    pub fn node_count(&self) -> usize {
        match self.kind {
            DomainKind::HalfLineTruncated => self.n + 1,
            DomainKind::Periodic => self.n,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.kind {
            DomainKind::HalfLineTruncated => -self.length + i as f64 * self.dx,
            DomainKind::Periodic => i as f64 * self.dx,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.x(i)).collect()
    }

    fn require(&self, kind: DomainKind) -> Result<(), GridError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(GridError::WrongKind { expected: kind })
        }
    }
}

/// Real values on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.node_count() {
            return Err(GridError::LengthMismatch { expected: grid.node_count(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One ghost value as a linear combination of interior values.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostDef {
    pub index: isize,
    pub terms: Vec<(usize, f64)>,
}

/// Discrete boundary conditions of a half-line field, expressed as ghost
/// values outside `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostRule {
    n: usize,
    left: Vec<GhostDef>,
    right: Vec<GhostDef>,
}

impl GhostRule {
    pub fn new(grid: &Grid1D, left: Vec<GhostDef>, right: Vec<GhostDef>) -> Result<Self, GridError> {
        grid.require(DomainKind::HalfLineTruncated)?;
        let n = grid.n() as isize;
        let depth = GHOST_DEPTH as isize;
        for g in &left {
            if !(-depth..0).contains(&g.index) {
                return Err(GridError::InvalidArgument(format!(
                    "left ghost index {} outside -{depth}..-1",
                    g.index
                )));
            }
        }
        for g in &right {
            if !(n + 1..=n + depth).contains(&g.index) {
                return Err(GridError::InvalidArgument(format!(
                    "right ghost index {} outside {}..={}",
                    g.index,
                    n + 1,
                    n + depth
                )));
            }
        }
        for g in left.iter().chain(&right) {
            if let Some((j, _)) = g.terms.iter().find(|(j, _)| *j > grid.n()) {
                return Err(GridError::InvalidArgument(format!(
                    "ghost {} references non-interior node {j}",
                    g.index
                )));
            }
        }
        Ok(Self { n: grid.n(), left, right })
    }

    /// `u^{-1} = u^1`, `u^{N+1} = u^{N-1}`, `u^{N+2} = 2u^N - u^{N-2}`:
    /// vanishing slope at both ends and vanishing curvature at `x = L`.
    pub fn hunter_saxton(grid: &Grid1D) -> Result<Self, GridError> {
        let n = grid.n();
        Self::new(
            grid,
            vec![GhostDef { index: -1, terms: vec![(1, 1.0)] }],
            vec![
                GhostDef { index: n as isize + 1, terms: vec![(n - 1, 1.0)] },
                GhostDef { index: n as isize + 2, terms: vec![(n, 2.0), (n - 2, -1.0)] },
            ],
        )
    }

    /// Even reflection about both end nodes, two cells deep.
    pub fn even_reflection(grid: &Grid1D) -> Result<Self, GridError> {
        let n = grid.n();
        let ni = n as isize;
        Self::new(
            grid,
            vec![
                GhostDef { index: -1, terms: vec![(1, 1.0)] },
                GhostDef { index: -2, terms: vec![(2, 1.0)] },
            ],
            vec![
                GhostDef { index: ni + 1, terms: vec![(n - 1, 1.0)] },
                GhostDef { index: ni + 2, terms: vec![(n - 2, 1.0)] },
            ],
        )
    }

    /// Linear extrapolation from the two outermost nodes on each side.
    pub fn linear_extension(grid: &Grid1D) -> Result<Self, GridError> {
        let n = grid.n();
        let ni = n as isize;
        Self::new(
            grid,
            vec![
                GhostDef { index: -1, terms: vec![(0, 2.0), (1, -1.0)] },
                GhostDef { index: -2, terms: vec![(0, 3.0), (1, -2.0)] },
            ],
            vec![
                GhostDef { index: ni + 1, terms: vec![(n, 2.0), (n - 1, -1.0)] },
                GhostDef { index: ni + 2, terms: vec![(n, 3.0), (n - 1, -2.0)] },
            ],
        )
    }

    pub fn left(&self) -> &[GhostDef] {
        &self.left
    }

    pub fn right(&self) -> &[GhostDef] {
        &self.right
    }
}

/// A field together with its out-of-range values: materialised ghosts on
/// the half-line, modular wraparound on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostedField {
    grid: Grid1D,
    // Half-line: GHOST_DEPTH slots on each side, undefined ghosts are NaN.
    // Periodic: exactly the N node values.
    buf: Vec<f64>,
}

impl GhostedField {
    pub fn periodic(field: &Field) -> Result<Self, GridError> {
        field.grid.require(DomainKind::Periodic)?;
        Ok(Self { grid: field.grid, buf: field.values.clone() })
    }

    /// Half-line field with explicitly supplied ghosts; `None` leaves a slot
    /// undefined. `left[k]` is node `-(k+1)`, `right[k]` is node `N+k+1`.
    pub fn with_ghosts(
        field: &Field,
        left: [Option<f64>; GHOST_DEPTH],
        right: [Option<f64>; GHOST_DEPTH],
    ) -> Result<Self, GridError> {
        field.grid.require(DomainKind::HalfLineTruncated)?;
        let mut buf = Vec::with_capacity(field.values.len() + 2 * GHOST_DEPTH);
        buf.extend(left.iter().rev().map(|g| g.unwrap_or(f64::NAN)));
        buf.extend_from_slice(&field.values);
        buf.extend(right.iter().map(|g| g.unwrap_or(f64::NAN)));
        Ok(Self { grid: field.grid, buf })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Value at node `i`, which may lie outside `0..=N` (half-line) or
    /// `0..N` (periodic).
    pub fn at(&self, i: isize) -> Result<f64, GridError> {
        match self.grid.kind {
            DomainKind::Periodic => Ok(self.buf[i.rem_euclid(self.grid.n as isize) as usize]),
            DomainKind::HalfLineTruncated => {
                let slot = i + GHOST_DEPTH as isize;
                if slot < 0 || slot as usize >= self.buf.len() {
                    return Err(GridError::MissingGhost { index: i });
                }
                let v = self.buf[slot as usize];
                if v.is_nan() && !(0..=self.grid.n as isize).contains(&i) {
                    Err(GridError::MissingGhost { index: i })
                } else {
                    Ok(v)
                }
            }
        }
    }

    /// Interior values without ghosts.
    pub fn interior(&self) -> &[f64] {
        match self.grid.kind {
            DomainKind::Periodic => &self.buf,
            DomainKind::HalfLineTruncated => &self.buf[GHOST_DEPTH..self.buf.len() - GHOST_DEPTH],
        }
    }
}

/// Fill the ghost slots of a half-line field from `rule`.
pub fn extend_halfline_ghosts(u: &Field, rule: &GhostRule) -> Result<GhostedField, GridError> {
    u.grid.require(DomainKind::HalfLineTruncated)?;
    if rule.n != u.grid.n {
        return Err(GridError::GridMismatch);
    }
    let eval = |g: &GhostDef| g.terms.iter().map(|&(j, w)| w * u.values[j]).sum::<f64>();
    let mut left = [None; GHOST_DEPTH];
    let mut right = [None; GHOST_DEPTH];
    for g in &rule.left {
        left[(-g.index - 1) as usize] = Some(eval(g));
    }
    for g in &rule.right {
        right[(g.index - u.grid.n as isize - 1) as usize] = Some(eval(g));
    }
    GhostedField::with_ghosts(u, left, right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// `(f^{n+1} - f^n) / dx`
    Forward,
    /// `(f^n - f^{n-1}) / dx`
    Backward,
    /// `(f^{n+1} - f^{n-1}) / (2 dx)`
    Centered,
    /// `(f^{n+1} - 2 f^n + f^{n-1}) / dx^2`
    NarrowSecond,
    /// `(f^{n+2} - 2 f^n + f^{n-2}) / (4 dx^2)`, the centered difference applied twice.
    WideSecond,
}

impl Difference {
    pub fn reach(self) -> usize {
        match self {
            Difference::WideSecond => 2,
            _ => 1,
        }
    }
}

pub fn difference_at(f: &GhostedField, kind: Difference, n: isize) -> Result<f64, GridError> {
    let dx = f.grid.dx;
    Ok(match kind {
        Difference::Forward => (f.at(n + 1)? - f.at(n)?) / dx,
        Difference::Backward => (f.at(n)? - f.at(n - 1)?) / dx,
        Difference::Centered => (f.at(n + 1)? - f.at(n - 1)?) / (2.0 * dx),
        Difference::NarrowSecond => (f.at(n + 1)? - 2.0 * f.at(n)? + f.at(n - 1)?) / (dx * dx),
        Difference::WideSecond => (f.at(n + 2)? - 2.0 * f.at(n)? + f.at(n - 2)?) / (4.0 * dx * dx),
    })
}

/// Apply a stencil at every node of the grid.
pub fn apply_difference(f: &GhostedField, kind: Difference) -> Result<Vec<f64>, GridError> {
    (0..f.grid.node_count() as isize).map(|n| difference_at(f, kind, n)).collect()
}

/// Trapezoidal sum with half weights at both end nodes. On a periodic grid
/// this reduces to the plain uniform sum.
pub fn trapz_doubleprime(f: &Field) -> f64 {
    trapz_values(&f.values, f.grid.dx, f.grid.kind)
}

pub(crate) fn trapz_values(values: &[f64], dx: f64, kind: DomainKind) -> f64 {
    let sum: f64 = values.iter().sum();
    match kind {
        DomainKind::Periodic => sum * dx,
        DomainKind::HalfLineTruncated => {
            let ends = 0.5 * (values[0] + values[values.len() - 1]);
            (sum - ends) * dx
        }
    }
}

/// Left-hand side minus boundary term of the summation-by-parts identity
///
/// ```text
/// Σ'' f (δ⁺g) dx + Σ'' (δ⁻f) g dx = [ (f^n g^{n+1} + f^{n-1} g^n) / 2 ]_0^N
/// ```
///
/// Needs `f^{-1}` and `g^{N+1}`.
pub fn sbp_residual(f: &GhostedField, g: &GhostedField) -> Result<f64, GridError> {
    if f.grid != g.grid {
        return Err(GridError::GridMismatch);
    }
    f.grid.require(DomainKind::HalfLineTruncated)?;
    let n = f.grid.n as isize;
    let dx = f.grid.dx;
    let mut lhs = Vec::with_capacity(f.grid.node_count());
    for i in 0..=n {
        let fwd = difference_at(g, Difference::Forward, i)?;
        let bwd = difference_at(f, Difference::Backward, i)?;
        lhs.push(f.at(i)? * fwd + bwd * g.at(i)?);
    }
    let lhs = trapz_values(&lhs, dx, DomainKind::HalfLineTruncated);
    let edge = |i: isize| -> Result<f64, GridError> {
        Ok(0.5 * (f.at(i)? * g.at(i + 1)? + f.at(i - 1)? * g.at(i)?))
    };
    Ok(lhs - (edge(n)? - edge(0)?))
}

/// Periodic stencils on raw slices; the hot loops of the periodic schemes.
pub(crate) mod periodic {
    #[inline]
    fn wrap(i: isize, n: usize) -> usize {
        i.rem_euclid(n as isize) as usize
    }

    pub fn forward(u: &[f64], dx: f64) -> Vec<f64> {
        let n = u.len();
        (0..n).map(|i| (u[wrap(i as isize + 1, n)] - u[i]) / dx).collect()
    }

    pub fn centered(u: &[f64], dx: f64) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| (u[wrap(i as isize + 1, n)] - u[wrap(i as isize - 1, n)]) / (2.0 * dx))
            .collect()
    }

    pub fn narrow_second(u: &[f64], dx: f64) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| {
                (u[wrap(i as isize + 1, n)] - 2.0 * u[i] + u[wrap(i as isize - 1, n)]) / (dx * dx)
            })
            .collect()
    }

    pub fn wide_second(u: &[f64], dx: f64) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| {
                (u[wrap(i as isize + 2, n)] - 2.0 * u[i] + u[wrap(i as isize - 2, n)])
                    / (4.0 * dx * dx)
            })
            .collect()
    }

    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }
}
