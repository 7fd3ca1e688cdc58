//! Scalar-loop oracles shared by the integration tests. The oracles never
//! call the library's stencil, pseudo-inverse or scheme code; only
//! `moore_penrose_defects` does, to compare the spectral and SVD paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use hsgeom::grid::Grid1D;
use hsgeom::pinv::{build_pinv, circulant_matrix, dense_pinv_matrix, CirculantPinv, SecondDifference};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Periodic value with index wraparound.
pub fn p(u: &[f64], i: isize) -> f64 {
    u[wrap(i, u.len())]
}

pub fn pd_centered(u: &[f64], dx: f64, i: isize) -> f64 {
    (p(u, i + 1) - p(u, i - 1)) / (2.0 * dx)
}

pub fn pd_narrow(u: &[f64], dx: f64, i: isize) -> f64 {
    (p(u, i + 1) - 2.0 * p(u, i) + p(u, i - 1)) / (dx * dx)
}

pub fn pd_wide(u: &[f64], dx: f64, i: isize) -> f64 {
    (p(u, i + 2) - 2.0 * p(u, i) + p(u, i - 2)) / (4.0 * dx * dx)
}

/// Minimum-norm inverse of a periodic second difference by a naive DFT.
/// `wide = false` for the 3-point stencil, `true` for the 5-point one.
pub fn naive_pinv(f: &[f64], dx: f64, wide: bool) -> Vec<f64> {
    let n = f.len();
    // Twiddles from exact integer phases.
    let cos: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
    let sin: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for k in 0..n {
        let zero = if wide { (2 * k) % n == 0 } else { k == 0 };
        if zero {
            continue;
        }
        // Wide symbol (2cos 2θ - 2)/(4dx²) = -sin²θ/dx².
        let symbol = if wide { -sin[k].powi(2) / (dx * dx) } else { (2.0 * cos[k] - 2.0) / (dx * dx) };
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..n {
            let ph = (j * k) % n;
            a += f[j] * cos[ph];
            b -= f[j] * sin[ph];
        }
        re[k] = a / symbol;
        im[k] = b / symbol;
    }
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for k in 0..n {
                let ph = (j * k) % n;
                s += re[k] * cos[ph] - im[k] * sin[ph];
            }
            s / n as f64
        })
        .collect()
}

/// Half-line value of `u` under the scheme ghosts `u^{-1} = u^1`,
/// `u^{N+1} = u^{N-1}`, `u^{N+2} = 2u^N - u^{N-2}`.
pub fn hs_ghosted(u: &[f64], i: isize) -> f64 {
    let n = (u.len() - 1) as isize;
    match i {
        -1 => u[1],
        i if i == n + 1 => u[(n - 1) as usize],
        i if i == n + 2 => 2.0 * u[n as usize] - u[(n - 2) as usize],
        i if (0..=n).contains(&i) => u[i as usize],
        _ => panic!("no ghost at {i}"),
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Oracle for one `eb1` step. `prev_v = None` means the forward startup.
pub fn eb1_oracle(u: &[f64], v: &[f64], prev_v: Option<&[f64]>, dx: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len() - 1;
    let mut vn = vec![0.0; n + 1];
    for k in 1..n {
        let flux = (u[k + 1] * v[k + 1] - u[k - 1] * v[k - 1]) / (2.0 * dx);
        let f = v[k] * v[k] / 2.0 - flux;
        vn[k] = match prev_v {
            Some(pv) => pv[k] + 2.0 * dt * f,
            None => v[k] + dt * f,
        };
    }
    let mut un = vec![0.0; n + 1];
    for k in 1..n {
        un[k + 1] = un[k - 1] + 2.0 * dx * vn[k];
    }
    (un, vn)
}

/// `δ_x P` for `-δ_x² P = α/2` from the cumulative form
/// `Q^0 = 0`, `Q^1 = -Δx α^0 / 2`, `Q^{n+1} = Q^{n-1} - Δx α^n`.
pub fn pressure_gradient_oracle(alpha: &[f64], dx: f64) -> Vec<f64> {
    let n = alpha.len() - 1;
    let mut q = vec![0.0; n + 1];
    q[1] = -dx * alpha[0] / 2.0;
    for k in 1..n {
        q[k + 1] = q[k - 1] - dx * alpha[k];
    }
    q
}

/// Oracle for one `eb2` step, returning `(u', α')`.
pub fn eb2_oracle(
    u: &[f64],
    alpha: &[f64],
    prev: Option<(&[f64], &[f64])>,
    dx: f64,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = u.len() - 1;
    let q = pressure_gradient_oracle(alpha, dx);
    let ext = |f: &[f64], i: isize| -> f64 {
        let n = n as isize;
        let j = if i < 0 { -i } else if i > n { 2 * n - i } else { i };
        f[j as usize]
    };
    let mut an = vec![0.0; n + 1];
    let mut un = vec![0.0; n + 1];
    for k in 0..=n {
        let i = k as isize;
        let flux = (ext(u, i + 1) * ext(alpha, i + 1) - ext(u, i - 1) * ext(alpha, i - 1)) / (2.0 * dx);
        an[k] = match prev {
            Some((_, pa)) => pa[k] - 2.0 * dt * flux,
            None => alpha[k] - dt * flux,
        };
        if k > 0 {
            let burgers = (ext(u, i + 1).powi(2) - ext(u, i - 1).powi(2)) / (2.0 * dx) / 2.0;
            un[k] = match prev {
                Some((pu, _)) => pu[k] - 2.0 * dt * (burgers + q[k]),
                None => u[k] - dt * (burgers + q[k]),
            };
        }
    }
    (un, an)
}

/// Residual of the half-line `H_1` scheme at `n = 1..N`, scaled by `Δt`.
pub fn h1_hs_oracle(u: &[f64], un: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let n = (u.len() - 1) as isize;
    let m = |i: isize| (hs_ghosted(u, i) + hs_ghosted(un, i)) / 2.0;
    let lap = |f: &dyn Fn(isize) -> f64, i: isize| (f(i + 1) - 2.0 * f(i) + f(i - 1)) / (dx * dx);
    let old = |i: isize| hs_ghosted(u, i);
    let new = |i: isize| hs_ghosted(un, i);
    (1..=n)
        .map(|i| {
            let lhs = lap(&new, i) - lap(&old, i);
            let term1 = lap(&m, i) * (m(i + 1) - m(i - 1)) / (2.0 * dx);
            let term2 = (m(i + 1) * lap(&m, i + 1) - m(i - 1) * lap(&m, i - 1)) / (2.0 * dx);
            lhs + dt * (term1 + term2)
        })
        .collect()
}

/// Residual of the half-line `H_2` scheme at `n = 1..N`.
pub fn h2_hs_oracle(u: &[f64], un: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let slope = |f: &[f64], k: usize| -> f64 {
        if k == 0 || k == n {
            0.0
        } else {
            (f[k + 1] - f[k - 1]) / (2.0 * dx)
        }
    };
    let w = |k: usize| (slope(un, k).powi(2) + slope(u, k).powi(2)) / 4.0;
    let inv = |k: usize| -> f64 {
        // Sum over the odd (even k) or even (odd k) indices below k.
        let mut s = 0.0;
        let mut j = k as isize - 1;
        while j >= 1 {
            s += w(j as usize);
            j -= 2;
        }
        2.0 * dx * s
    };
    (1..=n)
        .map(|k| {
            let ub = (u[k] + un[k]) / 2.0;
            let vb = (slope(u, k) + slope(un, k)) / 2.0;
            un[k] - u[k] - dt * (-ub * vb + inv(k))
        })
        .collect()
}

/// Oracle for one periodic mHS / 2HS multi-symplectic step applied to `u`.
/// `extra` is added to the bracket before the pseudo-inverse.
pub fn ms_u_oracle(
    u: &[f64],
    prev: Option<&[f64]>,
    dx: f64,
    dt: f64,
    extra: &dyn Fn(isize) -> f64,
) -> Vec<f64> {
    let n = u.len();
    let ux: Vec<f64> = (0..n as isize).map(|i| pd_centered(u, dx, i)).collect();
    let ux2: Vec<f64> = ux.iter().map(|d| d * d).collect();
    let uux: Vec<f64> = (0..n).map(|k| u[k] * ux[k]).collect();
    let bracket: Vec<f64> = (0..n as isize)
        .map(|i| 0.5 * pd_centered(&ux2, dx, i) - pd_wide(&uux, dx, i) + extra(i))
        .collect();
    let g = naive_pinv(&bracket, dx, true);
    (0..n)
        .map(|k| match prev {
            Some(pu) => pu[k] + 2.0 * dt * g[k],
            None => u[k] + dt * g[k],
        })
        .collect()
}

/// Bracket `(δ̃²ū)(δ_x ū) + δ_x(ū δ̃²ū)` of the periodic `H_1` schemes.
pub fn h1_bracket_oracle(ub: &[f64], dx: f64) -> Vec<f64> {
    let n = ub.len();
    let lap: Vec<f64> = (0..n as isize).map(|i| pd_narrow(ub, dx, i)).collect();
    let ul: Vec<f64> = (0..n).map(|k| ub[k] * lap[k]).collect();
    (0..n as isize)
        .map(|i| lap[i as usize] * pd_centered(ub, dx, i) + pd_centered(&ul, dx, i))
        .collect()
}

pub fn mhs_h1_oracle(u: &[f64], un: &[f64], dx: f64, dt: f64, omega: f64) -> Vec<f64> {
    let ub: Vec<f64> = u.iter().zip(un).map(|(a, b)| (a + b) / 2.0).collect();
    let br = h1_bracket_oracle(&ub, dx);
    let br: Vec<f64> = (0..u.len()).map(|k| br[k] - 2.0 * omega * pd_centered(&ub, dx, k as isize)).collect();
    let g = naive_pinv(&br, dx, false);
    (0..u.len()).map(|k| un[k] - u[k] + dt * g[k]).collect()
}

pub fn hs2_h1_oracle(
    u: &[f64],
    rho: &[f64],
    un: &[f64],
    rn: &[f64],
    dx: f64,
    dt: f64,
    kappa: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let ub: Vec<f64> = u.iter().zip(un).map(|(a, b)| (a + b) / 2.0).collect();
    let rb: Vec<f64> = rho.iter().zip(rn).map(|(a, b)| (a + b) / 2.0).collect();
    let br = h1_bracket_oracle(&ub, dx);
    let br: Vec<f64> = (0..n).map(|k| br[k] - kappa * rb[k] * pd_centered(&rb, dx, k as isize)).collect();
    let g = naive_pinv(&br, dx, false);
    let ur: Vec<f64> = (0..n).map(|k| ub[k] * rb[k]).collect();
    let ru = (0..n).map(|k| un[k] - u[k] + dt * g[k]).collect();
    let rr = (0..n).map(|k| rn[k] - rho[k] + dt * pd_centered(&ur, dx, k as isize)).collect();
    (ru, rr)
}

fn fft_pinv_matrix(p: &CirculantPinv) -> DMatrix<f64> {
    let n = p.grid().n();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = p.apply_values(&e);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax()
}

/// Worst Moore-Penrose defect over the grid sizes used by the acceptance
/// suite, with `A†` from the spectral path checked against the SVD path.
/// Returns `(identity defect, spectral vs dense, action defect on random vectors)`.
pub fn moore_penrose_defects() -> (f64, f64, f64) {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut r = rng(2024);
    for n in [8usize, 9, 64] {
        let grid = Grid1D::periodic(2.0 * PI, n).unwrap();
        for kind in [SecondDifference::Narrow, SecondDifference::Wide] {
            let a = circulant_matrix(&grid, kind).unwrap();
            let fast = fft_pinv_matrix(&build_pinv(grid, kind).unwrap());
            let dense = dense_pinv_matrix(&grid, kind).unwrap();
            let d1 = rel(&(&a * &fast * &a), &a);
            let d2 = rel(&(&fast * &a * &fast), &fast);
            let d3 = rel(&(&a * &fast).transpose(), &(&a * &fast));
            let d4 = rel(&(&fast * &a).transpose(), &(&fast * &a));
            worst.0 = worst.0.max(d1).max(d2).max(d3).max(d4);
            worst.1 = worst.1.max(rel(&fast, &dense));
            let p = build_pinv(grid, kind).unwrap();
            for _ in 0..20 {
                let f = DVector::from_vec(random_vec(&mut r, n));
                let af = &a * &f;
                let apa = &a * DVector::from_vec(p.apply_values(af.as_slice()));
                let pf = DVector::from_vec(p.apply_values(f.as_slice()));
                let pap = DVector::from_vec(p.apply_values((&a * &pf).as_slice()));
                worst.2 = worst.2.max((apa - &af).amax() / af.amax()).max((pap - &pf).amax() / pf.amax());
            }
        }
    }
    worst
}
