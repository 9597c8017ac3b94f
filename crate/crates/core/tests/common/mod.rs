//! Reference computations used only by tests. Nothing here calls into the
//! library's special functions.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use gauge_core::mixed::{ExperimentRow, Group, Task, Treatment};
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, Continuous};
use statrs::function::gamma::ln_gamma;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Tol {
    eps: f64,
    /// Below this, halving the tolerance only chases round-off.
    floor: f64,
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: Tol, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || !delta.is_finite() || delta.abs() <= 15.0 * tol.eps {
        return left + right + delta / 15.0;
    }
    let half = || Tol {
        eps: (tol.eps / 2.0).max(tol.floor),
        floor: tol.floor,
    };
    adapt(f, a, m, fa, flm, fm, left, half(), depth - 1) + adapt(f, m, b, fm, frm, fb, right, half(), depth - 1)
}

/// Adaptive Simpson with a tolerance relative to the integral's size.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut coarse = 0.0;
    let mut pieces = Vec::with_capacity(panels);
    for i in 0..panels {
        let (x0, x1) = (a + i as f64 * h, if i + 1 == panels { b } else { a + (i + 1) as f64 * h });
        let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
        let s = simpson(f0, fm, f1, x1 - x0);
        coarse += s.abs();
        pieces.push((x0, x1, f0, fm, f1, s));
    }
    let eps = (rel_tol * coarse / panels as f64).max(f64::MIN_POSITIVE);
    let floor = (1e-18 * coarse).max(f64::MIN_POSITIVE);
    for (x0, x1, f0, fm, f1, s) in pieces {
        total += adapt(f, x0, x1, f0, fm, f1, s, Tol { eps, floor }, 48);
    }
    total
}

/// Upper tail of Student's t. With `t = sqrt(nu) cot(phi)` the tail is the
/// integral of `sin(phi)^(nu - 1)` from 0 to `atan(sqrt(nu) / x)`, over the
/// same integral to pi.
pub fn t_sf(x: f64, nu: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - t_sf(-x, nu);
    }
    let g = |phi: f64| phi.sin().powf(nu - 1.0);
    let phi0 = nu.sqrt().atan2(x);
    let tail = integrate(&g, 0.0, phi0, 1e-14);
    let rest = integrate(&g, phi0, FRAC_PI_2, 1e-14);
    tail / (2.0 * (tail + rest))
}

/// Quantile of Student's t by bisection on [`t_sf`].
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p < 0.5 {
        return -t_quantile(1.0 - p, nu);
    }
    let target = 1.0 - p;
    let mut hi = 1.0;
    while t_sf(hi, nu) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t_sf(mid, nu) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper tail of F(d1, d2): a beta integral after `u = sin^2(phi)`.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d2 / 2.0, d1 / 2.0);
    let z = d2 / (d2 + d1 * f);
    let one_minus_z = d1 * f / (d2 + d1 * f);
    let h = |phi: f64| phi.sin().powf(2.0 * a - 1.0) * phi.cos().powf(2.0 * b - 1.0);
    let phi_z = z.sqrt().atan2(one_minus_z.sqrt());
    let lower = integrate(&h, 0.0, phi_z, 1e-14);
    let upper = integrate(&h, phi_z, FRAC_PI_2, 1e-14);
    lower / (lower + upper)
}

/// `E[s] / sigma` for a normal sample of size `n`.
pub fn c4(n: usize) -> f64 {
    let n = n as f64;
    (2.0 / (n - 1.0)).sqrt() * (ln_gamma(n / 2.0) - ln_gamma((n - 1.0) / 2.0)).exp()
}

/// Expected `MS(Program:Instrument)` of one-replicate data drawn from the
/// simulation model.
pub fn expected_ms_within(biases: &[f64], sigma_interaction: f64, sigma_noise: f64) -> f64 {
    let m = biases.len() as f64;
    let bbar = biases.iter().sum::<f64>() / m;
    let spread = biases.iter().map(|b| (b - bbar).powi(2)).sum::<f64>() / (m - 1.0);
    spread + sigma_interaction.powi(2) + sigma_noise.powi(2)
}

/// Expected ICC(3,1) estimate for two instruments, one replicate, `n`
/// objects, mean difference `delta` and difference sd `sigma_d`.
///
/// With two instruments the estimate depends on the data only through the
/// mean difference and the difference variance, which are independent:
/// `rho = max(dbar^2 - s^2/n, 0) / (max(dbar^2 - s^2/n, 0) + s^2)`.
pub fn expected_rho(delta: f64, sigma_d: f64, n: usize) -> f64 {
    let nf = n as f64;
    let df = nf - 1.0;
    let chi = ChiSquared::new(df).unwrap();
    let se = sigma_d / nf.sqrt();
    let rho = |dbar: f64, s2: f64| {
        let num = (dbar * dbar - s2 / nf).max(0.0);
        if num + s2 == 0.0 {
            0.0
        } else {
            num / (num + s2)
        }
    };
    let normal = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let q_hi = df + 12.0 * (2.0 * df).sqrt();
    let q_lo = (df - 12.0 * (2.0 * df).sqrt()).max(0.0);
    let outer = |q: f64| {
        let s2 = sigma_d * sigma_d * q / df;
        let inner = |u: f64| normal(u) * rho(delta + se * u, s2);
        chi.pdf(q) * integrate(&inner, -9.0, 9.0, 1e-12)
    };
    // the inner result is only good to its own tolerance, so the outer one must be looser
    integrate(&outer, q_lo, q_hi, 1e-8)
}

/// Ordinary least squares on the crossover design, via QR of the full
/// design matrix. Columns: intercept, TDD, MR task, group MR->BSK.
pub fn ols(rows: &[ExperimentRow]) -> Vec<f64> {
    let n = rows.len();
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let x = DMatrix::from_fn(n, 4, |i, j| {
        let r = &rows[i];
        match j {
            0 => 1.0,
            1 => ind(r.treatment == Treatment::Tdd),
            2 => ind(r.task == Task::Mr),
            _ => ind(r.group == Group::MrToBsk),
        }
    });
    let y = DVector::from_iterator(n, rows.iter().map(|r| r.y));
    let qr = x.qr();
    let qty = qr.q().transpose() * y;
    let beta = qr.r().solve_upper_triangular(&qty).unwrap();
    beta.iter().copied().collect()
}

/// True when `mean` is within `z` standard errors of `target`.
pub fn within(mean: f64, se: f64, target: f64, z: f64) -> bool {
    (mean - target).abs() <= z * se
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// The 50 `(prob, df)` points used for the t quantile comparison.
pub fn t_grid() -> Vec<(f64, f64)> {
    let probs = [0.001, 0.025, 0.2, 0.6, 0.9, 0.95, 0.975, 0.99, 0.995, 0.9999];
    let dfs = [1.0, 2.5, 7.0, 30.0, 120.0];
    dfs.iter().flat_map(|&d| probs.iter().map(move |&p| (p, d))).collect()
}

/// The 50 `(f, df1, df2)` points used for the F tail comparison.
pub fn f_grid() -> Vec<(f64, u64, u64)> {
    let fs = [0.2, 0.9, 2.0, 5.0, 30.0];
    let dfs = [(1, 1), (1, 5), (2, 10), (3, 7), (5, 2), (4, 40), (10, 10), (1, 73), (73, 73), (20, 100)];
    dfs.iter().flat_map(|&(a, b)| fs.iter().map(move |&f| (f, a, b))).collect()
}
