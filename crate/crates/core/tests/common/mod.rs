//! Independent reference computations for integration tests: direct
//! Fourier inversion of the characteristic function with composite Simpson
//! quadrature on a smoothed axis.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stablekit::spectral::NnlsProblem;

/// `(re, im)` of the S1 log characteristic function.
pub fn log_chf_s1(t: f64, alpha: f64, beta: f64, sigma: f64, mu1: f64) -> (f64, f64) {
    let st = (sigma * t).abs();
    let sgn = t.signum();
    if (alpha - 1.0).abs() < 1e-12 {
        let im = -st * beta * sgn * (2.0 / PI) * t.abs().ln();
        (-st, im + mu1 * t)
    } else {
        let sa = st.powf(alpha);
        (-sa, sa * beta * sgn * (PI * alpha / 2.0).tan() + mu1 * t)
    }
}

/// S1 location of a law given in S0.
pub fn s0_to_s1_mu(alpha: f64, beta: f64, sigma: f64, mu0: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        mu0 - beta * (2.0 / PI) * sigma * sigma.ln()
    } else {
        mu0 - beta * sigma * (PI * alpha / 2.0).tan()
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Integrates `g(t)` over `(0, T)` where `|phi(t)| < 1e-17` beyond `T`,
/// using `t = s^q` to remove the cusp at the origin.
fn fourier<G: Fn(f64) -> f64>(g: G, alpha: f64, sigma: f64, y_scale: f64) -> f64 {
    let t_max = 40f64.powf(1.0 / alpha) / sigma;
    let q = 2.0 / alpha.min(1.0);
    let s_max = t_max.powf(1.0 / q);
    // Enough panels to resolve the oscillation of exp(-i t y).
    let cycles = t_max * (y_scale.abs() + 1.0) / (2.0 * PI);
    let n = ((cycles * 80.0) as usize).clamp(20_000, 4_000_000);
    simpson(
        |s| {
            if s == 0.0 {
                return 0.0;
            }
            let t = s.powf(q);
            g(t) * q * s.powf(q - 1.0)
        },
        0.0,
        s_max,
        n,
    )
}

/// Density by `(1/pi) int_0^inf Re[exp(-i t y) phi(t)] dt`; S1 location.
pub fn pdf_s1(y: f64, alpha: f64, beta: f64, sigma: f64, mu1: f64) -> f64 {
    let g = |t: f64| {
        let (re, im) = log_chf_s1(t, alpha, beta, sigma, mu1);
        re.exp() * (im - t * y).cos()
    };
    fourier(g, alpha, sigma, y - mu1) / PI
}

/// Gil-Pelaez: `1/2 - (1/pi) int_0^inf Im[exp(-i t y) phi(t)] / t dt`.
pub fn cdf_s1(y: f64, alpha: f64, beta: f64, sigma: f64, mu1: f64) -> f64 {
    let g = |t: f64| {
        let (re, im) = log_chf_s1(t, alpha, beta, sigma, mu1);
        re.exp() * (im - t * y).sin() / t
    };
    0.5 - fourier(g, alpha, sigma, y - mu1) / PI
}

pub fn pdf_s0(y: f64, alpha: f64, beta: f64, sigma: f64, mu0: f64) -> f64 {
    pdf_s1(y, alpha, beta, sigma, s0_to_s1_mu(alpha, beta, sigma, mu0))
}

pub fn cdf_s0(y: f64, alpha: f64, beta: f64, sigma: f64, mu0: f64) -> f64 {
    cdf_s1(y, alpha, beta, sigma, s0_to_s1_mu(alpha, beta, sigma, mu0))
}

/// `(re, im)` of the empirical characteristic function of rows of `x` at `t`.
pub fn ecf_rows(t: &[f64], x: &nalgebra::DMatrix<f64>) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for row in x.row_iter() {
        let arg: f64 = row.iter().zip(t).map(|(a, b)| a * b).sum();
        re += arg.cos();
        im += arg.sin();
    }
    let n = x.nrows() as f64;
    (re / n, im / n)
}

/// `|ecf - phi| < 4 sqrt((1 - |phi|^2) / n)`.
pub fn ecf_close(ecf: (f64, f64), phi: (f64, f64), n: usize) -> bool {
    let mod2 = phi.0 * phi.0 + phi.1 * phi.1;
    let bound = 4.0 * ((1.0 - mod2).max(0.0) / n as f64).sqrt();
    ((ecf.0 - phi.0).powi(2) + (ecf.1 - phi.1).powi(2)).sqrt() < bound
}

/// `exp(log)` for a `(re, im)` pair.
pub fn cexp(l: (f64, f64)) -> (f64, f64) {
    let m = l.0.exp();
    (m * l.1.cos(), m * l.1.sin())
}

/// One-sample Kolmogorov-Smirnov statistic of `x` against `cdf`.
pub fn ks(x: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Accelerated projected gradient run to a tight fixed point.
pub fn projected_gradient(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let ata = a.transpose() * a;
    let atb = a.transpose() * b;
    let l = ata.symmetric_eigenvalues().max();
    let mut x = DVector::zeros(a.ncols());
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let g = &ata * &y - &atb;
        let next = (&y - g / l).map(|v| v.max(0.0));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        let change = (&next - &x).amax();
        x = next;
        t = t_next;
        if change < 1e-15 {
            break;
        }
    }
    x
}

pub fn random_nnls_instance(rng: &mut ChaCha8Rng) -> NnlsProblem {
    loop {
        let r = rng.random_range(4..12);
        let m = rng.random_range(2..=r.min(8));
        let a = DMatrix::from_fn(r, m, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(r, |_, _| rng.random_range(-2.0..2.0));
        let sv = a.clone().svd(false, false).singular_values;
        if sv.max() / sv.min() < 50.0 {
            return NnlsProblem::new(a, b).unwrap();
        }
    }
}
