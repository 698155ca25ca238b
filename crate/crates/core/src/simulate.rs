//! Seeded samplers for univariate, truncated, positive, elliptical and
//! discrete-spectral stable laws.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use rayon::prelude::*;

use crate::density::{positive_stable_params, StableDensity};
use crate::error::{Error, Result};
use crate::params::{EllipticalParams, Form, SpectralMeasure, StableParams};
use crate::quad::find_root;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Same seed, different stream.
    pub fn substream(&self, stream_id: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream_id,
        }
    }
}

/// One standard S1(alpha, beta, 1, 0) draw (Chambers-Mallows-Stuck).
pub fn standard_s1<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        let lin = FRAC_PI_2 + beta * u;
        return FRAC_2_PI * (lin * u.tan() - beta * (FRAC_PI_2 * w * u.cos() / lin).ln());
    }
    let tan = (PI * alpha / 2.0).tan();
    let b = (beta * tan).atan() / alpha;
    let s = (1.0 + beta * beta * tan * tan).powf(1.0 / (2.0 * alpha));
    let t = alpha * (u + b);
    s * t.sin() / u.cos().powf(1.0 / alpha) * ((u - t).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Draw from `params` built from a standard S1 variate `x`.
fn transform(x: f64, p: &StableParams) -> f64 {
    match (p.form, p.alpha == 1.0) {
        (Form::S1, false) => p.sigma * x + p.mu,
        (Form::S0, false) => p.sigma * (x - p.beta * (PI * p.alpha / 2.0).tan()) + p.mu,
        (Form::S1, true) => p.sigma * x + FRAC_2_PI * p.beta * p.sigma * p.sigma.ln() + p.mu,
        (Form::S0, true) => p.sigma * x + p.mu,
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidData("sample size must be at least 1".into()));
    }
    Ok(())
}

pub fn rstable(n: usize, params: &StableParams, stream: &RngStream) -> Result<Vec<f64>> {
    check_n(n)?;
    params.validate()?;
    let p = params.normalized();
    let mut rng = stream.rng();
    Ok((0..n).map(|_| transform(standard_s1(&mut rng, p.alpha, p.beta), &p)).collect())
}

/// Positive stable draws with Laplace transform `exp(-s^a)`, `a = alpha_half`.
pub fn rstable_positive(n: usize, alpha_half: f64, stream: &RngStream) -> Result<Vec<f64>> {
    check_n(n)?;
    let p = positive_stable_params(alpha_half)?;
    let mut rng = stream.rng();
    Ok((0..n).map(|_| positive_draw(&mut rng, &p)).collect())
}

fn positive_draw<R: Rng + ?Sized>(rng: &mut R, p: &StableParams) -> f64 {
    (p.sigma * standard_s1(rng, p.alpha, 1.0)).max(f64::MIN_POSITIVE)
}

/// Draws restricted to `(a, b)` by inverting the cdf.
pub fn rstable_truncated(n: usize, params: &StableParams, a: f64, b: f64, stream: &RngStream) -> Result<Vec<f64>> {
    check_n(n)?;
    if !(a < b) || a.is_nan() || b.is_nan() {
        return Err(Error::InvalidData(format!("truncation bounds must satisfy a < b, got ({a}, {b})")));
    }
    let density = StableDensity::new(params)?;
    let (fa, sa) = density.cdf_pair(a)?;
    let (fb, sb) = density.cdf_pair(b)?;
    // Work in whichever tail keeps the probabilities away from one.
    let upper = fa > 0.5;
    let mass = if upper { sa - sb } else { fb - fa };
    if !(mass > 1e-12) {
        return Err(Error::EmptyTruncationRegion(mass.max(0.0)));
    }
    let mut rng = stream.rng();
    let uniforms: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let lo = a.next_up();
    let hi = b.next_down();
    uniforms
        .par_iter()
        .map(|&u| {
            let f = |y: f64| -> f64 {
                if upper {
                    // Decreasing in y; negate so the bracket logic sees F-like behaviour.
                    (sb + u * mass) - density.cdf_pair(y).map_or(f64::NAN, |c| c.1)
                } else {
                    density.cdf_pair(y).map_or(f64::NAN, |c| c.0) - (fa + u * mass)
                }
            };
            let tol = 1e-10 * (1.0 + a.abs().max(b.abs()));
            let y = find_root(f, a, b, tol, 200)?;
            Ok(y.clamp(lo, hi))
        })
        .collect()
}

/// Cholesky factor of the symmetric part of `sigma`, retrying with a small
/// diagonal jitter when the matrix is numerically semidefinite.
pub fn robust_cholesky(sigma: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let sym = (sigma + sigma.transpose()) * 0.5;
    if let Some(c) = Cholesky::new(sym.clone()) {
        return Ok(c);
    }
    let d = sym.nrows();
    let scale = sym.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    Cholesky::new(sym + DMatrix::identity(d, d) * (1e-12 * scale)).ok_or(Error::NotPositiveDefinite)
}

/// Rows are draws `Z = sqrt(2P) A N + mu` with `A A^T = Sigma`.
pub fn rstable_elliptical(n: usize, params: &EllipticalParams, stream: &RngStream) -> Result<DMatrix<f64>> {
    check_n(n)?;
    params.validate()?;
    let d = params.dim();
    let a = robust_cholesky(&params.sigma)?.l();
    let mixing = if params.alpha < 2.0 {
        Some(positive_stable_params(params.alpha / 2.0)?)
    } else {
        None
    };
    let mut rng = stream.rng();
    let mut out = DMatrix::zeros(n, d);
    for i in 0..n {
        let p = mixing.as_ref().map_or(1.0, |m| positive_draw(&mut rng, m));
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let row = &a * z * (2.0 * p).sqrt() + &params.mu;
        out.set_row(i, &row.transpose());
    }
    Ok(out)
}

/// Rows are draws `X = sum_j gamma_j^(1/alpha) V_j s_j + mu` with
/// `V_j` standard S1(alpha, 1, 1, 0).
pub fn rstable_spectral(n: usize, measure: &SpectralMeasure, stream: &RngStream) -> Result<DMatrix<f64>> {
    check_n(n)?;
    measure.validate()?;
    let d = measure.dim();
    let weights: Vec<f64> = measure.masses.iter().map(|g| g.powf(1.0 / measure.alpha)).collect();
    let mut rng = stream.rng();
    let mut out = DMatrix::zeros(n, d);
    for i in 0..n {
        let mut x = measure.mu.clone();
        for (s, &w) in measure.points.iter().zip(&weights) {
            let v = standard_s1(&mut rng, measure.alpha, 1.0);
            x.axpy(w * v, s, 1.0);
        }
        out.set_row(i, &x.transpose());
    }
    Ok(out)
}
