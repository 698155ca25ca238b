//! ECME estimation for stable laws, their mixtures and the elliptical
//! stable law, driven by Gaussian scale-mixture representations.

mod elliptical;
mod kernel;
mod mixture;
mod univariate;

pub use elliptical::{fit_elliptical, fit_elliptical_with};
pub use kernel::{estep_weights, SymmetricKernel};
pub use mixture::{fit_cauchy_mixture, fit_symmetric_mixture, memberships, CauchyMixtureInit, SymmetricMixtureInit};
pub use univariate::{fit_cauchy, fit_skewed, fit_symmetric};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gof::GofResult;
use crate::quad::maximize_golden;

pub const ALPHA_BRACKET: (f64, f64) = (0.3, 2.0);
pub const BETA_BRACKET: (f64, f64) = (-0.999, 0.999);
/// Absolute tolerance of the one-dimensional shape searches.
const SEARCH_TOL: f64 = 1e-5;
const PARAM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Relative change of the observed log-likelihood that stops the loop.
    pub tol: f64,
    /// Quadrature nodes per unit of `log p` in the E-step.
    pub quad_nodes: usize,
    pub mc_fallback_draws: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iter: 500,
            tol: 1e-6,
            quad_nodes: 96,
            mc_fallback_draws: 10_000,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) || self.quad_nodes == 0 || self.mc_fallback_draws == 0 {
            return Err(Error::InvalidData("EM configuration values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub estimates: T,
    /// Observed log-likelihood at the initial values and after every iteration.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub tol: f64,
    pub gof: Option<GofResult>,
}

impl<T> FitReport<T> {
    pub fn loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("trace holds the initial value")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorWeights {
    /// `E[1/P | y_i]`.
    pub w: Vec<f64>,
    /// Membership probabilities, one row per observation.
    pub tau: Option<DMatrix<f64>>,
}

pub(crate) fn check_univariate(data: &[f64]) -> Result<()> {
    if data.len() < 10 {
        return Err(Error::InvalidData(format!("need at least 10 observations, got {}", data.len())));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("observation {i} is not finite")));
    }
    if data.iter().all(|&v| v == data[0]) {
        return Err(Error::InvalidData("all observations are equal".into()));
    }
    Ok(())
}

/// Golden-section maximization that never returns a point worse than
/// `current`. Returns `(x, f(x))`.
pub(crate) fn improve<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, current: (f64, f64)) -> (f64, f64) {
    let (x, fx) = maximize_golden(
        |v| {
            let r = f(v);
            if r.is_nan() {
                f64::NEG_INFINITY
            } else {
                r
            }
        },
        lo,
        hi,
        SEARCH_TOL,
    );
    if fx > current.1 {
        (x, fx)
    } else {
        current
    }
}

/// Loop bookkeeping shared by all fits.
pub(crate) struct Progress {
    pub trace: Vec<f64>,
    tol: f64,
}

impl Progress {
    pub fn new(initial: f64, tol: f64) -> Self {
        Progress {
            trace: vec![initial],
            tol,
        }
    }

    pub fn current(&self) -> f64 {
        *self.trace.last().expect("non-empty trace")
    }

    /// Records a new value; returns true when the loop should stop.
    pub fn push(&mut self, ll: f64, param_change: f64) -> bool {
        let prev = self.current();
        self.trace.push(ll);
        let rel = (ll - prev).abs() / prev.abs().max(1e-300);
        rel < self.tol || param_change < PARAM_TOL
    }
}

/// Largest absolute difference between two parameter vectors.
pub(crate) fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
