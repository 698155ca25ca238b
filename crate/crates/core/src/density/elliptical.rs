//! Elliptically contoured stable densities as Gaussian scale mixtures:
//! `f(z) = int N_d(z; mu, 2 p Sigma) f_P(p) dp` with `P` positive stable of
//! index `alpha / 2`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::EllipticalParams;
use crate::quad::{integrate, QuadratureSpec};

use super::mixing::MixingGrid;
use super::{positive_stable_params, sum_logs, Standard};

const DEFAULT_NODES: usize = 96;

/// Elliptical evaluator with a cached factorization and mixing grid.
#[derive(Debug, Clone)]
pub struct EllipticalDensity {
    params: EllipticalParams,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
    grid: MixingGrid,
}

fn factor(sigma: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let chol = Cholesky::new(sigma.clone()).ok_or(Error::NotPositiveDefinite)?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok((chol, log_det))
}

/// Squared Mahalanobis distance `(z - mu)^T Sigma^{-1} (z - mu)`.
fn mahalanobis(chol: &Cholesky<f64, Dyn>, mu: &DVector<f64>, z: &DVector<f64>) -> Result<f64> {
    if z.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("evaluation point is not finite".into()));
    }
    let d = z - mu;
    let w = chol.l_dirty().solve_lower_triangular(&d).ok_or(Error::NotPositiveDefinite)?;
    Ok(w.norm_squared())
}

impl EllipticalDensity {
    pub fn new(params: &EllipticalParams) -> Result<Self> {
        Self::with_nodes(params, DEFAULT_NODES)
    }

    pub fn with_nodes(params: &EllipticalParams, nodes_per_unit: usize) -> Result<Self> {
        params.validate()?;
        let (chol, log_det) = factor(&params.sigma)?;
        Ok(EllipticalDensity {
            params: params.clone(),
            chol,
            log_det,
            grid: MixingGrid::new(params.alpha / 2.0, nodes_per_unit)?,
        })
    }

    pub(crate) fn with_grid(params: &EllipticalParams, grid: MixingGrid) -> Result<Self> {
        params.validate()?;
        let (chol, log_det) = factor(&params.sigma)?;
        Ok(EllipticalDensity {
            params: params.clone(),
            chol,
            log_det,
            grid,
        })
    }

    pub fn params(&self) -> &EllipticalParams {
        &self.params
    }

    pub fn mahalanobis(&self, z: &DVector<f64>) -> Result<f64> {
        mahalanobis(&self.chol, &self.params.mu, z)
    }

    fn log_const(&self) -> f64 {
        let d = self.params.dim() as f64;
        -0.5 * d * (4.0 * PI).ln() - 0.5 * self.log_det
    }

    /// `ln int p^j p^{-d/2} exp(-r2 / (4p)) f_P(p) dp` for `j` in `powers`.
    fn log_kernel_moments(&self, r2: f64, powers: &[f64]) -> Vec<f64> {
        let half_d = 0.5 * self.params.dim() as f64;
        self.grid
            .log_moments(|u| -half_d * u - 0.25 * r2 * (-u).exp(), powers)
    }

    pub fn log_pdf(&self, z: &DVector<f64>) -> Result<f64> {
        let r2 = self.mahalanobis(z)?;
        Ok(self.log_const() + self.log_kernel_moments(r2, &[0.0])[0])
    }

    pub fn pdf(&self, z: &DVector<f64>) -> Result<f64> {
        Ok(self.log_pdf(z)?.exp())
    }

    /// `E[1/P | z]` for the latent mixing variable.
    pub fn posterior_inverse_mixing(&self, r2: f64) -> f64 {
        let m = self.log_kernel_moments(r2, &[0.0, -1.0]);
        (m[1] - m[0]).exp()
    }

    pub fn loglik(&self, data: &[DVector<f64>]) -> Result<f64> {
        let pdfs = data.par_iter().map(|z| self.pdf(z)).collect::<Result<Vec<_>>>()?;
        Ok(sum_logs(&pdfs))
    }
}

/// Elliptical stable density at `z` by adaptive quadrature over `log p`.
pub fn pdf_elliptical(z: &DVector<f64>, params: &EllipticalParams) -> Result<f64> {
    params.validate()?;
    let (chol, log_det) = factor(&params.sigma)?;
    let r2 = mahalanobis(&chol, &params.mu, z)?;
    let d = params.dim() as f64;
    let log_const = -0.5 * d * (4.0 * PI).ln() - 0.5 * log_det;
    if params.alpha == 2.0 {
        return Ok((log_const - 0.25 * r2).exp());
    }
    let a = params.alpha / 2.0;
    let mixing = positive_stable_params(a)?;
    let standard = Standard::new(a, 1.0);
    let gamma = mixing.sigma;
    let shift = (PI * a / 2.0).tan();

    let mut failure = None;
    let integrand = |u: f64| {
        let p = u.exp();
        match standard.pdf(p / gamma - shift) {
            Ok(f) if f > 0.0 => (log_const - 0.5 * d * u - 0.25 * r2 / p + u + (f / gamma).ln()).exp(),
            Ok(_) => 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let (lo, hi) = (-60.0, (36.0 / a).max(60.0));
    let mut breaks: Vec<f64> = (lo as i64..hi as i64).map(|i| i as f64).collect();
    if r2 > 0.0 {
        breaks.push((r2 / (2.0 * d)).ln());
    }
    let spec = QuadratureSpec {
        abs_tol: 1e-14,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
    };
    let result = integrate(integrand, lo, hi, &breaks, &spec)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(result.value.max(0.0))
}
