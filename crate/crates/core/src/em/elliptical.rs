//! Elliptical stable fit through the multivariate Gaussian scale mixture.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::density::{EllipticalDensity, MixingGrid};
use crate::error::{Error, Result};
use crate::params::EllipticalParams;

use super::kernel::mixing_grid;
use super::univariate::local_search;
use super::{max_change, EmConfig, FitReport, Progress, ALPHA_BRACKET};

const MAX_DOUBLINGS: usize = 12;

fn rows(data: &DMatrix<f64>) -> Vec<DVector<f64>> {
    (0..data.nrows()).map(|i| data.row(i).transpose()).collect()
}

fn check_data(data: &DMatrix<f64>) -> Result<()> {
    let (n, d) = data.shape();
    if d == 0 {
        return Err(Error::InvalidData("data has no columns".into()));
    }
    if n <= d {
        return Err(Error::RankDeficientData);
    }
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("entry {} of column {} is not finite", k % n, k / n)));
    }
    let mean = data.row_mean();
    let mut centred = data.clone();
    for mut r in centred.row_iter_mut() {
        r -= &mean;
    }
    let sv = centred.singular_values();
    if !(sv.min() > 1e-12 * sv.max()) {
        return Err(Error::RankDeficientData);
    }
    Ok(())
}

fn loglik(z: &[DVector<f64>], p: &EllipticalParams, grid: &MixingGrid) -> f64 {
    EllipticalDensity::with_grid(p, grid.clone())
        .and_then(|e| e.loglik(z))
        .unwrap_or(f64::NEG_INFINITY)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// CM update: weighted mean and weighted scatter over `2n`.
fn cm_update(z: &[DVector<f64>], p: &EllipticalParams, grid: &MixingGrid) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let dens = EllipticalDensity::with_grid(p, grid.clone())?;
    let w = z
        .par_iter()
        .map(|zi| dens.mahalanobis(zi).map(|r2| dens.posterior_inverse_mixing(r2)))
        .collect::<Result<Vec<_>>>()?;
    if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NumericalFailure("posterior weight is not positive and finite".into()));
    }
    let d = p.dim();
    let sw: f64 = w.iter().sum();
    let mu = z.iter().zip(&w).fold(DVector::zeros(d), |acc, (zi, &wi)| acc + zi * wi) / sw;
    let mut scatter = DMatrix::zeros(d, d);
    for (zi, &wi) in z.iter().zip(&w) {
        let r = zi - &mu;
        scatter += &r * r.transpose() * wi;
    }
    let sigma = symmetrize(&(scatter / (2.0 * z.len() as f64)));
    if sigma.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((sigma, mu))
}

/// Accepts the CM update if it does not lower the log-likelihood and keeps
/// doubling the step while it rises. The dispersion moves along the
/// geodesic `L M^k L^T` with `M = L^{-1} Sigma' L^{-T}`, so every trial
/// stays positive definite.
fn extrapolate(
    z: &[DVector<f64>],
    p: EllipticalParams,
    ll: f64,
    sigma: DMatrix<f64>,
    mu: DVector<f64>,
    grid: &MixingGrid,
) -> (EllipticalParams, f64) {
    let first = EllipticalParams { sigma: sigma.clone(), mu: mu.clone(), ..p.clone() };
    let l1 = loglik(z, &first, grid);
    if !(l1 >= ll) {
        return (p, ll);
    }
    let Some(chol) = p.sigma.clone().cholesky() else {
        return (first, l1);
    };
    let l = chol.l();
    let Some(linv) = l.clone().try_inverse() else {
        return (first, l1);
    };
    let eig = SymmetricEigen::new(symmetrize(&(&linv * &sigma * linv.transpose())));
    let dmu = &mu - &p.mu;
    let at = |k: f64| {
        let lam = eig.eigenvalues.map(|v| v.powf(k));
        let m = &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose();
        EllipticalParams {
            alpha: p.alpha,
            sigma: symmetrize(&(&l * m * l.transpose())),
            mu: &p.mu + &dmu * k,
        }
    };
    let (mut best, mut best_ll) = (first, l1);
    let mut k = 2.0;
    for _ in 0..MAX_DOUBLINGS {
        let q = at(k);
        let lq = loglik(z, &q, grid);
        if !(lq > best_ll) {
            break;
        }
        best = q;
        best_ll = lq;
        k *= 2.0;
    }
    (best, best_ll)
}

fn params_vec(p: &EllipticalParams) -> Vec<f64> {
    let mut v = vec![p.alpha];
    v.extend(p.mu.iter());
    v.extend(p.sigma.iter());
    v
}

/// Elliptical stable fit from `(alpha, Sigma, mu)`; `data` holds one
/// observation per row.
pub fn fit_elliptical(
    data: &DMatrix<f64>,
    init: &EllipticalParams,
    cfg: &EmConfig,
) -> Result<FitReport<EllipticalParams>> {
    fit_elliptical_with(data, init, cfg, |_| {})
}

/// [`fit_elliptical`] calling `observe` with the iterate after every iteration.
pub fn fit_elliptical_with<F: FnMut(&EllipticalParams)>(
    data: &DMatrix<f64>,
    init: &EllipticalParams,
    cfg: &EmConfig,
    mut observe: F,
) -> Result<FitReport<EllipticalParams>> {
    cfg.validate()?;
    init.validate()?;
    if init.dim() != data.ncols() {
        return Err(Error::DimensionMismatch {
            expected: init.dim(),
            got: data.ncols(),
        });
    }
    check_data(data)?;
    let z = rows(data);
    let mut p = init.clone();
    let mut grid = mixing_grid(p.alpha / 2.0, cfg)?;
    let mut ll = loglik(&z, &p, &grid);
    if !ll.is_finite() {
        return Err(Error::NumericalFailure("log-likelihood at the initial values is not finite".into()));
    }
    let mut progress = Progress::new(ll, cfg.tol);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let before = params_vec(&p);
        let (sigma, mu) = cm_update(&z, &p, &grid)?;
        (p, ll) = extrapolate(&z, p, ll, sigma, mu, &grid);
        let eval = |a: f64| {
            let q = EllipticalParams { alpha: a, ..p.clone() };
            mixing_grid(a / 2.0, cfg).map_or(f64::NEG_INFINITY, |g| loglik(&z, &q, &g))
        };
        let (a, l) = local_search(eval, p.alpha, ALPHA_BRACKET, ll);
        if a != p.alpha {
            p.alpha = a;
            ll = l;
            grid = mixing_grid(a / 2.0, cfg)?;
        }
        observe(&p);
        if progress.push(ll, max_change(&before, &params_vec(&p))) {
            converged = true;
            break;
        }
    }
    Ok(FitReport {
        estimates: p,
        loglik_trace: progress.trace,
        iterations,
        converged,
        tol: cfg.tol,
        gof: None,
    })
}
