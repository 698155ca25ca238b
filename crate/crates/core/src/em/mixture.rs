//! Finite mixtures of Cauchy-family and of symmetric stable laws.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::density::{StableDensity, PDF_FLOOR};
use crate::error::{Error, Result};
use crate::gof::gof;
use crate::params::{Form, MixtureSpec, StableParams};

use super::univariate::{snap_beta, sweep, Free};
use super::{check_univariate, max_change, EmConfig, FitReport, PosteriorWeights, Progress};

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyMixtureInit {
    pub omega: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMixtureInit {
    pub omega: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
}

fn check_lengths(k: usize, lens: [usize; 4]) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidData("number of components must be at least 1".into()));
    }
    if let Some(&got) = lens.iter().find(|&&l| l != k) {
        return Err(Error::DimensionMismatch { expected: k, got });
    }
    Ok(())
}

/// Cauchy-family mixture (`alpha = 1`, S0 components).
pub fn fit_cauchy_mixture(
    data: &[f64],
    k: usize,
    init: &CauchyMixtureInit,
    cfg: &EmConfig,
) -> Result<FitReport<MixtureSpec>> {
    check_lengths(k, [init.omega.len(), init.beta.len(), init.sigma.len(), init.mu.len()])?;
    let comps = (0..k)
        .map(|j| StableParams::new(1.0, init.beta[j], init.sigma[j], init.mu[j], Form::S0))
        .collect::<Result<Vec<_>>>()?;
    let spec = MixtureSpec::new(init.omega.clone(), comps)?;
    fit_mixture(data, spec, Free { alpha: false, beta: true }, cfg)
}

/// Mixture of symmetric stable laws.
pub fn fit_symmetric_mixture(
    data: &[f64],
    k: usize,
    init: &SymmetricMixtureInit,
    cfg: &EmConfig,
) -> Result<FitReport<MixtureSpec>> {
    check_lengths(k, [init.omega.len(), init.alpha.len(), init.sigma.len(), init.mu.len()])?;
    let comps = (0..k)
        .map(|j| StableParams::symmetric(init.alpha[j], init.sigma[j], init.mu[j]))
        .collect::<Result<Vec<_>>>()?;
    let spec = MixtureSpec::new(init.omega.clone(), comps)?;
    fit_mixture(data, spec, Free { alpha: true, beta: false }, cfg)
}

fn component_pdfs(data: &[f64], p: &StableParams) -> Vec<f64> {
    match StableDensity::new(p) {
        Ok(d) => data.par_iter().map(|&y| d.pdf(y).unwrap_or(0.0)).collect(),
        Err(_) => vec![0.0; data.len()],
    }
}

fn mixture_loglik(mix: &[f64]) -> f64 {
    mix.iter().map(|&g| g.max(PDF_FLOOR).ln()).sum()
}

/// Memberships `tau_ij = omega_j f_j(y_i) / g(y_i)`, one row per observation.
pub fn memberships(data: &[f64], spec: &MixtureSpec) -> Result<PosteriorWeights> {
    spec.validate()?;
    let pdfs: Vec<Vec<f64>> = spec.components.iter().map(|p| component_pdfs(data, p)).collect();
    let tau = membership_matrix(&spec.weights, &pdfs);
    Ok(PosteriorWeights {
        w: vec![1.0; data.len()],
        tau: Some(tau),
    })
}

fn membership_matrix(omega: &[f64], pdfs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = pdfs[0].len();
    let k = omega.len();
    DMatrix::from_fn(n, k, |i, j| {
        let num = omega[j] * pdfs[j][i];
        let den: f64 = (0..k).map(|l| omega[l] * pdfs[l][i]).sum();
        if den > 0.0 {
            num / den
        } else {
            1.0 / k as f64
        }
    })
}

fn spec_vec(spec: &MixtureSpec) -> Vec<f64> {
    let mut v = spec.weights.clone();
    for p in &spec.components {
        v.extend([p.alpha, p.beta, p.sigma, p.mu]);
    }
    v
}

fn fit_mixture(data: &[f64], init: MixtureSpec, free: Free, cfg: &EmConfig) -> Result<FitReport<MixtureSpec>> {
    cfg.validate()?;
    check_univariate(data)?;
    let k = init.k();
    let n = data.len();
    let mut spec = init;
    let mut pdfs: Vec<Vec<f64>> = spec.components.iter().map(|p| component_pdfs(data, p)).collect();
    let mix_of = |omega: &[f64], pdfs: &[Vec<f64>]| -> Vec<f64> {
        (0..n).map(|i| (0..k).map(|j| omega[j] * pdfs[j][i]).sum()).collect()
    };
    let mut ll = mixture_loglik(&mix_of(&spec.weights, &pdfs));
    if !ll.is_finite() {
        return Err(Error::NumericalFailure("log-likelihood at the initial values is not finite".into()));
    }
    let mut progress = Progress::new(ll, cfg.tol);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let before = spec_vec(&spec);
        let tau = membership_matrix(&spec.weights, &pdfs);
        for j in 0..k {
            let mass: f64 = tau.column(j).sum();
            if mass < k as f64 * 1e-6 {
                return Err(Error::ComponentCollapse { component: j, mass });
            }
        }
        // Weights: closed-form maximizer of the expected complete-data likelihood.
        let omega: Vec<f64> = (0..k).map(|j| tau.column(j).sum() / n as f64).collect();
        let l = mixture_loglik(&mix_of(&omega, &pdfs));
        if l >= ll {
            spec.weights = omega;
            ll = l;
        }
        for j in 0..k {
            let wj = spec.weights[j];
            let rest: Vec<f64> = (0..n)
                .map(|i| (0..k).filter(|&l| l != j).map(|l| spec.weights[l] * pdfs[l][i]).sum())
                .collect();
            let loglik = |q: &StableParams| -> f64 {
                let f = component_pdfs(data, q);
                f.iter().zip(&rest).map(|(&fi, &r)| (wj * fi + r).max(PDF_FLOOR).ln()).sum()
            };
            let tj: Vec<f64> = tau.column(j).iter().copied().collect();
            let (q, l) = sweep(data, Some(&tj), spec.components[j], ll, free, cfg, loglik)?;
            if q != spec.components[j] {
                spec.components[j] = q;
                pdfs[j] = component_pdfs(data, &q);
                ll = l;
            }
        }
        if progress.push(ll, max_change(&before, &spec_vec(&spec))) {
            converged = true;
            break;
        }
    }
    if free.beta {
        for j in 0..k {
            let wj = spec.weights[j];
            let rest: Vec<f64> = (0..n)
                .map(|i| (0..k).filter(|&l| l != j).map(|l| spec.weights[l] * pdfs[l][i]).sum())
                .collect();
            let loglik = |q: &StableParams| -> f64 {
                let f = component_pdfs(data, q);
                f.iter().zip(&rest).map(|(&fi, &r)| (wj * fi + r).max(PDF_FLOOR).ln()).sum()
            };
            let (q, l) = snap_beta(spec.components[j], ll, loglik);
            if q != spec.components[j] {
                spec.components[j] = q;
                pdfs[j] = component_pdfs(data, &q);
                ll = l;
                progress.trace.push(ll);
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| spec.components[a].mu.total_cmp(&spec.components[b].mu));
    let estimates = MixtureSpec {
        weights: order.iter().map(|&j| spec.weights[j]).collect(),
        components: order.iter().map(|&j| spec.components[j]).collect(),
    };
    Ok(FitReport {
        gof: gof(data, &estimates).ok(),
        estimates,
        loglik_trace: progress.trace,
        iterations,
        converged,
        tol: cfg.tol,
    })
}
