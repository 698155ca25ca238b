//! Kolmogorov-Smirnov and Anderson-Darling statistics against a fitted
//! univariate model.

use rayon::prelude::*;

use crate::density::{MixtureDensity, StableDensity};
use crate::error::{Error, Result};
use crate::params::{MixtureSpec, StableParams};

const AD_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub ks: f64,
    pub ad: f64,
    pub n: usize,
}

/// A univariate model with a cdf.
pub trait CdfModel {
    /// `(F(y), 1 - F(y))` at every point, in order.
    fn cdf_pairs(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>>;
}

impl CdfModel for StableDensity {
    fn cdf_pairs(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
        ys.par_iter().map(|&y| self.cdf_pair(y)).collect()
    }
}

impl CdfModel for MixtureDensity {
    fn cdf_pairs(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
        ys.par_iter().map(|&y| self.cdf_pair(y)).collect()
    }
}

impl CdfModel for StableParams {
    fn cdf_pairs(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
        StableDensity::new(self)?.cdf_pairs(ys)
    }
}

impl CdfModel for MixtureSpec {
    fn cdf_pairs(&self, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
        MixtureDensity::new(self)?.cdf_pairs(ys)
    }
}

fn sorted(data: &[f64]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::InvalidData("goodness-of-fit needs at least one observation".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("data contain non-finite values".into()));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn ks_from(cdf: &[(f64, f64)]) -> f64 {
    let n = cdf.len() as f64;
    cdf.iter()
        .enumerate()
        .map(|(i, &(f, _))| {
            let i = i as f64;
            ((i + 1.0) / n - f).max(f - i / n)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

fn ad_from(cdf: &[(f64, f64)]) -> f64 {
    let n = cdf.len();
    let clamp = |p: f64| p.clamp(AD_CLAMP, 1.0 - AD_CLAMP);
    let s: f64 = (0..n)
        .map(|i| {
            let lower = clamp(cdf[i].0).ln();
            let upper = clamp(cdf[n - 1 - i].1).ln();
            (2 * i + 1) as f64 * (lower + upper)
        })
        .sum();
    -(n as f64) - s / n as f64
}

pub fn ks_statistic<M: CdfModel + ?Sized>(data: &[f64], model: &M) -> Result<f64> {
    let y = sorted(data)?;
    Ok(ks_from(&model.cdf_pairs(&y)?))
}

pub fn ad_statistic<M: CdfModel + ?Sized>(data: &[f64], model: &M) -> Result<f64> {
    let y = sorted(data)?;
    Ok(ad_from(&model.cdf_pairs(&y)?))
}

/// Both statistics from one pass of cdf evaluations.
pub fn gof<M: CdfModel + ?Sized>(data: &[f64], model: &M) -> Result<GofResult> {
    let y = sorted(data)?;
    let cdf = model.cdf_pairs(&y)?;
    Ok(GofResult {
        ks: ks_from(&cdf),
        ad: ad_from(&cdf),
        n: y.len(),
    })
}
