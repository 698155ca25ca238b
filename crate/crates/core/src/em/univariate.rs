//! Single-law fits: symmetric, Cauchy and skewed stable.

use rayon::prelude::*;

use crate::density::StableDensity;
use crate::error::{Error, Result};
use crate::gof::gof;
use crate::params::{Form, StableParams};

use super::kernel::SkewKernel;
use super::{check_univariate, improve, max_change, EmConfig, FitReport, Progress, ALPHA_BRACKET, BETA_BRACKET};

/// Observed log-likelihood, `-inf` for parameters outside the domain.
pub(crate) fn observed(data: &[f64], p: &StableParams) -> f64 {
    StableDensity::new(p).and_then(|d| d.loglik(data)).unwrap_or(f64::NEG_INFINITY)
}

pub(crate) fn with_shape(p: &StableParams, alpha: f64, beta: f64) -> Option<StableParams> {
    StableParams::new(alpha, beta, p.sigma, p.mu, Form::S0).ok()
}

/// Weighted closed-form scale and location update under the skewed
/// representation; `tau` carries mixture memberships.
pub(crate) fn cm_update(data: &[f64], tau: Option<&[f64]>, p: &StableParams, kernel: &SkewKernel) -> Result<(f64, f64)> {
    let c = kernel.coefficients();
    let posts = data
        .par_iter()
        .map(|&y| kernel.posterior((y - p.mu) / p.sigma - c.c3))
        .collect::<Result<Vec<_>>>()?;
    let t = |i: usize| tau.map_or(1.0, |t| t[i]);
    let (mut n, mut sw, mut swy, mut swv) = (0.0, 0.0, 0.0, 0.0);
    for (i, (post, &y)) in posts.iter().zip(data).enumerate() {
        let ti = t(i);
        n += ti;
        sw += ti * post.w;
        swy += ti * post.w * y;
        swv += ti * post.wv;
    }
    let ybar = swy / sw;
    let vbar = swv / sw;
    let (mut syy, mut syv) = (0.0, 0.0);
    for (i, (post, &y)) in posts.iter().zip(data).enumerate() {
        let d = y - ybar;
        syy += t(i) * post.w * d * d;
        syv += t(i) * post.wv * d;
    }
    if !(syy > 0.0 && syy.is_finite()) {
        return Err(Error::NumericalFailure("weighted spread vanished in the scale update".into()));
    }
    let (a1, a2) = (c.a1, c.a2);
    let inv_sigma = (a2 * syv + (a2 * a2 * syv * syv + 8.0 * a1 * a1 * n * syy).sqrt()) / (2.0 * syy);
    let sigma = 1.0 / inv_sigma;
    let mu = sigma * (inv_sigma * ybar - c.c3 - a2 * vbar);
    if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
        return Err(Error::NumericalFailure("scale update left the parameter domain".into()));
    }
    Ok((sigma, mu))
}

/// Which shape parameters the loop updates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Free {
    pub alpha: bool,
    pub beta: bool,
}

/// One ECME sweep for a single law with log-likelihood `ll`: CM step for
/// (sigma, mu), then observed-likelihood searches for beta and alpha. Every
/// move is accepted only if it does not lower the log-likelihood.
pub(crate) fn sweep<L: Fn(&StableParams) -> f64>(
    data: &[f64],
    tau: Option<&[f64]>,
    p: StableParams,
    ll: f64,
    free: Free,
    cfg: &EmConfig,
    loglik: L,
) -> Result<(StableParams, f64)> {
    let (mut p, mut ll) = (p, ll);
    let kernel = SkewKernel::new(p.alpha, p.beta, cfg)?;
    if let Ok((sigma, mu)) = cm_update(data, tau, &p, &kernel) {
        (p, ll) = extrapolate(p, ll, sigma, mu, &loglik);
    }
    // Observed-likelihood searches in log scale and in location (units of
    // the scale): the CM step alone crawls when the skewed latent part
    // carries most of the information about sigma.
    let eval = |t: f64| loglik(&StableParams { sigma: p.sigma * t.exp(), ..p });
    let (t, l) = local_search(eval, 0.0, SHIFT_BRACKET, ll);
    if t != 0.0 {
        p.sigma *= t.exp();
        ll = l;
    }
    let eval = |t: f64| loglik(&StableParams { mu: p.mu + t * p.sigma, ..p });
    let (t, l) = local_search(eval, 0.0, SHIFT_BRACKET, ll);
    if t != 0.0 {
        p.mu += t * p.sigma;
        ll = l;
    }
    if free.beta && p.alpha < 2.0 {
        let eval = |b: f64| with_shape(&p, p.alpha, b).map_or(f64::NEG_INFINITY, |q| loglik(&q));
        let (b, l) = local_search(eval, p.beta, BETA_BRACKET, ll);
        if let Some(q) = with_shape(&p, p.alpha, b) {
            p = q;
            ll = l;
        }
    }
    if free.alpha {
        let eval = |a: f64| with_shape(&p, a, p.beta).map_or(f64::NEG_INFINITY, |q| loglik(&q));
        let (a, l) = local_search(eval, p.alpha, ALPHA_BRACKET, ll);
        if let Some(q) = with_shape(&p, a, p.beta) {
            p = q;
            ll = l;
        }
    }
    Ok((p, ll))
}

const MAX_DOUBLINGS: usize = 12;
const MAX_SQUAREM_STEP: f64 = 1e4;
const SHIFT_BRACKET: (f64, f64) = (-5.0, 5.0);

/// Accepts the CM update if it does not lower the log-likelihood, then keeps
/// doubling the step along the same direction (log scale, location) while
/// the log-likelihood keeps rising.
pub(crate) fn extrapolate<L: Fn(&StableParams) -> f64>(
    p: StableParams,
    ll: f64,
    sigma: f64,
    mu: f64,
    loglik: &L,
) -> (StableParams, f64) {
    let dls = sigma.ln() - p.sigma.ln();
    let dmu = mu - p.mu;
    let at = |k: f64| StableParams {
        sigma: p.sigma * (k * dls).exp(),
        mu: p.mu + k * dmu,
        ..p
    };
    let first = at(1.0);
    let l1 = loglik(&first);
    if !(l1 >= ll) {
        return (p, ll);
    }
    let (mut best, mut best_ll) = (first, l1);
    let mut k = 2.0;
    for _ in 0..MAX_DOUBLINGS {
        let q = at(k);
        let l = loglik(&q);
        if !(l > best_ll) {
            break;
        }
        best = q;
        best_ll = l;
        k *= 2.0;
    }
    (best, best_ll)
}

const LOCAL_WIDTH: f64 = 0.1;

/// Golden-section search in a window around `x`, moved outward while the
/// maximizer sits on a window edge that is not a bracket edge.
pub(crate) fn local_search<F: Fn(f64) -> f64>(f: F, x: f64, bracket: (f64, f64), fx: f64) -> (f64, f64) {
    let mut cur = (x, fx);
    let mut centre = x;
    for _ in 0..20 {
        let lo = (centre - LOCAL_WIDTH).max(bracket.0);
        let hi = (centre + LOCAL_WIDTH).min(bracket.1);
        let next = improve(&f, lo, hi, cur);
        let moved = next.0 != cur.0;
        cur = next;
        let edge = (cur.0 - lo < 1e-3 && lo > bracket.0) || (hi - cur.0 < 1e-3 && hi < bracket.1);
        if !(moved && edge) {
            break;
        }
        centre = cur.0;
    }
    cur
}

/// Moves beta to +-1 when the search pinned it at the bracket edge and the
/// endpoint does at least as well.
pub(crate) fn snap_beta<L: Fn(&StableParams) -> f64>(p: StableParams, ll: f64, loglik: L) -> (StableParams, f64) {
    if p.alpha < 2.0 && p.beta.abs() >= BETA_BRACKET.1 - 1e-4 {
        if let Some(q) = with_shape(&p, p.alpha, p.beta.signum()) {
            let l = loglik(&q);
            if l >= ll {
                return (q, l);
            }
        }
    }
    (p, ll)
}

fn params_vec(p: &StableParams) -> [f64; 4] {
    [p.alpha, p.beta, p.sigma, p.mu]
}

fn coords(p: &StableParams) -> [f64; 4] {
    [p.alpha, p.beta, p.sigma.ln(), p.mu]
}

fn from_coords(v: &[f64; 4], form: Form) -> Option<StableParams> {
    if !(ALPHA_BRACKET.0..=ALPHA_BRACKET.1).contains(&v[0]) {
        return None;
    }
    StableParams::new(v[0], v[1], v[2].exp(), v[3], form).ok()
}

/// One squared-extrapolation cycle over two sweeps `p0 -> p1 -> p2`
/// (Varadhan and Roland's SQUAREM with step `-|r| / |v|`). The extrapolated
/// point is halved back toward `p2` until it beats `l2`.
pub(crate) fn squarem<L: Fn(&StableParams) -> f64>(
    p0: &StableParams,
    p1: &StableParams,
    p2: StableParams,
    l2: f64,
    loglik: L,
) -> (StableParams, f64) {
    let (c0, c1, c2) = (coords(p0), coords(p1), coords(&p2));
    let r: Vec<f64> = (0..4).map(|i| c1[i] - c0[i]).collect();
    let v: Vec<f64> = (0..4).map(|i| c2[i] - 2.0 * c1[i] + c0[i]).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (nr, nv) = (norm(&r), norm(&v));
    if !(nv > 0.0 && nr > 0.0) {
        return (p2, l2);
    }
    let mut step = (-nr / nv).max(-MAX_SQUAREM_STEP);
    while step < -1.0 - 1e-3 {
        let mut c = [0.0; 4];
        for i in 0..4 {
            c[i] = c0[i] - 2.0 * step * r[i] + step * step * v[i];
        }
        if let Some(q) = from_coords(&c, p2.form) {
            let l = loglik(&q);
            if l > l2 {
                return (q, l);
            }
        }
        step = (step - 1.0) / 2.0;
    }
    (p2, l2)
}

fn fit_single(data: &[f64], init: StableParams, free: Free, cfg: &EmConfig) -> Result<FitReport<StableParams>> {
    cfg.validate()?;
    check_univariate(data)?;
    let target = init.form;
    let mut p = init.convert_form(Form::S0);
    let loglik = |q: &StableParams| observed(data, q);
    let mut ll = loglik(&p);
    if !ll.is_finite() {
        return Err(Error::NumericalFailure("log-likelihood at the initial values is not finite".into()));
    }
    let mut progress = Progress::new(ll, cfg.tol);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let before = params_vec(&p);
        let (p1, l1) = sweep(data, None, p, ll, free, cfg, loglik)?;
        let (p2, l2) = sweep(data, None, p1, l1, free, cfg, loglik)?;
        (p, ll) = squarem(&p, &p1, p2, l2, loglik);
        if progress.push(ll, max_change(&before, &params_vec(&p))) {
            converged = true;
            break;
        }
    }
    if free.beta {
        let (q, l) = snap_beta(p, ll, loglik);
        if q != p {
            p = q;
            ll = l;
            progress.trace.push(ll);
        }
    }
    let estimates = p.convert_form(target);
    Ok(FitReport {
        gof: gof(data, &estimates).ok(),
        estimates,
        loglik_trace: progress.trace,
        iterations,
        converged,
        tol: cfg.tol,
    })
}

/// Symmetric stable fit from `(alpha, sigma, mu)`.
pub fn fit_symmetric(data: &[f64], init: (f64, f64, f64), cfg: &EmConfig) -> Result<FitReport<StableParams>> {
    let p = StableParams::symmetric(init.0, init.1, init.2)?;
    fit_single(data, p, Free { alpha: true, beta: false }, cfg)
}

/// Cauchy-family fit (`alpha = 1`) from `(beta, sigma, mu)`.
pub fn fit_cauchy(data: &[f64], init: (f64, f64, f64), form: Form, cfg: &EmConfig) -> Result<FitReport<StableParams>> {
    let p = StableParams::new(1.0, init.0, init.1, init.2, form)?;
    fit_single(data, p, Free { alpha: false, beta: true }, cfg)
}

/// General stable fit from `(alpha, beta, sigma, mu)` in `form`.
pub fn fit_skewed(
    data: &[f64],
    init: (f64, f64, f64, f64),
    form: Form,
    cfg: &EmConfig,
) -> Result<FitReport<StableParams>> {
    let p = StableParams::new(init.0, init.1, init.2, init.3, form)?;
    fit_single(data, p, Free { alpha: true, beta: true }, cfg)
}

