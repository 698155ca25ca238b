//! Convergent/asymptotic power series for the standardized stable pdf and
//! cdf (`alpha != 1`), in the tail (`|z|` large) and core (`|z|` small)
//! regions. `z` is measured from the S1 centre, in units of `sigma`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{Form, StableParams};
use crate::quad::CompensatedSum;

pub const DEFAULT_TERMS: usize = 150;

/// Series accepted only when its own error estimate is below this
/// (absolute plus relative) bound.
const SERIES_ABS_TOL: f64 = 1e-12;
const SERIES_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    TailSeries,
    CoreSeries,
    Fallback,
}

/// Regime selection for one evaluation point, with the quantities that drive it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRegime {
    pub k: usize,
    pub lambda: f64,
    pub eta: f64,
    pub xi: f64,
    pub regime: Regime,
}

/// Picks the series regime for `y` under `params`.
///
/// The thresholds are applied to the standardized distance `|y - mu - xi| / sigma`.
pub fn classify_regime(y: f64, params: &StableParams, k: usize) -> Result<SeriesRegime> {
    params.validate()?;
    let p = params.normalized();
    if p.alpha == 1.0 {
        return Err(Error::UnsupportedAlpha(p.alpha));
    }
    let tan = (PI * p.alpha / 2.0).tan();
    let xi = match p.form {
        Form::S1 => 0.0,
        Form::S0 => -p.sigma * p.beta * tan,
    };
    let z = (y - p.mu - xi) / p.sigma;
    let (tail, core) = thresholds(p.alpha, p.beta, k);
    let regime = if z.abs() >= tail {
        Regime::TailSeries
    } else if z.abs() <= core {
        Regime::CoreSeries
    } else {
        Regime::Fallback
    };
    Ok(SeriesRegime {
        k,
        lambda: lambda(p.alpha, p.beta),
        eta: 2.0 / PI * (p.beta * tan).atan() * sign(z),
        xi,
        regime,
    })
}

fn sign(z: f64) -> f64 {
    if z < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub(crate) fn lambda(alpha: f64, beta: f64) -> f64 {
    let t = beta * (PI * alpha / 2.0).tan();
    (1.0 + t * t).powf(1.0 / (2.0 * alpha))
}

/// `(tail, core)` bounds on the standardized distance `|z|`.
pub(crate) fn thresholds(alpha: f64, beta: f64, k: usize) -> (f64, f64) {
    let kf = k as f64;
    let lam = lambda(alpha, beta);
    let tail_ratio = ln_gamma(kf * alpha + alpha) - ln_gamma(kf * alpha + 1.0);
    let tail = lam * ((alpha.ln() + tail_ratio) / alpha).exp() + alpha;
    let core_ratio = ln_gamma(kf / alpha + 1.0) - ln_gamma(kf / alpha + 1.0 / alpha);
    let core = lam * alpha * core_ratio.exp() - alpha;
    (tail, core)
}

/// Precomputed series coefficients for one `(alpha, beta)` pair.
#[derive(Debug, Clone)]
pub(crate) struct SeriesTables {
    alpha: f64,
    lambda: f64,
    pub tail_bound: f64,
    pub core_bound: f64,
    /// `ln Gamma(i alpha + 1) - ln Gamma(i + 1)`
    tail_log_coef: Vec<f64>,
    /// `ln Gamma(i / alpha + 1) - ln Gamma(i + 1)`
    core_log_coef: Vec<f64>,
    /// `sin(i pi (alpha + eta) / 2)` for `z > 0` and `z < 0`.
    tail_sin: [Vec<f64>; 2],
    /// `sin(i pi (alpha + eta) / (2 alpha))` for `z > 0` and `z < 0`.
    core_sin: [Vec<f64>; 2],
    core_cdf_const: f64,
}

/// Series value and its error estimate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesValue {
    pub value: f64,
    pub error: f64,
}

impl SeriesValue {
    pub fn trusted(&self) -> bool {
        self.value.is_finite() && self.error <= SERIES_ABS_TOL + SERIES_REL_TOL * self.value.abs()
    }
}

impl SeriesTables {
    pub fn new(alpha: f64, beta: f64, k: usize) -> Self {
        let tan = (PI * alpha / 2.0).tan();
        let eta0 = 2.0 / PI * (beta * tan).atan();
        let (tail_bound, core_bound) = thresholds(alpha, beta, k);
        let idx = || (1..=k).map(|i| i as f64);
        let tail_log_coef = idx().map(|i| ln_gamma(i * alpha + 1.0) - ln_gamma(i + 1.0)).collect();
        let core_log_coef = idx().map(|i| ln_gamma(i / alpha + 1.0) - ln_gamma(i + 1.0)).collect();
        let tail_sin = [
            idx().map(|i| (i * PI * (alpha + eta0) / 2.0).sin()).collect(),
            idx().map(|i| (i * PI * (alpha - eta0) / 2.0).sin()).collect(),
        ];
        let core_sin = [
            idx().map(|i| (i * PI * (alpha + eta0) / (2.0 * alpha)).sin()).collect(),
            idx().map(|i| (i * PI * (alpha - eta0) / (2.0 * alpha)).sin()).collect(),
        ];
        SeriesTables {
            alpha,
            lambda: lambda(alpha, beta),
            tail_bound,
            core_bound,
            tail_log_coef,
            core_log_coef,
            tail_sin,
            core_sin,
            core_cdf_const: 0.5 - (beta * tan).atan() / (PI * alpha),
        }
    }

    pub fn regime(&self, z: f64) -> Regime {
        if z.abs() >= self.tail_bound {
            Regime::TailSeries
        } else if z.abs() <= self.core_bound {
            Regime::CoreSeries
        } else {
            Regime::Fallback
        }
    }

    fn side(z: f64) -> usize {
        usize::from(z < 0.0)
    }

    /// Sums `sum_i (-1)^(i-1) exp(log_coef_i + i * log_x) * sin_i * extra_i`,
    /// returning the sum, the largest term and the last term magnitudes.
    fn alternating<F: Fn(usize) -> f64>(log_coef: &[f64], sin: &[f64], log_x: f64, extra: F) -> (f64, f64, f64) {
        let mut acc = CompensatedSum::default();
        let mut max_term: f64 = 0.0;
        let mut last = 0.0;
        for (i, (&c, &s)) in log_coef.iter().zip(sin).enumerate() {
            let n = (i + 1) as f64;
            let mag = (c + n * log_x).exp() * extra(i + 1);
            let term = if i % 2 == 0 { mag * s } else { -mag * s };
            max_term = max_term.max(term.abs());
            last = mag;
            acc.add(term);
        }
        (acc.value(), max_term, last)
    }

    fn estimate(scale: f64, sum: f64, max_term: f64, last: f64, k: usize) -> SeriesValue {
        let rounding = max_term * f64::EPSILON * (k as f64).sqrt() * 4.0;
        SeriesValue {
            value: scale * sum,
            error: scale.abs() * (rounding + last),
        }
    }

    /// Standardized pdf at `z` (distance from the S1 centre over sigma).
    pub fn pdf(&self, z: f64, regime: Regime) -> SeriesValue {
        let side = Self::side(z);
        let k = self.tail_log_coef.len();
        let x = z.abs() / self.lambda;
        match regime {
            Regime::TailSeries => {
                let log_x = -self.alpha * x.ln();
                let (s, m, l) = Self::alternating(&self.tail_log_coef, &self.tail_sin[side], log_x, |_| 1.0);
                Self::estimate(1.0 / (PI * z.abs()), s, m, l, k)
            }
            Regime::CoreSeries => {
                if x == 0.0 {
                    let value = (self.core_log_coef[0]).exp() * self.core_sin[0][0] / (PI * self.lambda);
                    return SeriesValue { value, error: 0.0 };
                }
                let log_x = x.ln();
                let (s, m, l) = Self::alternating(&self.core_log_coef, &self.core_sin[side], log_x, |_| 1.0);
                Self::estimate(1.0 / (PI * self.lambda * x), s, m, l, k)
            }
            Regime::Fallback => SeriesValue {
                value: f64::NAN,
                error: f64::INFINITY,
            },
        }
    }

    /// Standardized `(F(z), 1 - F(z))`; the error estimate applies to both.
    pub fn cdf_pair(&self, z: f64, regime: Regime) -> (SeriesValue, f64) {
        let side = Self::side(z);
        let sg = sign(z);
        let k = self.tail_log_coef.len();
        let x = z.abs() / self.lambda;
        match regime {
            Regime::TailSeries => {
                let log_x = -self.alpha * x.ln();
                let a = self.alpha;
                let (s, m, l) =
                    Self::alternating(&self.tail_log_coef, &self.tail_sin[side], log_x, |i| 1.0 / (i as f64 * a));
                // With (-1)^(i-1) summation the tail mass beyond z is s / pi.
                let t = Self::estimate(1.0 / PI, s, m, l, k);
                if sg > 0.0 {
                    (
                        SeriesValue {
                            value: 1.0 - t.value,
                            error: t.error,
                        },
                        t.value,
                    )
                } else {
                    (t, 1.0 - t.value)
                }
            }
            Regime::CoreSeries => {
                if x == 0.0 {
                    let v = SeriesValue {
                        value: self.core_cdf_const,
                        error: 0.0,
                    };
                    return (v, 1.0 - self.core_cdf_const);
                }
                let (s, m, l) =
                    Self::alternating(&self.core_log_coef, &self.core_sin[side], x.ln(), |i| 1.0 / i as f64);
                let mut v = Self::estimate(sg / PI, s, m, l, k);
                v.value += self.core_cdf_const;
                (v, 1.0 - v.value)
            }
            Regime::Fallback => (
                SeriesValue {
                    value: f64::NAN,
                    error: f64::INFINITY,
                },
                f64::NAN,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_tail_and_centre_regimes() {
        let p = StableParams::new(1.2, 0.9, 1.0, 0.0, Form::S1).unwrap();
        let r = classify_regime(1e6, &p, DEFAULT_TERMS).unwrap();
        assert_eq!(r.regime, Regime::TailSeries);
        let p0 = StableParams::new(1.5, 0.5, 2.0, 1.0, Form::S0).unwrap();
        let r = classify_regime(p0.mu + r_xi(&p0), &p0, DEFAULT_TERMS).unwrap();
        assert_eq!(r.regime, Regime::CoreSeries);
    }

    fn r_xi(p: &StableParams) -> f64 {
        -p.sigma * p.beta * (PI * p.alpha / 2.0).tan()
    }

    #[test]
    fn alpha_one_is_rejected() {
        let p = StableParams::new(1.0, 0.3, 1.0, 0.0, Form::S1).unwrap();
        assert!(matches!(classify_regime(0.0, &p, 150), Err(Error::UnsupportedAlpha(_))));
    }

    #[test]
    fn paper_point_regime() {
        let (tail, core) = thresholds(1.2, 0.9, 150);
        let lam = (1.0 + (0.9 * (0.6 * PI).tan()).powi(2)).powf(1.0 / 2.4);
        let tail_direct = lam * (1.2 * (ln_gamma(181.2) - ln_gamma(181.0)).exp()).powf(1.0 / 1.2) + 1.2;
        let core_direct = lam * 1.2 * (ln_gamma(126.0) - ln_gamma(125.0 + 1.0 / 1.2)).exp() - 1.2;
        assert!((tail - tail_direct).abs() < 1e-12);
        assert!((core - core_direct).abs() < 1e-12);
        let p = StableParams::new(1.2, 0.9, 1.0, 0.0, Form::S1).unwrap();
        let r = classify_regime(2.0, &p, 150).unwrap();
        let expected = if 2.0 >= tail {
            Regime::TailSeries
        } else if 2.0 <= core {
            Regime::CoreSeries
        } else {
            Regime::Fallback
        };
        assert_eq!(r.regime, expected);
        assert_eq!(r.regime, Regime::CoreSeries);
    }
}
