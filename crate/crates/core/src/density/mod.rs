//! Univariate, mixture and elliptical stable densities and log-likelihoods.

mod elliptical;
mod mixing;
mod integral;
pub mod series;

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::params::{EllipticalParams, Form, MixtureSpec, SpecialCase, StableParams};

pub use elliptical::{pdf_elliptical, EllipticalDensity};
pub use mixing::MixingGrid;
pub(crate) use integral::IntegralForm;
pub use series::{classify_regime, Regime, SeriesRegime, DEFAULT_TERMS};
use series::SeriesTables;

/// Densities below this are floored before taking logs.
pub const PDF_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
enum Kind {
    Gaussian,
    Cauchy,
    /// Lévy law, `beta` is +1 or -1.
    Levy(f64),
    Series {
        tables: Box<SeriesTables>,
        integral: IntegralForm,
        zeta: f64,
    },
    /// `alpha = 1`, `beta != 0`.
    Integral(IntegralForm),
}

/// Standard S0(alpha, beta, 1, 0) law with cached evaluation tables.
#[derive(Debug, Clone)]
pub(crate) struct Standard {
    kind: Kind,
}

impl Standard {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let p = StableParams {
            alpha,
            beta,
            sigma: 1.0,
            mu: 0.0,
            form: Form::S0,
        }
        .normalized();
        let kind = match p.special_case() {
            SpecialCase::Gaussian => Kind::Gaussian,
            SpecialCase::Cauchy => Kind::Cauchy,
            SpecialCase::Levy => Kind::Levy(p.beta.signum()),
            _ if p.alpha == 1.0 => Kind::Integral(IntegralForm::new(1.0, p.beta)),
            _ => Kind::Series {
                tables: Box::new(SeriesTables::new(p.alpha, p.beta, DEFAULT_TERMS)),
                integral: IntegralForm::new(p.alpha, p.beta),
                zeta: -p.beta * (PI * p.alpha / 2.0).tan(),
            },
        };
        Standard { kind }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidData("evaluation point is NaN".into()));
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        match &self.kind {
            Kind::Gaussian => Ok((-x * x / 4.0).exp() / (2.0 * PI.sqrt())),
            Kind::Cauchy => Ok(1.0 / (PI * (1.0 + x * x))),
            Kind::Levy(b) => {
                let z = b * x + 1.0;
                if z <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok((-0.5 / z).exp() / ((2.0 * PI).sqrt() * z.powf(1.5)))
                }
            }
            Kind::Series {
                tables,
                integral,
                zeta,
            } => {
                let z = x - zeta;
                let regime = tables.regime(z);
                if regime != Regime::Fallback {
                    let v = tables.pdf(z, regime);
                    if v.trusted() {
                        return Ok(v.value.max(0.0));
                    }
                }
                integral.pdf(x)
            }
            Kind::Integral(integral) => integral.pdf(x),
        }
    }

    /// `(F(x), 1 - F(x))`, each accurate in its own tail.
    pub fn cdf_pair(&self, x: f64) -> Result<(f64, f64)> {
        if x.is_nan() {
            return Err(Error::InvalidData("evaluation point is NaN".into()));
        }
        if x.is_infinite() {
            return Ok(if x > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) });
        }
        match &self.kind {
            Kind::Gaussian => Ok((0.5 * erfc(-x / 2.0), 0.5 * erfc(x / 2.0))),
            Kind::Cauchy => {
                let far = |t: f64| if t > 1.0 { (1.0 / t).atan() / PI } else { 0.5 - t.atan() / PI };
                Ok((far(-x), far(x)))
            }
            Kind::Levy(b) => {
                let z = b * x + 1.0;
                let (below, above) = if z <= 0.0 {
                    (0.0, 1.0)
                } else {
                    let r = (0.5 / z).sqrt();
                    (erfc(r), erf(r))
                };
                Ok(if *b > 0.0 { (below, above) } else { (above, below) })
            }
            Kind::Series {
                tables,
                integral,
                zeta,
            } => {
                let z = x - zeta;
                let regime = tables.regime(z);
                if regime != Regime::Fallback {
                    let (v, c) = tables.cdf_pair(z, regime);
                    if v.trusted() {
                        return Ok((v.value.clamp(0.0, 1.0), c.clamp(0.0, 1.0)));
                    }
                }
                integral.cdf_pair(x)
            }
            Kind::Integral(integral) => integral.cdf_pair(x),
        }
    }
}

/// Evaluator for one univariate stable law; reuse it for many points.
#[derive(Debug, Clone)]
pub struct StableDensity {
    params: StableParams,
    s0: StableParams,
    standard: Standard,
}

impl StableDensity {
    pub fn new(params: &StableParams) -> Result<Self> {
        params.validate()?;
        let params = params.normalized();
        let s0 = params.to_s0();
        Ok(StableDensity {
            params,
            s0,
            standard: Standard::new(s0.alpha, s0.beta),
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    fn standardize(&self, y: f64) -> f64 {
        (y - self.s0.mu) / self.s0.sigma
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.standard.pdf(self.standardize(y))? / self.s0.sigma)
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.0)
    }

    /// `(F(y), 1 - F(y))`.
    pub fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        self.standard.cdf_pair(self.standardize(y))
    }

    /// Densities at every point, evaluated in parallel; order is preserved.
    pub fn pdf_many(&self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.par_iter().map(|&y| self.pdf(y)).collect()
    }

    pub fn loglik(&self, data: &[f64]) -> Result<f64> {
        nonempty(data.len())?;
        Ok(sum_logs(&self.pdf_many(data)?))
    }
}

fn nonempty(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidData("data set is empty".into()))
    } else {
        Ok(())
    }
}

/// Sequential sum of floored logs; fixed order keeps results reproducible.
pub(crate) fn sum_logs(pdfs: &[f64]) -> f64 {
    pdfs.iter().map(|&f| f.max(PDF_FLOOR).ln()).sum()
}

pub fn pdf_univariate(y: f64, params: &StableParams) -> Result<f64> {
    StableDensity::new(params)?.pdf(y)
}

pub fn cdf_univariate(y: f64, params: &StableParams) -> Result<f64> {
    StableDensity::new(params)?.cdf(y)
}

/// Parameters of the positive stable law with Laplace transform `exp(-s^a)`.
pub fn positive_stable_params(alpha_half: f64) -> Result<StableParams> {
    if !(alpha_half > 0.0 && alpha_half < 1.0) {
        return Err(Error::domain("alpha_half", alpha_half, "(0, 1)"));
    }
    let scale = (PI * alpha_half / 2.0).cos().powf(1.0 / alpha_half);
    StableParams::new(alpha_half, 1.0, scale, 0.0, Form::S1)
}

/// Density of the positive stable law with Laplace transform `exp(-s^a)`,
/// `a = alpha_half`.
pub fn pdf_positive_stable(p: f64, alpha_half: f64) -> Result<f64> {
    let params = positive_stable_params(alpha_half)?;
    if p <= 0.0 {
        return Ok(0.0);
    }
    pdf_univariate(p, &params)
}

/// Mixture evaluator holding one [`StableDensity`] per component.
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    weights: Vec<f64>,
    components: Vec<StableDensity>,
}

impl MixtureDensity {
    pub fn new(spec: &MixtureSpec) -> Result<Self> {
        spec.validate()?;
        let components = spec.components.iter().map(StableDensity::new).collect::<Result<_>>()?;
        Ok(MixtureDensity {
            weights: spec.weights.clone(),
            components,
        })
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        let mut total = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            total += w * c.pdf(y)?;
        }
        Ok(total)
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self.cdf_pair(y)?.0)
    }

    pub fn cdf_pair(&self, y: f64) -> Result<(f64, f64)> {
        let (mut lo, mut hi) = (0.0, 0.0);
        for (w, c) in self.weights.iter().zip(&self.components) {
            let (f, s) = c.cdf_pair(y)?;
            lo += w * f;
            hi += w * s;
        }
        Ok((lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
    }

    /// Component densities `f_j(y_i)` as rows `i`.
    pub fn component_pdfs(&self, ys: &[f64]) -> Result<Vec<Vec<f64>>> {
        ys.par_iter()
            .map(|&y| self.components.iter().map(|c| c.pdf(y)).collect())
            .collect()
    }

    pub fn loglik(&self, data: &[f64]) -> Result<f64> {
        nonempty(data.len())?;
        let pdfs: Vec<f64> = data.par_iter().map(|&y| self.pdf(y)).collect::<Result<_>>()?;
        Ok(sum_logs(&pdfs))
    }
}

pub fn pdf_mixture(y: f64, spec: &MixtureSpec) -> Result<f64> {
    MixtureDensity::new(spec)?.pdf(y)
}

pub fn cdf_mixture(y: f64, spec: &MixtureSpec) -> Result<f64> {
    MixtureDensity::new(spec)?.cdf(y)
}

/// A model whose log-likelihood can be evaluated on a data set.
pub trait Likelihood {
    type Data: ?Sized;
    fn loglik(&self, data: &Self::Data) -> Result<f64>;
}

impl Likelihood for StableParams {
    type Data = [f64];
    fn loglik(&self, data: &[f64]) -> Result<f64> {
        StableDensity::new(self)?.loglik(data)
    }
}

impl Likelihood for MixtureSpec {
    type Data = [f64];
    fn loglik(&self, data: &[f64]) -> Result<f64> {
        MixtureDensity::new(self)?.loglik(data)
    }
}

impl Likelihood for EllipticalParams {
    type Data = [nalgebra::DVector<f64>];
    fn loglik(&self, data: &Self::Data) -> Result<f64> {
        nonempty(data.len())?;
        EllipticalDensity::new(self)?.loglik(data)
    }
}

/// `sum_i log pdf(y_i)` with each density floored at [`PDF_FLOOR`].
pub fn loglik<M: Likelihood + ?Sized>(data: &M::Data, model: &M) -> Result<f64> {
    model.loglik(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let g = StableParams::new(2.0, 0.0, 1.0, 0.0, Form::S0).unwrap();
        assert!((pdf_univariate(0.0, &g).unwrap() - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        let c = StableParams::new(1.0, 0.0, 2.0, 3.0, Form::S1).unwrap();
        assert!((pdf_univariate(3.0, &c).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((cdf_univariate(5.0, &c).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn levy_matches_its_closed_form() {
        let p = StableParams::new(0.5, 1.0, 2.0, 1.0, Form::S1).unwrap();
        for &y in &[1.1f64, 2.0, 5.0, 40.0] {
            let d = y - 1.0;
            let f = (2.0 / (2.0 * PI)).sqrt() * (-2.0 / (2.0 * d)).exp() * d.powf(-1.5);
            assert!((pdf_univariate(y, &p).unwrap() - f).abs() < 1e-14);
            let cdf = erfc((2.0 / (2.0 * d)).sqrt());
            assert!((cdf_univariate(y, &p).unwrap() - cdf).abs() < 1e-14);
        }
        assert_eq!(pdf_univariate(0.5, &p).unwrap(), 0.0);
    }

    #[test]
    fn series_and_integral_agree_near_thresholds() {
        for &(a, b) in &[(1.2, 0.9), (0.7, -0.4), (1.7, 0.3), (0.4, 0.8)] {
            let std = Standard::new(a, b);
            let form = IntegralForm::new(a, b);
            let Kind::Series { tables, zeta, .. } = &std.kind else {
                panic!("expected series kind")
            };
            for z in [tables.core_bound * 0.999, tables.tail_bound * 1.001, -tables.tail_bound * 1.001] {
                if z.abs() < 1e-9 {
                    continue;
                }
                let x = z + zeta;
                let s = std.pdf(x).unwrap();
                let i = form.pdf(x).unwrap();
                assert!((s - i).abs() < 1e-8, "a={a} b={b} z={z}: {s} vs {i}");
                let (sf, ss) = std.cdf_pair(x).unwrap();
                let (f, fs) = form.cdf_pair(x).unwrap();
                assert!((sf - f).abs() < 1e-8 && (ss - fs).abs() < 1e-8, "a={a} b={b} z={z}");
            }
        }
    }

    #[test]
    fn positive_stable_support_and_domain() {
        assert_eq!(pdf_positive_stable(-1.0, 0.6).unwrap(), 0.0);
        assert!(matches!(pdf_positive_stable(1.0, 1.0), Err(Error::Domain { .. })));
        assert!(pdf_positive_stable(1.0, 0.6).unwrap() > 0.0);
    }

    #[test]
    fn loglik_is_additive_and_floored() {
        let c = StableParams::new(1.0, 0.0, 1.0, 0.0, Form::S0).unwrap();
        assert!((loglik(&[0.0][..], &c).unwrap() + PI.ln()).abs() < 1e-15);
        let data = [0.3, -2.0, 7.0];
        let doubled = [0.3, -2.0, 7.0, 0.3, -2.0, 7.0];
        assert!((loglik(&doubled[..], &c).unwrap() - 2.0 * loglik(&data[..], &c).unwrap()).abs() < 1e-12);
        let levy = StableParams::new(0.5, 1.0, 1.0, 0.0, Form::S1).unwrap();
        assert_eq!(loglik(&[-1.0][..], &levy).unwrap(), PDF_FLOOR.ln());
        assert!(loglik(&[][..], &c).is_err());
    }
}

