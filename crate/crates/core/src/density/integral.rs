//! Non-oscillatory integral representation of the standard S0 stable pdf and
//! cdf, used wherever neither series is trusted. The integrand is evaluated
//! in log space and the domain is split where it peaks.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{find_root, integrate, integrate_best, QuadratureSpec};

const LEVELS: [f64; 9] = [-40.0, -25.0, -12.0, -6.0, -2.0, 0.0, 1.5, 3.0, 5.0];

const SPEC: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-300,
    rel_tol: 1e-11,
    max_subdivisions: 400,
};
/// Retried when the tight tolerance sits below the rounding floor.
const LOOSE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-300,
    rel_tol: 1e-9,
    max_subdivisions: 2000,
};

/// Worst relative error accepted from the retry.
const ACCEPT: f64 = 1e-7;

fn integrate_robust<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
    if let Ok(v) = integrate(&f, lo, hi, breaks, &SPEC) {
        return Ok(v.value);
    }
    let v = integrate_best(&f, lo, hi, breaks, &LOOSE)?;
    if v.error <= ACCEPT * v.value.abs() {
        Ok(v.value)
    } else {
        Err(Error::NumericalFailure(format!(
            "quadrature did not converge: estimate {:e}, error {:e}",
            v.value, v.error
        )))
    }
}

/// Standard S0(alpha, beta, 1, 0) law; `beta` is mirrored as needed so that
/// every evaluation happens on the right of the mode reference point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct IntegralForm {
    alpha: f64,
    beta: f64,
}

/// Log of the integrand kernel `g(theta)` for one evaluation point.
struct Kernel {
    lo: f64,
    hi: f64,
    log_g: Box<dyn Fn(f64) -> f64>,
    /// Locate breaks on a log axis; set when `lo = 0` and the peak may sit
    /// many decades below `hi`.
    log_axis: bool,
}

impl Kernel {
    /// Points where `log g` crosses each of `LEVELS`; `log g` is monotone in
    /// `theta`, so these bracket the region where the integrands vary.
    fn breaks(&self) -> Vec<f64> {
        let width = self.hi - self.lo;
        let b = self.hi - 1e-13 * width;
        let (a, map): (f64, fn(f64) -> f64) = if self.log_axis {
            (1e-300f64.ln(), f64::exp)
        } else {
            (self.lo + 1e-13 * width, |t| t)
        };
        let b = if self.log_axis { b.ln() } else { b };
        let tol = if self.log_axis { 1e-13 } else { 1e-14 * width };
        let (fa, fb) = ((self.log_g)(map(a)), (self.log_g)(map(b)));
        if fa.is_nan() || fb.is_nan() {
            return Vec::new();
        }
        LEVELS
            .iter()
            .filter(|&&c| (fa - c).signum() != (fb - c).signum())
            .filter_map(|&c| {
                let f = |t: f64| {
                    let v = (self.log_g)(map(t));
                    if v.is_nan() {
                        0.0
                    } else {
                        v.clamp(-1e300, 1e300) - c
                    }
                };
                find_root(f, a, b, tol, 300).ok().map(map)
            })
            .collect()
    }

    /// `int g exp(-g)`, `int exp(-g)` and `int (1 - exp(-g))`.
    fn integrals(&self, want: Want) -> Result<f64> {
        let breaks = self.breaks();
        let lg = &self.log_g;
        let value = match want {
            Want::Density => integrate_robust(
                |t| {
                    let l = lg(t);
                    if l.is_nan() || l > 700.0 {
                        0.0
                    } else {
                        (l - l.exp()).exp()
                    }
                },
                self.lo,
                self.hi,
                &breaks,
            )?,
            Want::Lower => integrate_robust(
                |t| {
                    let l = lg(t);
                    if l.is_nan() || l > 700.0 {
                        0.0
                    } else {
                        (-l.exp()).exp()
                    }
                },
                self.lo,
                self.hi,
                &breaks,
            )?,
            Want::Upper => integrate_robust(
                |t| {
                    let l = lg(t);
                    if l.is_nan() {
                        0.0
                    } else if l > 700.0 {
                        1.0
                    } else {
                        -(-l.exp()).exp_m1()
                    }
                },
                self.lo,
                self.hi,
                &breaks,
            )?,
        };
        Ok(value)
    }
}

#[derive(Clone, Copy)]
enum Want {
    Density,
    Lower,
    Upper,
}

impl IntegralForm {
    pub fn new(alpha: f64, beta: f64) -> Self {
        IntegralForm { alpha, beta }
    }

    fn zeta(&self) -> f64 {
        -self.beta * (PI * self.alpha / 2.0).tan()
    }

    fn theta0(&self) -> f64 {
        (self.beta * (PI * self.alpha / 2.0).tan()).atan() / self.alpha
    }

    fn mirrored(&self) -> Self {
        IntegralForm {
            alpha: self.alpha,
            beta: -self.beta,
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.alpha == 1.0 {
            return self.pdf_alpha_one(x);
        }
        let zeta = self.zeta();
        if x < zeta {
            return self.mirrored().pdf(-x);
        }
        let a = self.alpha;
        let xz = x - zeta;
        let theta0 = self.theta0();
        if xz <= 1e-12 * (1.0 + zeta.abs()) {
            return Ok(gamma(1.0 + 1.0 / a) * theta0.cos() / (PI * (1.0 + zeta * zeta).powf(1.0 / (2.0 * a))));
        }
        let kernel = self.kernel(xz);
        let i = kernel.integrals(Want::Density)?;
        Ok((a / (PI * (a - 1.0).abs() * xz) * i).max(0.0))
    }

    /// `(F(x), 1 - F(x))`, each computed without cancellation.
    pub fn cdf_pair(&self, x: f64) -> Result<(f64, f64)> {
        if self.alpha == 1.0 {
            return self.cdf_pair_alpha_one(x);
        }
        let zeta = self.zeta();
        if x < zeta {
            let (f, s) = self.mirrored().cdf_pair(-x)?;
            return Ok((s, f));
        }
        let a = self.alpha;
        let theta0 = self.theta0();
        let xz = x - zeta;
        let below = (FRAC_PI_2 - theta0) / PI;
        if xz <= 1e-12 * (1.0 + zeta.abs()) {
            return Ok((below, 1.0 - below));
        }
        let kernel = self.kernel(xz);
        if a > 1.0 {
            let j = kernel.integrals(Want::Lower)? / PI;
            Ok(((1.0 - j).clamp(0.0, 1.0), j.clamp(0.0, 1.0)))
        } else {
            let j = kernel.integrals(Want::Upper)? / PI;
            Ok(((1.0 - j).clamp(0.0, 1.0), j.clamp(0.0, 1.0)))
        }
    }

    fn kernel(&self, xz: f64) -> Kernel {
        let a = self.alpha;
        let theta0 = self.theta0();
        let am1 = a - 1.0;
        let lead = (a / am1) * xz.ln() + (a * theta0).cos().ln() / am1;
        let log_g = move |t: f64| {
            let c = t.cos();
            let s = (a * (theta0 + t)).sin();
            let tail = (a * theta0 + am1 * t).cos();
            if c <= 0.0 || s <= 0.0 || tail <= 0.0 {
                return f64::NAN;
            }
            lead + (a / am1) * (c.ln() - s.ln()) + tail.ln() - c.ln()
        };
        Kernel {
            lo: -theta0,
            hi: FRAC_PI_2,
            log_g: Box::new(log_g),
            log_axis: false,
        }
    }

    /// The two halves `t < 0` and `t > 0` of the kernel, each written in the
    /// distance `e` from its endpoint `-+pi/2` so that the narrow peak of a far
    /// tail is resolved without rounding in `tan t`.
    fn kernel_alpha_one(&self, x: f64) -> [Kernel; 2] {
        let b = self.beta;
        let shift = -PI * x / (2.0 * b) + FRAC_2_PI.ln();
        let half = |side: f64| {
            // t = side * (pi/2 - e), cos t = sin e, tan t = side * cot e.
            let log_g = move |e: f64| {
                let c = e.sin();
                let lin = (1.0 + side * b) * FRAC_PI_2 - side * b * e;
                if c <= 0.0 || lin <= 0.0 {
                    return f64::NAN;
                }
                shift + lin.ln() - c.ln() + side * lin * e.cos() / (c * b)
            };
            Kernel {
                lo: 0.0,
                hi: FRAC_PI_2,
                log_g: Box::new(log_g),
                log_axis: true,
            }
        };
        [half(-1.0), half(1.0)]
    }

    fn pdf_alpha_one(&self, x: f64) -> Result<f64> {
        if self.beta == 0.0 {
            return Ok(1.0 / (PI * (1.0 + x * x)));
        }
        if self.beta < 0.0 {
            return self.mirrored().pdf_alpha_one(-x);
        }
        let [l, r] = self.kernel_alpha_one(x);
        let i = l.integrals(Want::Density)? + r.integrals(Want::Density)?;
        Ok((i / (2.0 * self.beta)).max(0.0))
    }

    fn cdf_pair_alpha_one(&self, x: f64) -> Result<(f64, f64)> {
        if self.beta == 0.0 {
            let f = 0.5 + x.atan() / PI;
            return Ok((f, 0.5 - x.atan() / PI));
        }
        if self.beta < 0.0 {
            let (f, s) = self.mirrored().cdf_pair_alpha_one(-x)?;
            return Ok((s, f));
        }
        let [l, r] = self.kernel_alpha_one(x);
        let lower = (l.integrals(Want::Lower)? + r.integrals(Want::Lower)?) / PI;
        let upper = (l.integrals(Want::Upper)? + r.integrals(Want::Upper)?) / PI;
        Ok((lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_and_gaussian_limits() {
        let c = IntegralForm::new(1.0, 0.0);
        assert!((c.pdf(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        // Symmetric alpha close to 2 approaches N(0, 2).
        let g = IntegralForm::new(1.999, 0.0);
        let expected = (-(1.0f64) / 4.0).exp() / (2.0 * PI.sqrt());
        assert!((g.pdf(1.0).unwrap() - expected).abs() < 2e-3);
    }

    #[test]
    fn cdf_pair_sums_to_one() {
        for &(a, b) in &[(1.5, 0.5), (0.7, 0.3), (0.7, -0.9), (1.0, 0.6), (1.0, -0.6), (1.9, -0.9)] {
            let form = IntegralForm::new(a, b);
            for &x in &[-4.0, -1.0, -0.1, 0.2, 1.3, 6.0] {
                let (f, s) = form.cdf_pair(x).unwrap();
                assert!((f + s - 1.0).abs() < 1e-9, "a={a} b={b} x={x}");
            }
        }
    }
}
