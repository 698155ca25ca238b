//! E-step machinery: posterior moments of the latent variables of the
//! Gaussian scale-mixture representations.

use std::f64::consts::{FRAC_2_PI, PI};

use rayon::prelude::*;

use crate::density::{MixingGrid, Standard};
use crate::error::{Error, Result};
use crate::params::StableParams;
use crate::quad::{integrate, QuadratureSpec};
use crate::simulate::{rstable_positive, RngStream};

use super::{EmConfig, PosteriorWeights};

/// Stream reserved for Monte-Carlo mixing draws.
const MC_STREAM: u64 = 0x6d63;

/// Quadrature grid for the positive stable law of index `a`, with a Monte
/// Carlo grid when the deterministic one cannot be built.
pub(crate) fn mixing_grid(a: f64, cfg: &EmConfig) -> Result<MixingGrid> {
    MixingGrid::new(a, cfg.quad_nodes).or_else(|_| {
        let draws = rstable_positive(cfg.mc_fallback_draws, a, &RngStream::new(cfg.seed, MC_STREAM))?;
        MixingGrid::from_samples(a, &draws)
    })
}
const LN_FLOOR: f64 = -745.0;

/// Standardized symmetric kernel `S = sqrt(2P) N`, `S ~ S(alpha, 0, 1, 0)`.
#[derive(Debug, Clone)]
pub enum SymmetricKernel {
    Gaussian,
    /// `alpha = 1`: the mixing law is Lévy and the posterior of `1/P` is a
    /// gamma law, so every moment is closed form.
    Cauchy,
    Grid(MixingGrid),
}

impl SymmetricKernel {
    pub fn new(alpha: f64, cfg: &EmConfig) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain("alpha", alpha, "(0, 2]"));
        }
        if alpha == 2.0 {
            return Ok(SymmetricKernel::Gaussian);
        }
        if alpha == 1.0 {
            return Ok(SymmetricKernel::Cauchy);
        }
        Self::quadrature(alpha, cfg)
    }

    /// Always uses the quadrature grid (with the Monte-Carlo fallback),
    /// even where a closed form exists.
    pub fn quadrature(alpha: f64, cfg: &EmConfig) -> Result<Self> {
        Ok(SymmetricKernel::Grid(mixing_grid(alpha / 2.0, cfg)?))
    }

    /// `(ln f(r), ln g(r))` where `f` is the density of `S` and
    /// `g(r) = int p^{-1} phi(r; 0, 2p) f_P(p) dp`.
    pub fn log_pair(&self, r: f64) -> (f64, f64) {
        let r2 = r * r;
        match self {
            SymmetricKernel::Gaussian => {
                let f = -0.25 * r2 - 0.5 * (4.0 * PI).ln();
                (f, f)
            }
            SymmetricKernel::Cauchy => {
                let f = -(PI * (1.0 + r2)).ln();
                (f, f + (4.0 / (1.0 + r2)).ln())
            }
            SymmetricKernel::Grid(g) => {
                let c = -0.5 * (4.0 * PI).ln();
                let m = g.log_moments(|u| -0.5 * u - 0.25 * r2 * (-u).exp(), &[0.0, -1.0]);
                (c + m[0], c + m[1])
            }
        }
    }

    /// `E[1/P | S = r]`.
    pub fn weight(&self, r: f64) -> f64 {
        let (f, g) = self.log_pair(r);
        (g - f).exp()
    }
}

/// Posterior weights `E[1/P | y_i]` under a symmetric stable law.
pub fn estep_weights(data: &[f64], params: &StableParams) -> Result<PosteriorWeights> {
    estep_weights_with(data, params, &EmConfig::default())
}

pub(crate) fn estep_weights_with(data: &[f64], params: &StableParams, cfg: &EmConfig) -> Result<PosteriorWeights> {
    params.validate()?;
    let p = params.normalized();
    if p.beta != 0.0 {
        return Err(Error::domain("beta", p.beta, "0 (symmetric law)"));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("observation {i} is not finite")));
    }
    let kernel = SymmetricKernel::new(p.alpha, cfg)?;
    let w: Vec<f64> = data.par_iter().map(|&y| kernel.weight((y - p.mu) / p.sigma)).collect();
    if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NumericalFailure("posterior weight is not positive and finite".into()));
    }
    Ok(PosteriorWeights { w, tau: None })
}

/// Coefficients of `Y = sigma [a1 sqrt(2P) N + a2 V + c3] + mu` for
/// `Y ~ S0(alpha, beta, sigma, mu)` with `V ~ S0(alpha, 1, 1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SkewCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub c3: f64,
}

impl SkewCoefficients {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let b = beta.abs();
        let a1 = (1.0 - b).powf(1.0 / alpha);
        let a2 = beta.signum() * b.powf(1.0 / alpha);
        let c3 = if beta == 0.0 {
            0.0
        } else if alpha == 1.0 {
            FRAC_2_PI * beta * b.ln()
        } else {
            (PI * alpha / 2.0).tan() * (a2 - beta)
        };
        SkewCoefficients {
            a1,
            a2: if beta == 0.0 { 0.0 } else { a2 },
            c3,
        }
    }
}

/// Log-density table on the axis `s = asinh(x / kappa)`, linearly
/// interpolated and extrapolated in `s`.
#[derive(Debug, Clone)]
struct LogTable {
    kappa: f64,
    h: f64,
    s0: f64,
    values: Vec<f64>,
}

const TABLE_KAPPA: f64 = 0.5;
const TABLE_STEP: f64 = 0.02;
const TABLE_REACH: f64 = 1e9;

impl LogTable {
    fn nodes(symmetric: bool) -> (f64, Vec<f64>) {
        let s_max = (TABLE_REACH / TABLE_KAPPA).asinh();
        let s0 = if symmetric { 0.0 } else { -s_max };
        let n = ((s_max - s0) / TABLE_STEP).ceil() as usize + 1;
        (s0, (0..n).map(|i| TABLE_KAPPA * (s0 + TABLE_STEP * i as f64).sinh()).collect())
    }

    fn from_values(s0: f64, values: Vec<f64>) -> Self {
        LogTable {
            kappa: TABLE_KAPPA,
            h: TABLE_STEP,
            s0,
            values: values.into_iter().map(|v| v.max(LN_FLOOR)).collect(),
        }
    }

    fn build<F: Fn(f64) -> Result<f64> + Sync>(f: F, symmetric: bool) -> Result<Self> {
        let (s0, xs) = Self::nodes(symmetric);
        let values = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_values(s0, values))
    }

    /// Two tables on the symmetric half-axis from one pass of `f`.
    fn build_pair<F: Fn(f64) -> (f64, f64) + Sync>(f: F) -> (Self, Self) {
        let (s0, xs) = Self::nodes(true);
        let (a, b): (Vec<f64>, Vec<f64>) = xs.par_iter().map(|&x| f(x)).unzip();
        (Self::from_values(s0, a), Self::from_values(s0, b))
    }

    /// Catmull-Rom interpolation, linear beyond the ends.
    fn eval(&self, x: f64) -> f64 {
        let pos = ((x / self.kappa).asinh() - self.s0) / self.h;
        let n = self.values.len();
        let y = &self.values;
        let v = if pos <= 1.0 || pos >= (n - 2) as f64 {
            let i = if pos <= 1.0 { 0 } else { n - 2 };
            y[i] + (pos - i as f64) * (y[i + 1] - y[i])
        } else {
            let i = pos.floor() as usize;
            let t = pos - i as f64;
            let (p0, p1, p2, p3) = (y[i - 1], y[i], y[i + 1], y[i + 2]);
            if p0.min(p3) <= LN_FLOOR {
                // Edge of the support: the cubic would overshoot the cliff.
                return (p1 + t * (p2 - p1)).max(LN_FLOOR);
            }
            p1 + 0.5
                * t
                * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
        };
        v.max(LN_FLOOR)
    }
}

fn ln_pdf(std: &Standard, x: f64) -> Result<f64> {
    let f = std.pdf(x)?;
    Ok(if f > 0.0 { f.ln() } else { LN_FLOOR })
}

/// Posterior moments `E[1/P | y]` and `E[V/P | y]` under the skewed
/// representation.
#[derive(Debug, Clone)]
pub(crate) struct SkewKernel {
    coef: SkewCoefficients,
    sym: SymmetricKernel,
    tables: Option<(LogTable, LogTable, LogTable)>,
}

const SKEW_SPEC: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-300,
    rel_tol: 1e-8,
    max_subdivisions: 1000,
};

impl SkewKernel {
    pub fn new(alpha: f64, beta: f64, cfg: &EmConfig) -> Result<Self> {
        let beta = if alpha == 2.0 { 0.0 } else { beta };
        let coef = SkewCoefficients::new(alpha, beta);
        let sym = SymmetricKernel::new(alpha, cfg)?;
        if beta == 0.0 {
            return Ok(SkewKernel { coef, sym, tables: None });
        }
        let (fs, gs) = LogTable::build_pair(|r| sym.log_pair(r));
        let v = Standard::new(alpha, 1.0);
        let fv = LogTable::build(|x| ln_pdf(&v, x), false)?;
        Ok(SkewKernel {
            coef,
            sym,
            tables: Some((fs, gs, fv)),
        })
    }

    pub fn coefficients(&self) -> SkewCoefficients {
        self.coef
    }

    /// Posterior moments at the standardized residual
    /// `t = (y - mu) / sigma - c3`.
    pub fn posterior(&self, t: f64) -> Result<SkewPosterior> {
        let SkewCoefficients { a1, a2, .. } = self.coef;
        let Some((fs, gs, fv)) = &self.tables else {
            let (f, g) = self.sym.log_pair(t);
            return Ok(SkewPosterior {
                w: (g - f).exp(),
                wv: 0.0,
                log_density: f,
            });
        };
        if a1 == 0.0 {
            // No Gaussian part: P is not identified by the data.
            return Err(Error::domain("beta", a2.signum(), "(-1, 1) for the E-step"));
        }
        // Integrate over whichever latent variable carries the narrower factor.
        let over_v = a1 >= a2.abs();
        let (c1, k1) = if over_v {
            (t / a2, 0.5 * a1 / a2.abs())
        } else {
            (t / a1, 0.5 * a2.abs() / a1)
        };
        // Each node x maps to (log f_s, log g_s, log f_V, v).
        let eval = |x: f64| -> (f64, f64, f64, f64) {
            if over_v {
                let r = ((t - a2 * x) / a1).abs();
                (fs.eval(r), gs.eval(r), fv.eval(x), x)
            } else {
                let v = (t - a1 * x) / a2;
                (fs.eval(x.abs()), gs.eval(x.abs()), fv.eval(v), v)
            }
        };
        let at = |x: f64| {
            let (a, _, c, _) = eval(x);
            a + c
        };
        let shift = at(0.0).max(at(c1));
        let f = |x: f64| {
            let (a, _, c, _) = eval(x);
            (a + c - shift).exp()
        };
        let g0 = |x: f64| {
            let (_, b, c, _) = eval(x);
            (b + c - shift).exp()
        };
        let g1 = |x: f64| {
            let (_, b, c, v) = eval(x);
            v * (b + c - shift).exp()
        };
        let denom = two_centre(f, c1, k1, &SKEW_SPEC)?;
        let m0 = two_centre(g0, c1, k1, &SKEW_SPEC)?;
        let spec1 = QuadratureSpec {
            abs_tol: 1e-10 * m0 * (1.0 + c1.abs().min(1e6)),
            ..SKEW_SPEC
        };
        let m1 = two_centre(g1, c1, k1, &spec1)?;
        if !(denom > 0.0 && m0 > 0.0) {
            return Err(Error::NumericalFailure(format!("skewed E-step integral vanished at t = {t}")));
        }
        let jacobian = if over_v { a1 } else { a2.abs() };
        Ok(SkewPosterior {
            w: m0 / denom,
            wv: m1 / denom,
            log_density: denom.ln() + shift - jacobian.ln(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SkewPosterior {
    /// `E[W | t]` with `W = 1/P`.
    pub w: f64,
    /// `E[W V | t]`.
    pub wv: f64,
    /// Log density of the standard S0(alpha, beta) law at `t + c3`.
    pub log_density: f64,
}

/// `int f(x) dx` over the real line for an integrand with one peak of unit
/// width at zero and another of width `2 k1` at `c1`; each half-line around
/// a peak is integrated on its own `asinh` axis.
fn two_centre<F: Fn(f64) -> f64>(f: F, c1: f64, k1: f64, spec: &QuadratureSpec) -> Result<f64> {
    let k0 = 0.5;
    let piece = |c: f64, k: f64, lo: f64, hi: f64| -> Result<f64> {
        let s_lo = ((lo - c) / k).asinh();
        let s_hi = ((hi - c) / k).asinh();
        Ok(integrate(
            |s| {
                let v = f(c + k * s.sinh()) * k * s.cosh();
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            s_lo,
            s_hi,
            &[0.0],
            spec,
        )?
        .value)
    };
    let reach = TABLE_REACH * (1.0 + c1.abs()).max(k1);
    if (c1 / (k0 + k1)).abs() < 1.0 {
        // Peaks overlap: one axis on the wider scale suffices, with a break at c1.
        let k = k0.min(k1);
        let c = 0.5 * c1;
        return Ok(piece(c, k, -reach, c)? + piece(c, k, c, reach)?);
    }
    // Split at the point weighted towards the narrower peak.
    let mid = (c1 * k0) / (k0 + k1);
    if c1 > 0.0 {
        Ok(piece(0.0, k0, -reach, mid)? + piece(c1, k1, mid, reach)?)
    } else {
        Ok(piece(c1, k1, -reach, mid)? + piece(0.0, k0, mid, reach)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_weights_match_closed_form() {
        let cfg = EmConfig::default();
        let grid = SymmetricKernel::quadrature(1.0, &cfg).unwrap();
        let exact = SymmetricKernel::new(1.0, &cfg).unwrap();
        for &r in &[0.0, 0.3, 1.0, 4.0, 30.0, 1e3] {
            let w = grid.weight(r);
            assert!((w - 4.0 / (1.0 + r * r)).abs() < 1e-7 * w, "r={r} w={w}");
            assert!((exact.weight(r) - 4.0 / (1.0 + r * r)).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_density_from_kernel_matches_density_module() {
        let cfg = EmConfig::default();
        for &a in &[0.5, 1.3, 1.9] {
            let k = SymmetricKernel::new(a, &cfg).unwrap();
            let s = Standard::new(a, 0.0);
            for &r in &[0.0, 0.7, 3.0, 50.0] {
                let f = k.log_pair(r).0.exp();
                let e = s.pdf(r).unwrap();
                assert!((f - e).abs() < 1e-8 * e, "a={a} r={r}");
            }
        }
    }

    #[test]
    fn skew_coefficients_reduce_to_symmetric() {
        let c = SkewCoefficients::new(1.4, 0.0);
        assert_eq!((c.a1, c.a2, c.c3), (1.0, 0.0, 0.0));
        let c = SkewCoefficients::new(1.0, -1.0);
        assert_eq!((c.a1, c.a2, c.c3), (0.0, -1.0, 0.0));
    }

    #[test]
    fn skewed_denominator_is_the_density() {
        // With W replaced by one the integral is the S0 density itself.
        let cfg = EmConfig::default();
        for &(a, b) in &[(1.5, 0.5), (1.0, -0.7), (0.8, 0.9), (1.8, -0.95)] {
            let k = SkewKernel::new(a, b, &cfg).unwrap();
            let c = k.coefficients();
            let s = Standard::new(a, b);
            for &y in &[-3.0, 0.0, 0.4, 2.5, 40.0] {
                let post = k.posterior(y - c.c3).unwrap();
                assert!(post.w > 0.0 && post.w.is_finite());
                let e = s.pdf(y).unwrap();
                let f = post.log_density.exp();
                assert!((f - e).abs() < 1e-5 * e, "a={a} b={b} y={y}: {f} vs {e}");
            }
        }
    }
}
