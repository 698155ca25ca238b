//! Fixed-node quadrature against the positive stable mixing law with Laplace
//! transform `exp(-s^a)`, on the axis `u = log p`.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

use super::Standard;

/// Density values below `max - LOG_SPAN` (log scale) are dropped from the grid.
const LOG_SPAN: f64 = 60.0;
const U_MIN: f64 = -60.0;
const MAX_REFINE: usize = 4;

/// Trapezoid nodes `u_i` with log weights `ln(h f_P(e^u) e^u)`.
#[derive(Debug, Clone)]
pub struct MixingGrid {
    alpha_half: f64,
    h: f64,
    u: Vec<f64>,
    log_w: Vec<f64>,
}

impl MixingGrid {
    /// Grid for `alpha_half` in `(0, 1]` with at least `nodes_per_unit`
    /// nodes per unit of `log p`. At `alpha_half = 1` the law is a point
    /// mass at one.
    pub fn new(alpha_half: f64, nodes_per_unit: usize) -> Result<Self> {
        if !(alpha_half > 0.0 && alpha_half <= 1.0) {
            return Err(Error::domain("alpha_half", alpha_half, "(0, 1]"));
        }
        if nodes_per_unit == 0 {
            return Err(Error::InvalidData("quadrature node count must be positive".into()));
        }
        if alpha_half == 1.0 {
            return Ok(MixingGrid {
                alpha_half,
                h: 1.0,
                u: vec![0.0],
                log_w: vec![0.0],
            });
        }
        let density = LogDensity::new(alpha_half);
        let u_max = (36.0 / alpha_half).max(60.0);

        // Coarse scan for the left edge of the support and the mode.
        let coarse: Vec<f64> = (0..)
            .map(|i| U_MIN + 0.25 * i as f64)
            .take_while(|&u| u <= u_max)
            .collect();
        let values = coarse.par_iter().map(|&u| density.eval(u)).collect::<Result<Vec<_>>>()?;
        let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::NumericalFailure("positive stable density vanished on the grid".into()));
        }
        let first = values.iter().position(|&v| v > peak - LOG_SPAN).unwrap_or(0);
        let u_lo = coarse[first.saturating_sub(1)];
        // Width of the bulk guards against a law too narrow for the node count.
        let bulk = values.iter().filter(|&&v| v > peak - 10.0).count() as f64 * 0.25;

        let mut h = (1.0 / nodes_per_unit as f64).min(bulk / 40.0);
        let mut grid = Self::build(&density, alpha_half, u_lo, u_max, h)?;
        for _ in 0..MAX_REFINE {
            if grid.self_check() {
                return Ok(grid);
            }
            h /= 2.0;
            grid = Self::build(&density, alpha_half, u_lo, u_max, h)?;
        }
        if grid.self_check() {
            Ok(grid)
        } else {
            Err(Error::NumericalFailure(format!(
                "mixing grid for alpha/2 = {alpha_half} failed its moment check"
            )))
        }
    }

    /// Equal-weight nodes at Monte-Carlo draws of `P`, for use when the
    /// quadrature grid cannot be built.
    pub fn from_samples(alpha_half: f64, samples: &[f64]) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidData("mixing samples must be positive and finite".into()));
        }
        let lw = -(samples.len() as f64).ln();
        Ok(MixingGrid {
            alpha_half,
            h: 0.0,
            u: samples.iter().map(|p| p.ln()).collect(),
            log_w: vec![lw; samples.len()],
        })
    }

    fn build(density: &LogDensity, alpha_half: f64, u_lo: f64, u_hi: f64, h: f64) -> Result<Self> {
        let n = ((u_hi - u_lo) / h).ceil() as usize + 1;
        let u: Vec<f64> = (0..n).map(|i| u_lo + h * i as f64).collect();
        let log_w = u
            .par_iter()
            .map(|&u| density.eval(u).map(|v| v + h.ln()))
            .collect::<Result<Vec<_>>>()?;
        // Drop the negligible right tail past the cut-off.
        let peak = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let keep = log_w.iter().rposition(|&v| v > peak - 2.0 * LOG_SPAN).map_or(n, |i| i + 1);
        Ok(MixingGrid {
            alpha_half,
            h,
            u: u[..keep].to_vec(),
            log_w: log_w[..keep].to_vec(),
        })
    }

    /// Compares `E[1]` and `E[1/P] = Gamma(1 + 1/a)` with the grid sums.
    fn self_check(&self) -> bool {
        let m = self.log_moments(|_| 0.0, &[0.0, -1.0]);
        let exact = ln_gamma(1.0 + 1.0 / self.alpha_half);
        (m[0].exp() - 1.0).abs() < 1e-8 && (m[1] - exact).abs() < 1e-7
    }

    pub fn alpha_half(&self) -> f64 {
        self.alpha_half
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `ln int p^j k(p) f_P(p) dp` for every `j` in `powers`, with `log_k`
    /// given as a function of `u = log p`.
    pub fn log_moments<K: Fn(f64) -> f64>(&self, log_k: K, powers: &[f64]) -> Vec<f64> {
        let base: Vec<f64> = self.u.iter().zip(&self.log_w).map(|(&u, &w)| w + log_k(u)).collect();
        powers
            .iter()
            .map(|&j| log_sum_exp(self.u.iter().zip(&base).map(|(&u, &b)| b + j * u)))
            .collect()
    }
}

pub(crate) fn log_sum_exp<I: Iterator<Item = f64> + Clone>(terms: I) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln(f_P(e^u) e^u)` through the standard S0 evaluator.
struct LogDensity {
    standard: Standard,
    gamma: f64,
    shift: f64,
}

impl LogDensity {
    fn new(a: f64) -> Self {
        let gamma = (PI * a / 2.0).cos().powf(1.0 / a);
        LogDensity {
            standard: Standard::new(a, 1.0),
            gamma,
            shift: (PI * a / 2.0).tan(),
        }
    }

    fn eval(&self, u: f64) -> Result<f64> {
        let p = u.exp();
        let f = self.standard.pdf(p / self.gamma - self.shift)? / self.gamma;
        Ok(if f > 0.0 { f.ln() + u } else { f64::NEG_INFINITY })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levy_grid_matches_closed_form_moments() {
        let g = MixingGrid::new(0.5, 96).unwrap();
        // E[P^(-2)] = Gamma(1 + 2/a) / Gamma(3).
        let m = g.log_moments(|_| 0.0, &[-2.0]);
        let exact = ln_gamma(5.0) - ln_gamma(3.0);
        assert!((m[0] - exact).abs() < 1e-8);
    }

    #[test]
    fn grids_pass_self_check_across_range() {
        for &a in &[0.15, 0.45, 0.75, 0.95, 0.995] {
            let g = MixingGrid::new(a, 96).unwrap();
            assert!(g.self_check(), "a={a}");
        }
        assert_eq!(MixingGrid::new(1.0, 96).unwrap().len(), 1);
    }
}
