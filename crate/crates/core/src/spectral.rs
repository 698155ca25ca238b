//! Tail-index estimation from the empirical characteristic function and
//! discrete spectral measure estimation for bivariate strictly stable data.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::chf::ecf;
use crate::error::{Error, Result};
use crate::params::{circle_anchors, SpectralMeasure};

const ECF_CEILING: f64 = 1.0 - 1e-10;
const MAX_CONDITION: f64 = 1e12;

/// Non-negative least squares problem `min |A x - b|, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl NnlsProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let p = NnlsProblem { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.nrows() == 0 || self.a.ncols() == 0 {
            return Err(Error::InvalidData("design matrix must be non-empty".into()));
        }
        if self.a.nrows() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.nrows(),
                got: self.b.len(),
            });
        }
        if self.a.iter().chain(self.b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("problem entries must be finite".into()));
        }
        Ok(())
    }

    /// `A^T (A x - b)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }

    /// Largest violation of the optimality conditions at `x`.
    pub fn kkt_residual(&self, x: &DVector<f64>) -> f64 {
        let g = self.gradient(x);
        x.iter()
            .zip(g.iter())
            .map(|(&xi, &gi)| if xi > 0.0 { gi.abs() } else { (-gi).max(0.0) })
            .chain(x.iter().map(|&xi| (-xi).max(0.0)))
            .fold(0.0, f64::max)
    }
}

/// Least squares restricted to the columns in `set`.
fn restricted_ls(a: &DMatrix<f64>, b: &DVector<f64>, set: &[usize]) -> Result<DVector<f64>> {
    let sub = a.select_columns(set);
    sub.svd(true, true)
        .solve(b, 1e-14)
        .map_err(|e| Error::NumericalFailure(format!("least squares solve failed: {e}")))
}

/// Lawson-Hanson active set method.
pub fn nnls_solve(problem: &NnlsProblem) -> Result<DVector<f64>> {
    problem.validate()?;
    let (a, b) = (&problem.a, &problem.b);
    let m = a.ncols();
    let scale = a.amax().max(1e-300) * b.amax().max(a.amax()).max(1e-300);
    let tol = 1e-13 * scale.max(1.0) * (a.nrows().max(m) as f64);
    let max_outer = 3 * m + 30;

    let mut x = DVector::zeros(m);
    let mut passive = vec![false; m];
    for _ in 0..max_outer {
        let w = -problem.gradient(&x);
        let candidate = (0..m).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate.filter(|&j| w[j] > tol) else {
            return Ok(x);
        };
        passive[j] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 3 * m + 30 {
                return Err(Error::MaxIterations(max_outer));
            }
            let set: Vec<usize> = (0..m).filter(|&k| passive[k]).collect();
            let z = restricted_ls(a, b, &set)?;
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (&k, &v) in set.iter().zip(z.iter()) {
                    x[k] = v;
                }
                break;
            }
            // Step towards z until the first passive coordinate hits zero.
            let mut step = 1.0f64;
            for (&k, &v) in set.iter().zip(z.iter()) {
                if v <= 0.0 {
                    step = step.min(x[k] / (x[k] - v));
                }
            }
            for (&k, &v) in set.iter().zip(z.iter()) {
                x[k] += step * (v - x[k]);
                if x[k] <= tol.min(1e-15) {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::MaxIterations(max_outer))
}

/// Directions and ECF arguments for the projection estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionGrid {
    pub directions: Vec<[f64; 2]>,
    pub ecf_points: Vec<f64>,
}

impl Default for ProjectionGrid {
    fn default() -> Self {
        let directions = (0..16)
            .map(|k| {
                let a = PI * k as f64 / 16.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let ecf_points = (0..10).map(|l| 0.1 * 10f64.powf(l as f64 / 9.0)).collect();
        ProjectionGrid { directions, ecf_points }
    }
}

impl ProjectionGrid {
    pub fn validate(&self) -> Result<()> {
        if self.directions.is_empty() || self.ecf_points.len() < 2 {
            return Err(Error::InvalidData("grid needs directions and at least two ECF points".into()));
        }
        if self.ecf_points.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return Err(Error::InvalidData("ECF points must be positive".into()));
        }
        for (i, d) in self.directions.iter().enumerate() {
            if ((d[0] * d[0] + d[1] * d[1]).sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidData(format!("direction {i} is not a unit vector")));
            }
            if self.directions[..i].iter().any(|e| e == d) {
                return Err(Error::InvalidData(format!("direction {i} is repeated")));
            }
        }
        Ok(())
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_abs(data: &[f64]) -> f64 {
    let mut v: Vec<f64> = data.iter().map(|x| x.abs()).collect();
    median(&mut v)
}

/// Tail index and scale of zero-location symmetric data on the default grid.
pub fn estimate_symmetric_ecf(data: &[f64]) -> Result<(f64, f64)> {
    estimate_symmetric_ecf_on(data, &ProjectionGrid::default().ecf_points)
}

/// Regresses `log(-log|phi(u)|)` on `log u`. The grid is expressed in units
/// of the median absolute observation, so the estimator is scale-equivariant.
pub fn estimate_symmetric_ecf_on(data: &[f64], points: &[f64]) -> Result<(f64, f64)> {
    if data.len() < 50 {
        return Err(Error::InvalidData(format!("need at least 50 observations, got {}", data.len())));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("data contain non-finite values".into()));
    }
    let c = median_abs(data);
    if !(c > 0.0) {
        return Err(Error::DegenerateEcf("median absolute observation is zero".into()));
    }
    let mut us = points.to_vec();
    for attempt in 0..2 {
        let mods: Vec<f64> = us.iter().map(|&u| ecf(u / c, data).norm()).collect();
        if mods.iter().all(|&m| m < ECF_CEILING && m > 0.0) {
            let xs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
            let ys: Vec<f64> = mods.iter().map(|m| (-m.ln()).ln()).collect();
            let (slope, intercept) = ols(&xs, &ys);
            let alpha = slope.clamp(1e-3, 2.0);
            let sigma = c * (intercept / alpha).exp();
            return Ok((alpha, sigma));
        }
        if attempt == 0 {
            // Move the grid away from whichever end degenerated.
            let factor = if mods.iter().any(|&m| m >= ECF_CEILING) { 10.0 } else { 0.1 };
            us.iter_mut().for_each(|u| *u *= factor);
        }
    }
    Err(Error::DegenerateEcf("ECF modulus is 0 or 1 on the grid".into()))
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

struct DirectionFit {
    alpha: Option<f64>,
    /// Median absolute projection, zero for degenerate directions.
    c: f64,
}

/// Spectral measure on `m` equally spaced anchors of the unit circle.
pub fn estimate_spectral_measure(data: &DMatrix<f64>, m: usize) -> Result<SpectralMeasure> {
    estimate_spectral_measure_on(data, m, &ProjectionGrid::default())
}

pub fn estimate_spectral_measure_on(data: &DMatrix<f64>, m: usize, grid: &ProjectionGrid) -> Result<SpectralMeasure> {
    grid.validate()?;
    if data.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: data.ncols(),
        });
    }
    if data.nrows() < 200 {
        return Err(Error::InvalidData(format!("need at least 200 observations, got {}", data.nrows())));
    }
    if m < 2 {
        return Err(Error::InvalidData("need at least two spectral masses".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("data contain non-finite values".into()));
    }

    let projections: Vec<Vec<f64>> = grid
        .directions
        .iter()
        .map(|t| data.row_iter().map(|r| t[0] * r[0] + t[1] * r[1]).collect())
        .collect();
    let fits = projections
        .par_iter()
        .map(|proj| {
            let c = median_abs(proj);
            if c == 0.0 {
                return Ok(DirectionFit { alpha: None, c });
            }
            let (alpha, _) = estimate_symmetric_ecf_on(proj, &grid.ecf_points)?;
            Ok(DirectionFit { alpha: Some(alpha), c })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut alphas: Vec<f64> = fits.iter().filter_map(|f| f.alpha).collect();
    if alphas.is_empty() {
        return Err(Error::RankDeficientData);
    }
    let alpha = median(&mut alphas).min(2.0 - 1e-6);
    if (alpha - 1.0).abs() < 1e-9 {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    let tan = (PI * alpha / 2.0).tan();
    let anchors = circle_anchors(m);

    // Rows: |log phi| and arg phi per direction, both linear in the masses.
    let k = grid.directions.len();
    let mut a = DMatrix::zeros(2 * k, m);
    let mut b = DVector::zeros(2 * k);
    for (i, (t, fit)) in grid.directions.iter().zip(&fits).enumerate() {
        for (j, s) in anchors.iter().enumerate() {
            let pr = t[0] * s[0] + t[1] * s[1];
            let mag = pr.abs().powf(alpha);
            a[(i, j)] = mag;
            a[(k + i, j)] = mag * pr.signum();
        }
        if fit.c == 0.0 {
            continue;
        }
        let (mut num_re, mut num_im, mut den) = (0.0, 0.0, 0.0);
        for &u in &grid.ecf_points {
            let v = u / fit.c;
            let phi = ecf(v, &projections[i]);
            let va = v.powf(alpha);
            num_re += va * -phi.norm().ln();
            num_im += va * phi.arg() / tan;
            den += va * va;
        }
        b[i] = num_re / den;
        b[k + i] = num_im / den;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let gamma = nnls_solve(&NnlsProblem::new(a, b)?)?;
    SpectralMeasure::new(alpha, anchors, gamma.iter().copied().collect(), DVector::zeros(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_small_cases() {
        let p = NnlsProblem::new(DMatrix::identity(2, 2), DVector::from_column_slice(&[1.0, 2.0])).unwrap();
        assert_eq!(nnls_solve(&p).unwrap(), DVector::from_column_slice(&[1.0, 2.0]));
        let p = NnlsProblem::new(DMatrix::identity(2, 2), DVector::from_column_slice(&[-1.0, 2.0])).unwrap();
        assert_eq!(nnls_solve(&p).unwrap(), DVector::from_column_slice(&[0.0, 2.0]));
        let p = NnlsProblem::new(DMatrix::identity(2, 2), DVector::from_column_slice(&[-1.0, -2.0])).unwrap();
        assert_eq!(nnls_solve(&p).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn default_grid_shape() {
        let g = ProjectionGrid::default();
        assert_eq!(g.directions.len(), 16);
        assert!((g.ecf_points[0] - 0.1).abs() < 1e-15 && (g.ecf_points[9] - 1.0).abs() < 1e-12);
        g.validate().unwrap();
    }

    #[test]
    fn too_few_points() {
        assert!(estimate_symmetric_ecf(&[1.0; 10]).is_err());
        assert!(matches!(estimate_symmetric_ecf(&[0.0; 60]), Err(Error::DegenerateEcf(_))));
    }
}
