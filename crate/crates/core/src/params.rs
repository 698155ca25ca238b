//! Parameter containers shared by every other module.
//!
//! Univariate laws carry the quadruple `(alpha, beta, sigma, mu)` together with
//! the parameterization `form`. The two forms differ only in how the location
//! is anchored; they coincide whenever `beta == 0`.

use std::f64::consts::{FRAC_2_PI, PI};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Distance from one inside which `alpha` is treated as exactly 1.
pub const ALPHA_ONE_SNAP: f64 = 1e-9;

/// Characteristic-function convention for univariate stable laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// Continuous in all four parameters.
    S0,
    /// Classical convention, discontinuous at `alpha == 1`.
    S1,
}

impl Form {
    pub fn from_flag(flag: u8) -> Result<Form> {
        match flag {
            0 => Ok(Form::S0),
            1 => Ok(Form::S1),
            other => Err(Error::domain("param", other as f64, "{0, 1}")),
        }
    }

    pub fn flag(self) -> u8 {
        match self {
            Form::S0 => 0,
            Form::S1 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    Gaussian,
    Cauchy,
    Levy,
    PositiveStable,
    General,
}

/// Univariate stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub form: Form,
}

impl StableParams {
    /// Validated constructor. The returned value is normalized: `alpha`
    /// within [`ALPHA_ONE_SNAP`] of one is snapped to one, and `beta` is
    /// zeroed for the Gaussian case.
    pub fn new(alpha: f64, beta: f64, sigma: f64, mu: f64, form: Form) -> Result<Self> {
        let p = StableParams {
            alpha,
            beta,
            sigma,
            mu,
            form,
        };
        p.validate()?;
        Ok(p.normalized())
    }

    pub fn symmetric(alpha: f64, sigma: f64, mu: f64) -> Result<Self> {
        Self::new(alpha, 0.0, sigma, mu, Form::S0)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a.is_finite() && a > 0.0 && a <= 2.0) {
            return Err(Error::domain("alpha", a, "(0, 2]"));
        }
        if !(self.beta.is_finite() && self.beta.abs() <= 1.0) {
            return Err(Error::domain("beta", self.beta, "[-1, 1]"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::domain("sigma", self.sigma, "(0, inf)"));
        }
        if !self.mu.is_finite() {
            return Err(Error::domain("mu", self.mu, "finite real"));
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Self {
        if (self.alpha - 1.0).abs() < ALPHA_ONE_SNAP {
            self.alpha = 1.0;
        }
        if self.alpha == 2.0 {
            self.beta = 0.0;
        }
        self
    }

    /// Shift such that `mu_S1 = mu_S0 + shift`.
    fn s0_to_s1_shift(&self) -> f64 {
        if self.alpha == 1.0 {
            -self.beta * FRAC_2_PI * self.sigma * self.sigma.ln()
        } else {
            -self.beta * self.sigma * (PI * self.alpha / 2.0).tan()
        }
    }

    /// Re-express the same law in the `target` parameterization.
    pub fn convert_form(&self, target: Form) -> Self {
        let p = self.normalized();
        if p.form == target {
            return p;
        }
        let shift = p.s0_to_s1_shift();
        let mu = match target {
            Form::S1 => p.mu + shift,
            Form::S0 => p.mu - shift,
        };
        StableParams {
            mu,
            form: target,
            ..p
        }
    }

    pub fn to_s0(&self) -> Self {
        self.convert_form(Form::S0)
    }

    pub fn special_case(&self) -> SpecialCase {
        let p = self.normalized();
        if p.alpha == 2.0 {
            SpecialCase::Gaussian
        } else if p.alpha == 1.0 && p.beta == 0.0 {
            SpecialCase::Cauchy
        } else if p.alpha == 0.5 && p.beta.abs() == 1.0 {
            SpecialCase::Levy
        } else if p.beta == 1.0 && p.alpha < 1.0 {
            SpecialCase::PositiveStable
        } else {
            SpecialCase::General
        }
    }
}

/// Elliptically contoured stable vector with dispersion matrix `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalParams {
    pub alpha: f64,
    pub sigma: DMatrix<f64>,
    pub mu: DVector<f64>,
}

impl EllipticalParams {
    pub fn new(alpha: f64, sigma: DMatrix<f64>, mu: DVector<f64>) -> Result<Self> {
        let p = EllipticalParams { alpha, sigma, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        // alpha = 2 is admitted as the Gaussian member of the family.
        if !(self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::domain("alpha", self.alpha, "(0, 2]"));
        }
        let d = self.mu.len();
        if d == 0 {
            return Err(Error::InvalidData("empty location vector".into()));
        }
        if self.sigma.nrows() != d || self.sigma.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.sigma.nrows().max(self.sigma.ncols()),
            });
        }
        if self.mu.iter().chain(self.sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry".into()));
        }
        let scale = self.sigma.amax().max(f64::MIN_POSITIVE);
        for i in 0..d {
            for j in 0..i {
                if (self.sigma[(i, j)] - self.sigma[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidData("dispersion matrix is not symmetric".into()));
                }
            }
        }
        if self.sigma.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }
}

/// Discrete spectral measure: point masses `masses[j]` at unit vectors `points[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub alpha: f64,
    pub points: Vec<DVector<f64>>,
    pub masses: Vec<f64>,
    pub mu: DVector<f64>,
}

impl SpectralMeasure {
    pub fn new(alpha: f64, points: Vec<DVector<f64>>, masses: Vec<f64>, mu: DVector<f64>) -> Result<Self> {
        let m = SpectralMeasure {
            alpha,
            points,
            masses,
            mu,
        };
        m.validate()?;
        Ok(m)
    }

    /// Masses anchored at `m` equally spaced points on the unit circle,
    /// starting from `(1, 0)`.
    pub fn on_circle(alpha: f64, masses: Vec<f64>, mu: [f64; 2]) -> Result<Self> {
        let points = circle_anchors(masses.len());
        Self::new(alpha, points, masses, DVector::from_column_slice(&mu))
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a.is_finite() && a > 0.0 && a < 2.0) {
            return Err(Error::domain("alpha", a, "(0, 2)"));
        }
        if (a - 1.0).abs() < ALPHA_ONE_SNAP {
            return Err(Error::UnsupportedAlpha(a));
        }
        if self.points.is_empty() || self.points.len() != self.masses.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                got: self.masses.len(),
            });
        }
        let d = self.mu.len();
        for s in &self.points {
            if s.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.len() });
            }
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidData("spectral point is not a unit vector".into()));
            }
        }
        if self.masses.iter().any(|&g| !(g.is_finite() && g >= 0.0)) {
            return Err(Error::InvalidData("masses must be finite and nonnegative".into()));
        }
        if !self.masses.iter().any(|&g| g > 0.0) {
            return Err(Error::InvalidData("at least one mass must be positive".into()));
        }
        Ok(())
    }
}

pub fn circle_anchors(m: usize) -> Vec<DVector<f64>> {
    (0..m)
        .map(|j| {
            let angle = 2.0 * PI * j as f64 / m as f64;
            DVector::from_column_slice(&[angle.cos(), angle.sin()])
        })
        .collect()
}

/// Finite mixture of univariate stable laws.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub weights: Vec<f64>,
    pub components: Vec<StableParams>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, components: Vec<StableParams>) -> Result<Self> {
        let m = MixtureSpec { weights, components };
        m.validate()?;
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                got: self.weights.len(),
            });
        }
        for &w in &self.weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::domain("omega", w, "[0, 1]"));
            }
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain("omega", total, "weights summing to 1"));
        }
        self.components.iter().try_for_each(StableParams::validate)
    }
}
