//! Characteristic functions of the supported laws.

use std::f64::consts::{FRAC_2_PI, PI};

use nalgebra::{Complex, DVector};

use crate::params::{EllipticalParams, Form, SpectralMeasure, StableParams};

pub type C64 = Complex<f64>;

/// `log E exp(i t Y)` for a univariate stable law in its own form.
pub fn log_chf(t: f64, p: &StableParams) -> C64 {
    let p = p.normalized();
    if t == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let st = (p.sigma * t).abs();
    let sgn = t.signum();
    let (re, im) = if p.alpha == 1.0 {
        let log_arg = match p.form {
            Form::S0 => st.ln(),
            Form::S1 => t.abs().ln(),
        };
        (-st, -st * p.beta * sgn * FRAC_2_PI * log_arg)
    } else {
        let tan = (PI * p.alpha / 2.0).tan();
        let sa = st.powf(p.alpha);
        let skew = match p.form {
            Form::S0 => -p.beta * sgn * tan * (st.powf(1.0 - p.alpha) - 1.0),
            Form::S1 => p.beta * sgn * tan,
        };
        (-sa, sa * skew)
    };
    C64::new(re, im + t * p.mu)
}

pub fn chf(t: f64, p: &StableParams) -> C64 {
    log_chf(t, p).exp()
}

pub fn chf_elliptical(t: &DVector<f64>, p: &EllipticalParams) -> C64 {
    let quad = (t.transpose() * &p.sigma * t)[(0, 0)].max(0.0);
    C64::new(-quad.powf(p.alpha / 2.0), t.dot(&p.mu)).exp()
}

/// Characteristic function of a strictly stable vector with a discrete
/// spectral measure (`alpha != 1`).
pub fn chf_spectral(t: &DVector<f64>, m: &SpectralMeasure) -> C64 {
    let tan = (PI * m.alpha / 2.0).tan();
    let mut acc = C64::new(0.0, t.dot(&m.mu));
    for (s, &g) in m.points.iter().zip(&m.masses) {
        let proj = t.dot(s);
        if proj == 0.0 || g == 0.0 {
            continue;
        }
        let mag = g * proj.abs().powf(m.alpha);
        acc += C64::new(-mag, mag * proj.signum() * tan);
    }
    acc.exp()
}

/// Empirical characteristic function of a univariate sample.
pub fn ecf(t: f64, data: &[f64]) -> C64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &y in data {
        let (s, c) = (t * y).sin_cos();
        re += c;
        im += s;
    }
    let n = data.len() as f64;
    C64::new(re / n, im / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn gaussian_and_cauchy() {
        let g = StableParams::new(2.0, 0.0, 1.0, 0.0, Form::S0).unwrap();
        assert!((chf(1.3, &g).re - (-1.69f64).exp()).abs() < 1e-15);
        let c = StableParams::new(1.0, 0.0, 2.0, 1.0, Form::S1).unwrap();
        let v = chf(0.5, &c);
        assert!((v - C64::new(0.0, 0.5).exp() * (-1.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn forms_agree_after_conversion() {
        for &(a, b, s) in &[(1.3, 0.5, 2.0), (0.6, -0.8, 0.7), (1.0, 0.4, 3.0)] {
            let p0 = StableParams::new(a, b, s, 0.25, Form::S0).unwrap();
            let p1 = p0.convert_form(Form::S1);
            for &t in &[-2.0, -0.3, 0.1, 0.9, 4.0] {
                assert!((chf(t, &p0) - chf(t, &p1)).norm() < 1e-12, "a={a} t={t}");
            }
        }
    }

    #[test]
    fn spectral_single_mass_matches_univariate() {
        let m = SpectralMeasure::on_circle(1.4, vec![2.0], [0.0, 0.0]).unwrap();
        let p = StableParams::new(1.4, 1.0, 2f64.powf(1.0 / 1.4), 0.0, Form::S1).unwrap();
        let t = DVector::from_column_slice(&[0.7, -3.0]);
        assert!((chf_spectral(&t, &m) - chf(0.7, &p)).norm() < 1e-14);
    }

    #[test]
    fn elliptical_in_one_dimension() {
        let e = EllipticalParams::new(1.5, DMatrix::from_element(1, 1, 4.0), DVector::zeros(1)).unwrap();
        let p = StableParams::symmetric(1.5, 2.0, 0.0).unwrap();
        let t = DVector::from_element(1, 0.8);
        assert!((chf_elliptical(&t, &e) - chf(0.8, &p)).norm() < 1e-15);
    }
}
