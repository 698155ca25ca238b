mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use stablekit::em::{self, EmConfig, SymmetricMixtureInit};
use stablekit::simulate::{rstable, rstable_elliptical, RngStream};
use stablekit::{EllipticalParams, Error, Form, MixtureSpec, StableParams};

fn sample(alpha: f64, beta: f64, sigma: f64, mu: f64, n: usize, seed: u64) -> Vec<f64> {
    let p = StableParams::new(alpha, beta, sigma, mu, Form::S0).unwrap();
    rstable(n, &p, &RngStream::new(seed, 0)).unwrap()
}

fn nondecreasing(trace: &[f64], n: usize) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-6 * n as f64)
}

// E[1/P | y] = -2 f'(r) / (r f(r)) for the standardized symmetric law.
#[test]
fn weights_match_density_derivative() {
    let h = 1e-4;
    for &alpha in &[0.8, 1.3, 1.7] {
        let (sigma, mu) = (1.7, -0.4);
        let rs = [0.3, 1.0, 2.5, 7.0];
        let ys: Vec<f64> = rs.iter().map(|r| mu + sigma * r).collect();
        let p = StableParams::symmetric(alpha, sigma, mu).unwrap();
        let w = em::estep_weights(&ys, &p).unwrap().w;
        for (&r, &wi) in rs.iter().zip(&w) {
            let f = common::pdf_s0(r, alpha, 0.0, 1.0, 0.0);
            let df = (common::pdf_s0(r + h, alpha, 0.0, 1.0, 0.0) - common::pdf_s0(r - h, alpha, 0.0, 1.0, 0.0)) / (2.0 * h);
            let oracle = -2.0 * df / (r * f);
            assert!((wi - oracle).abs() < 1e-4 * oracle, "alpha={alpha} r={r}: {wi} vs {oracle}");
        }
    }
}

#[test]
fn weights_reject_skewed_laws() {
    let p = StableParams::new(1.5, 0.3, 1.0, 0.0, Form::S0).unwrap();
    assert!(matches!(em::estep_weights(&[1.0], &p), Err(Error::Domain { .. })));
}

#[test]
fn symmetric_fit_is_affine_equivariant() {
    let y = sample(1.4, 0.0, 1.0, 0.0, 200, 11);
    let cfg = EmConfig::default();
    let a = em::fit_symmetric(&y, (1.2, 0.8, 0.1), &cfg).unwrap();
    let (s, t) = (3.0, -5.0);
    let z: Vec<f64> = y.iter().map(|v| s * v + t).collect();
    let b = em::fit_symmetric(&z, (1.2, 0.8 * s, 0.1 * s + t), &cfg).unwrap();
    let (pa, pb) = (a.estimates, b.estimates);
    assert!((pa.alpha - pb.alpha).abs() < 1e-3, "{pa:?} {pb:?}");
    assert!((pb.sigma / (s * pa.sigma) - 1.0).abs() < 1e-3);
    assert!((pb.mu - (s * pa.mu + t)).abs() < 1e-3 * s);
    assert!((b.loglik() - (a.loglik() - y.len() as f64 * s.ln())).abs() < 1e-2);
}

#[test]
fn one_component_mixture_matches_single_fit() {
    let y = sample(1.6, 0.0, 2.0, 1.0, 150, 5);
    let cfg = EmConfig::default();
    let single = em::fit_symmetric(&y, (1.3, 1.5, 0.5), &cfg).unwrap();
    let init = SymmetricMixtureInit {
        omega: vec![1.0],
        alpha: vec![1.3],
        sigma: vec![1.5],
        mu: vec![0.5],
    };
    let mix = em::fit_symmetric_mixture(&y, 1, &init, &cfg).unwrap();
    let (p, q) = (single.estimates, mix.estimates.components[0]);
    assert!((p.alpha - q.alpha).abs() < 1e-3 && (p.sigma - q.sigma).abs() < 1e-3 && (p.mu - q.mu).abs() < 1e-3);
    assert!((single.loglik() - mix.loglik()).abs() < 1e-3);
}

#[test]
fn symmetric_sample_gives_near_zero_skewness() {
    let half = sample(1.5, 0.0, 1.0, 0.0, 60, 21);
    let y: Vec<f64> = half.iter().flat_map(|&v| [v, -v]).collect();
    let r = em::fit_skewed(&y, (1.4, 0.3, 1.0, 0.0), Form::S0, &EmConfig::default()).unwrap();
    assert!(r.estimates.beta.abs() < 0.05, "{:?}", r.estimates);
    assert!(nondecreasing(&r.loglik_trace, y.len()));
}

#[test]
fn symmetric_recovery() {
    let y = sample(1.5, 0.0, 1.0, 0.0, 1000, 2);
    let r = em::fit_symmetric(&y, (1.0, 2.0, 0.5), &EmConfig::default()).unwrap();
    assert!(r.converged);
    assert!((r.estimates.alpha - 1.5).abs() < 0.15 && r.estimates.mu.abs() < 0.15, "{:?}", r.estimates);
}

#[test]
fn cauchy_recovery_with_skewness() {
    let y = sample(1.0, 0.6, 1.0, 2.0, 400, 8);
    let r = em::fit_cauchy(&y, (0.0, 1.5, 0.0), Form::S0, &EmConfig::default()).unwrap();
    let e = r.estimates;
    assert!((e.beta - 0.6).abs() < 0.25 && (e.sigma - 1.0).abs() < 0.2 && (e.mu - 2.0).abs() < 0.3, "{e:?}");
}

#[test]
fn fit_keeps_requested_parameterization() {
    let y = sample(1.7, -0.5, 1.0, 0.0, 80, 4);
    let cfg = EmConfig {
        max_iter: 3,
        ..Default::default()
    };
    let r = em::fit_skewed(&y, (1.5, -0.2, 1.0, 0.0), Form::S1, &cfg).unwrap();
    assert_eq!(r.estimates.form, Form::S1);
    assert_eq!(r.loglik_trace.len(), r.iterations + 1);
}

#[test]
fn memberships_rows_sum_to_one() {
    let y = sample(1.2, 0.0, 1.0, 0.0, 50, 9);
    let spec = MixtureSpec::new(
        vec![0.3, 0.7],
        vec![
            StableParams::symmetric(1.2, 1.0, -2.0).unwrap(),
            StableParams::new(1.0, 0.5, 2.0, 3.0, Form::S0).unwrap(),
        ],
    )
    .unwrap();
    let tau = em::memberships(&y, &spec).unwrap().tau.unwrap();
    for row in tau.row_iter() {
        assert!((row.sum() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&t| (0.0..=1.0).contains(&t)));
    }
}

#[test]
fn far_component_collapses() {
    let y = sample(1.5, 0.0, 1.0, 0.0, 40, 1);
    let init = SymmetricMixtureInit {
        omega: vec![0.5, 0.5],
        alpha: vec![1.5, 1.9],
        sigma: vec![1.0, 1e-3],
        mu: vec![0.0, 1e6],
    };
    let r = em::fit_symmetric_mixture(&y, 2, &init, &EmConfig::default());
    assert!(matches!(r, Err(Error::ComponentCollapse { component: 1, .. })), "{r:?}");
}

#[test]
fn bad_inputs() {
    let cfg = EmConfig::default();
    assert!(matches!(em::fit_symmetric(&[1.0; 5], (1.5, 1.0, 0.0), &cfg), Err(Error::InvalidData(_))));
    assert!(matches!(em::fit_symmetric(&[2.0; 20], (1.5, 1.0, 0.0), &cfg), Err(Error::InvalidData(_))));
    let init = SymmetricMixtureInit {
        omega: vec![0.5, 0.5],
        alpha: vec![1.5],
        sigma: vec![1.0, 1.0],
        mu: vec![0.0, 1.0],
    };
    let y = sample(1.5, 0.0, 1.0, 0.0, 20, 1);
    assert!(matches!(
        em::fit_symmetric_mixture(&y, 2, &init, &cfg),
        Err(Error::DimensionMismatch { expected: 2, got: 1 })
    ));
}

#[test]
fn elliptical_dispersion_stays_positive_definite() {
    let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]);
    let truth = EllipticalParams::new(1.6, s, DVector::from_column_slice(&[1.0, -1.0])).unwrap();
    let z = rstable_elliptical(200, &truth, &RngStream::new(6, 0)).unwrap();
    let init = EllipticalParams::new(1.2, DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
    let mut seen = 0;
    let r = em::fit_elliptical_with(&z, &init, &EmConfig::default(), |p| {
        seen += 1;
        assert_eq!(p.sigma, p.sigma.transpose());
        assert!(p.sigma.clone().cholesky().is_some());
    })
    .unwrap();
    assert_eq!(seen, r.iterations);
    assert!(nondecreasing(&r.loglik_trace, 200));
    let a = r.estimates.alpha;
    assert!((a - 1.6).abs() < 0.2, "alpha {a}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn symmetric_traces_never_drop(seed in 0u64..1000, alpha in 0.7f64..1.9, a0 in 0.5f64..1.9, s0 in 0.3f64..3.0) {
        let y = sample(alpha, 0.0, 1.0, 0.0, 60, seed);
        let cfg = EmConfig { max_iter: 8, ..Default::default() };
        let r = em::fit_symmetric(&y, (a0, s0, 0.2), &cfg).unwrap();
        prop_assert!(nondecreasing(&r.loglik_trace, y.len()));
    }

    #[test]
    fn cauchy_traces_never_drop(seed in 0u64..1000, beta in -0.9f64..0.9, b0 in -0.5f64..0.5) {
        let y = sample(1.0, beta, 1.0, 0.0, 50, seed);
        let cfg = EmConfig { max_iter: 5, ..Default::default() };
        let r = em::fit_cauchy(&y, (b0, 1.0, 0.0), Form::S1, &cfg).unwrap();
        prop_assert!(nondecreasing(&r.loglik_trace, y.len()));
    }
}
