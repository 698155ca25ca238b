use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};
use stablekit::em::FitReport;
use stablekit::gof::GofResult;
use stablekit::{EllipticalParams, MixtureSpec, SpectralMeasure, StableParams};

pub fn stable(p: &StableParams) -> Value {
    json!({"alpha": p.alpha, "beta": p.beta, "sigma": p.sigma, "mu": p.mu, "param": p.form.flag()})
}

pub fn mixture(m: &MixtureSpec) -> Value {
    json!({"omega": m.weights, "components": m.components.iter().map(stable).collect::<Vec<_>>()})
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::from(m.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::from(v.iter().copied().collect::<Vec<_>>())
}

pub fn elliptical(p: &EllipticalParams) -> Value {
    json!({"alpha": p.alpha, "sigma": matrix(&p.sigma), "mu": vector(&p.mu)})
}

pub fn spectral(s: &SpectralMeasure) -> Value {
    json!({
        "alpha": s.alpha,
        "points": s.points.iter().map(vector).collect::<Vec<_>>(),
        "masses": s.masses,
        "mu": vector(&s.mu),
    })
}

pub fn gof(g: &GofResult) -> Value {
    json!({"ks": g.ks, "ad": g.ad, "n": g.n})
}

pub fn report<T>(r: &FitReport<T>, estimates: impl Fn(&T) -> Value) -> Value {
    json!({
        "estimates": estimates(&r.estimates),
        "loglik": r.loglik(),
        "loglik_trace": r.loglik_trace,
        "iterations": r.iterations,
        "converged": r.converged,
        "tol": r.tol,
        "gof": r.gof.as_ref().map(gof),
    })
}

/// Rounds every float to 6 significant digits.
pub fn round(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            format!("{x:.5e}").parse::<f64>().map_or(Value::Null, Value::from)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round(v))).collect::<Map<_, _>>()),
        other => other,
    }
}
