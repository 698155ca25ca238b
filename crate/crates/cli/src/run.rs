use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use stablekit::density::{cdf_univariate, pdf_elliptical, pdf_univariate, MixtureDensity, StableDensity};
use stablekit::em::{self, CauchyMixtureInit, EmConfig, SymmetricMixtureInit};
use stablekit::simulate::{rstable, rstable_elliptical, rstable_spectral, rstable_truncated, RngStream};
use stablekit::{datasets, gof, io, spectral, EllipticalParams, Form, MixtureSpec, SpectralMeasure, StableParams};

use crate::args::{Cli, Command, DataSource, EmArgs, FitCommand, Model, Univariate};
use crate::json;

pub enum Failure {
    Usage(String),
    Numerical(stablekit::Error),
}

impl From<stablekit::Error> for Failure {
    fn from(e: stablekit::Error) -> Self {
        Failure::Numerical(e)
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: String) -> Out<T> {
    Err(Failure::Usage(msg))
}

fn flag_error(flag: &str, e: stablekit::Error) -> Failure {
    Failure::Usage(format!("--{flag}: {e}"))
}

fn list(flag: &str, text: &str) -> Out<Vec<f64>> {
    io::parse_list(text).map_err(|e| flag_error(flag, e))
}

fn matrix(flag: &str, text: &str) -> Out<DMatrix<f64>> {
    io::parse_matrix(text).map_err(|e| flag_error(flag, e))
}

fn vector(flag: &str, text: &str) -> Out<DVector<f64>> {
    io::parse_vector(text).map_err(|e| flag_error(flag, e))
}

fn form(param: u8) -> Out<Form> {
    Form::from_flag(param).map_err(|e| flag_error("param", e))
}

fn law(u: &Univariate) -> Out<StableParams> {
    Ok(StableParams::new(u.alpha, u.beta, u.sigma, u.mu, form(u.param)?)?)
}

fn values(v: &[f64]) -> Value {
    json!({ "values": v })
}

fn rows(m: &DMatrix<f64>) -> Value {
    json!({ "values": json::matrix(m) })
}

fn source_matrix(src: &DataSource) -> Out<DMatrix<f64>> {
    match (&src.dataset, &src.file) {
        (Some(name), None) => match datasets::by_name(name) {
            Some(v) => Ok(DMatrix::from_column_slice(v.len(), 1, &v)),
            None => usage(format!("--dataset: unknown name {name:?}, expected one of {:?}", datasets::NAMES)),
        },
        (None, Some(path)) => Ok(io::read_csv(path, None)?),
        _ => usage("one of --dataset or --file is required".into()),
    }
}

fn source_univariate(src: &DataSource) -> Out<Vec<f64>> {
    let m = source_matrix(src)?;
    if m.ncols() != 1 {
        return Err(stablekit::Error::DimensionMismatch {
            expected: 1,
            got: m.ncols(),
        }
        .into());
    }
    Ok(m.column(0).iter().copied().collect())
}

fn em_config(e: &EmArgs) -> EmConfig {
    EmConfig {
        max_iter: e.max_iter,
        tol: e.tol,
        seed: e.seed.seed,
        ..EmConfig::default()
    }
}

fn same_length(k: usize, lists: &[(&str, &Vec<f64>)]) -> Out<()> {
    for (flag, l) in lists {
        if l.len() != k {
            return usage(format!("--{flag}: expected {k} values, got {}", l.len()));
        }
    }
    Ok(())
}

enum Fitted {
    Single(StableParams),
    Mixture(MixtureSpec),
}

fn model(m: &Model) -> Out<Fitted> {
    let f = form(m.param)?;
    let (alpha, beta, sigma, mu) = (list("alpha", &m.alpha)?, list("beta", &m.beta)?, list("sigma", &m.sigma)?, list("mu", &m.mu)?);
    match &m.omega {
        None => {
            same_length(1, &[("alpha", &alpha), ("beta", &beta), ("sigma", &sigma), ("mu", &mu)])?;
            Ok(Fitted::Single(StableParams::new(alpha[0], beta[0], sigma[0], mu[0], f)?))
        }
        Some(o) => {
            let omega = list("omega", o)?;
            let k = omega.len();
            same_length(k, &[("alpha", &alpha), ("beta", &beta), ("sigma", &sigma), ("mu", &mu)])?;
            let comps = (0..k)
                .map(|j| StableParams::new(alpha[j], beta[j], sigma[j], mu[j], f))
                .collect::<stablekit::Result<Vec<_>>>()?;
            Ok(Fitted::Mixture(MixtureSpec::new(omega, comps)?))
        }
    }
}

fn fit(cmd: &FitCommand) -> Out<Value> {
    Ok(match cmd {
        FitCommand::Cauchy {
            data,
            init_beta,
            init_sigma,
            init_mu,
            param,
            em: e,
        } => {
            let y = source_univariate(data)?;
            let r = em::fit_cauchy(&y, (*init_beta, *init_sigma, *init_mu), form(*param)?, &em_config(e))?;
            json::report(&r, json::stable)
        }
        FitCommand::Sym {
            data,
            init_alpha,
            init_sigma,
            init_mu,
            em: e,
        } => {
            let y = source_univariate(data)?;
            let r = em::fit_symmetric(&y, (*init_alpha, *init_sigma, *init_mu), &em_config(e))?;
            json::report(&r, json::stable)
        }
        FitCommand::Skew {
            data,
            init_alpha,
            init_beta,
            init_sigma,
            init_mu,
            param,
            em: e,
        } => {
            let y = source_univariate(data)?;
            let init = (*init_alpha, *init_beta, *init_sigma, *init_mu);
            let r = em::fit_skewed(&y, init, form(*param)?, &em_config(e))?;
            json::report(&r, json::stable)
        }
        FitCommand::CauchyMix {
            data,
            k,
            init_omega,
            init_beta,
            init_sigma,
            init_mu,
            em: e,
        } => {
            let y = source_univariate(data)?;
            let init = CauchyMixtureInit {
                omega: list("init-omega", init_omega)?,
                beta: list("init-beta", init_beta)?,
                sigma: list("init-sigma", init_sigma)?,
                mu: list("init-mu", init_mu)?,
            };
            same_length(
                *k,
                &[("init-omega", &init.omega), ("init-beta", &init.beta), ("init-sigma", &init.sigma), ("init-mu", &init.mu)],
            )?;
            let r = em::fit_cauchy_mixture(&y, *k, &init, &em_config(e))?;
            json::report(&r, json::mixture)
        }
        FitCommand::SymMix {
            data,
            k,
            init_omega,
            init_alpha,
            init_sigma,
            init_mu,
            em: e,
        } => {
            let y = source_univariate(data)?;
            let init = SymmetricMixtureInit {
                omega: list("init-omega", init_omega)?,
                alpha: list("init-alpha", init_alpha)?,
                sigma: list("init-sigma", init_sigma)?,
                mu: list("init-mu", init_mu)?,
            };
            same_length(
                *k,
                &[("init-omega", &init.omega), ("init-alpha", &init.alpha), ("init-sigma", &init.sigma), ("init-mu", &init.mu)],
            )?;
            let r = em::fit_symmetric_mixture(&y, *k, &init, &em_config(e))?;
            json::report(&r, json::mixture)
        }
        FitCommand::Elliptical {
            data,
            init_alpha,
            init_dispersion,
            init_mu,
            em: e,
        } => {
            let z = source_matrix(data)?;
            let init = EllipticalParams::new(
                *init_alpha,
                matrix("init-dispersion", init_dispersion)?,
                vector("init-mu", init_mu)?,
            )?;
            let r = em::fit_elliptical(&z, &init, &em_config(e))?;
            json::report(&r, json::elliptical)
        }
        FitCommand::Spectral { data, m } => {
            let z = source_matrix(data)?;
            json!({ "estimates": json::spectral(&spectral::estimate_spectral_measure(&z, *m)?) })
        }
        FitCommand::Tail { data } => {
            let y = source_univariate(data)?;
            let (alpha, sigma) = spectral::estimate_symmetric_ecf(&y)?;
            json!({ "estimates": { "alpha": alpha, "sigma": sigma } })
        }
    })
}

fn plot_data(y: &[f64], model: &Fitted, bins: usize, points: usize) -> Out<String> {
    if bins == 0 || points < 2 {
        return usage("--bins must be positive and --points at least 2".into());
    }
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(stablekit::Error::InvalidData("data range is empty".into()).into());
    }
    let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let pdf = match model {
        Fitted::Single(p) => StableDensity::new(p)?.pdf_many(&grid)?,
        Fitted::Mixture(m) => {
            let d = MixtureDensity::new(m)?;
            grid.iter().map(|&g| d.pdf(g)).collect::<stablekit::Result<Vec<_>>>()?
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in y {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let mut out = String::from("section,x,value\n");
    for (g, f) in grid.iter().zip(&pdf) {
        writeln!(out, "pdf,{g},{f}").expect("writing to a string");
    }
    for (i, c) in counts.iter().enumerate() {
        writeln!(out, "hist,{},{c}", lo + (i as f64 + 0.5) * width).expect("writing to a string");
    }
    Ok(out)
}

/// Runs one invocation and returns the text for stdout.
pub fn run(cli: &Cli) -> Out<String> {
    let value = match &cli.command {
        Command::Sim(a) => values(&rstable(a.n, &law(&a.law)?, &RngStream::new(a.seed.seed, 0))?),
        Command::SimTrunc(a) => {
            let p = law(&a.sim.law)?;
            values(&rstable_truncated(a.sim.n, &p, a.a, a.b, &RngStream::new(a.sim.seed.seed, 0))?)
        }
        Command::SimElliptical(a) => {
            let p = EllipticalParams::new(a.alpha, matrix("dispersion", &a.dispersion)?, vector("mu", &a.mu)?)?;
            rows(&rstable_elliptical(a.n, &p, &RngStream::new(a.seed.seed, 0))?)
        }
        Command::SimSpectral(a) => {
            let mu = list("mu", &a.mu)?;
            if mu.len() != 2 {
                return usage(format!("--mu: expected 2 values, got {}", mu.len()));
            }
            let s = SpectralMeasure::on_circle(a.alpha, list("masses", &a.masses)?, [mu[0], mu[1]])?;
            rows(&rstable_spectral(a.n, &s, &RngStream::new(a.seed.seed, 0))?)
        }
        Command::Pdf(a) => json!({ "pdf": pdf_univariate(a.y, &law(&a.law)?)? }),
        Command::Cdf(a) => json!({ "cdf": cdf_univariate(a.y, &law(&a.law)?)? }),
        Command::PdfElliptical(a) => {
            let p = EllipticalParams::new(a.alpha, matrix("dispersion", &a.dispersion)?, vector("mu", &a.mu)?)?;
            json!({ "pdf": pdf_elliptical(&vector("z", &a.z)?, &p)? })
        }
        Command::Fit(f) => fit(f)?,
        Command::Gof(a) => {
            let y = source_univariate(&a.data)?;
            let g = match model(&a.model)? {
                Fitted::Single(p) => gof::gof(&y, &p)?,
                Fitted::Mixture(m) => gof::gof(&y, &m)?,
            };
            json::gof(&g)
        }
        Command::PlotData(a) => {
            let y = source_univariate(&a.inner.data)?;
            return plot_data(&y, &model(&a.inner.model)?, a.bins, a.points);
        }
    };
    let value = if cli.json { value } else { json::round(value) };
    Ok(format!("{value}\n"))
}
