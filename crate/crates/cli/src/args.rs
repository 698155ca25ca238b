use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const JSON_KEYS: &str = "\
JSON keys per subcommand:
  sim, sim-trunc            {\"values\": [y...]}
  sim-elliptical/-spectral  {\"values\": [[z1, z2, ...]...]}
  pdf / cdf / pdf-elliptical {\"pdf\": v} / {\"cdf\": v} / {\"pdf\": v}
  fit cauchy|sym|skew|cauchy-mix|sym-mix|elliptical
                            {\"estimates\", \"loglik\", \"loglik_trace\", \"iterations\", \"converged\", \"tol\", \"gof\"}
  fit spectral              {\"estimates\": {\"alpha\", \"points\", \"masses\", \"mu\"}}
  fit tail                  {\"estimates\": {\"alpha\", \"sigma\"}}
  gof                       {\"ks\", \"ad\", \"n\"}
Univariate estimates: {\"alpha\", \"beta\", \"sigma\", \"mu\", \"param\"}; mixtures: {\"omega\", \"components\"};
elliptical: {\"alpha\", \"sigma\", \"mu\"}. plot-data writes CSV with columns section,x,value.
Exit status: 0 success, 1 usage error, 2 numerical failure (message names the error kind).";

/// Stable distributions: densities, simulation and estimation.
#[derive(Parser, Debug)]
#[command(name = "stablekit", version, after_help = JSON_KEYS)]
pub struct Cli {
    /// Full-precision numbers (default output rounds to 6 significant digits).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw from a univariate stable law.
    Sim(SimArgs),
    /// Draw from a stable law truncated to (a, b).
    SimTrunc(SimTruncArgs),
    /// Draw from an elliptically contoured stable law.
    SimElliptical(SimEllipticalArgs),
    /// Draw from a bivariate stable law with a discrete spectral measure on the circle.
    SimSpectral(SimSpectralArgs),
    /// Density of a univariate stable law.
    Pdf(PointArgs),
    /// Distribution function of a univariate stable law.
    Cdf(PointArgs),
    /// Density of an elliptically contoured stable law.
    PdfElliptical(PdfEllipticalArgs),
    /// Parameter estimation.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Kolmogorov-Smirnov and Anderson-Darling statistics of data against a model.
    Gof(ModelDataArgs),
    /// CSV of fitted density values and histogram counts for external plotting.
    PlotData(PlotArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Univariate {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    /// Parameterization: 0 or 1.
    #[arg(long, default_value_t = 0)]
    pub param: u8,
}

#[derive(Args, Debug, Clone)]
pub struct Seed {
    #[arg(long, env = "STABLEKIT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub law: Univariate,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct SimTruncArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Args, Debug)]
pub struct SimEllipticalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Dispersion matrix, rows separated by ';' (e.g. "1,0.5;0.5,1").
    #[arg(long, allow_hyphen_values = true)]
    pub dispersion: String,
    /// Location vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: String,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct SimSpectralArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Masses at equally spaced points of the unit circle, comma separated.
    #[arg(long)]
    pub masses: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    pub mu: String,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    #[command(flatten)]
    pub law: Univariate,
}

#[derive(Args, Debug)]
pub struct PdfEllipticalArgs {
    /// Evaluation point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub dispersion: String,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: String,
}

#[derive(Args, Debug, Clone)]
pub struct DataSource {
    /// Embedded dataset: guinea_pigs, galaxy, abbey_prices or abbey_returns.
    #[arg(long, conflicts_with = "file")]
    pub dataset: Option<String>,
    /// CSV file, one observation per row, optional header row.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EmArgs {
    #[arg(long, env = "STABLEKIT_TOL", default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[command(flatten)]
    pub seed: Seed,
}

#[derive(Subcommand, Debug)]
pub enum FitCommand {
    /// Cauchy family (alpha = 1) with free skewness.
    Cauchy {
        #[command(flatten)]
        data: DataSource,
        #[arg(long, allow_negative_numbers = true)]
        init_beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_mu: f64,
        #[arg(long, default_value_t = 0)]
        param: u8,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Symmetric stable law.
    Sym {
        #[command(flatten)]
        data: DataSource,
        #[arg(long, allow_negative_numbers = true)]
        init_alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_mu: f64,
        #[command(flatten)]
        em: EmArgs,
    },
    /// General stable law.
    Skew {
        #[command(flatten)]
        data: DataSource,
        #[arg(long, allow_negative_numbers = true)]
        init_alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        init_mu: f64,
        #[arg(long, default_value_t = 0)]
        param: u8,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Mixture of Cauchy-family laws (parameterization 0).
    CauchyMix {
        #[command(flatten)]
        data: DataSource,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        init_omega: String,
        #[arg(long, allow_hyphen_values = true)]
        init_beta: String,
        #[arg(long)]
        init_sigma: String,
        #[arg(long, allow_hyphen_values = true)]
        init_mu: String,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Mixture of symmetric stable laws.
    SymMix {
        #[command(flatten)]
        data: DataSource,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        init_omega: String,
        #[arg(long)]
        init_alpha: String,
        #[arg(long)]
        init_sigma: String,
        #[arg(long, allow_hyphen_values = true)]
        init_mu: String,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Elliptically contoured stable law; data has one column per coordinate.
    Elliptical {
        #[command(flatten)]
        data: DataSource,
        #[arg(long, allow_negative_numbers = true)]
        init_alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        init_dispersion: String,
        #[arg(long, allow_hyphen_values = true)]
        init_mu: String,
        #[command(flatten)]
        em: EmArgs,
    },
    /// Discrete spectral measure of bivariate strictly stable data.
    Spectral {
        #[command(flatten)]
        data: DataSource,
        /// Number of equally spaced points on the circle.
        #[arg(long)]
        m: usize,
    },
    /// Tail index and scale of zero-location symmetric data.
    Tail {
        #[command(flatten)]
        data: DataSource,
    },
}

/// A univariate model given either as a single law or as a mixture (lists).
#[derive(Args, Debug, Clone)]
pub struct Model {
    /// Mixture weights; when given, the other parameters are lists.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: String,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long, default_value_t = 0)]
    pub param: u8,
}

#[derive(Args, Debug)]
pub struct ModelDataArgs {
    #[command(flatten)]
    pub data: DataSource,
    #[command(flatten)]
    pub model: Model,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub inner: ModelDataArgs,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Number of points of the density curve.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
}
