//! Univariate and multivariate alpha-stable distributions: densities,
//! simulation, EM-type estimation, spectral measure estimation and
//! goodness-of-fit statistics.

pub mod chf;
pub mod datasets;
pub mod density;
pub mod em;
pub mod error;
pub mod gof;
pub mod io;
pub mod params;
pub mod quad;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{EllipticalParams, Form, MixtureSpec, SpecialCase, SpectralMeasure, StableParams};
