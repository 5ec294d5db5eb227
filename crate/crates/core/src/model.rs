//! Count models: per-pixel mean vector and covariance matrix for a given
//! measurement model, the common input to Fisher-information and sampling
//! routines.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{PixelGrid, SolitonModel};

/// Measurement model tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Poisson,
    GaussianDiagonal,
    Bogoliubov,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(ModelKind::Poisson),
            "gaussian-diagonal" => Ok(ModelKind::GaussianDiagonal),
            "bogoliubov" => Ok(ModelKind::Bogoliubov),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected poisson | gaussian-diagonal | bogoliubov)"
            ))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Poisson => "poisson",
            ModelKind::GaussianDiagonal => "gaussian-diagonal",
            ModelKind::Bogoliubov => "bogoliubov",
        };
        f.write_str(s)
    }
}

/// Mean counts and pixel covariance for one measurement model.
///
/// For the Bogoliubov model the covariance splits as
/// `cov = diag(shot_diag) + phonon_part + goldstone_part`; the parts are
/// kept so signal-to-noise contributions can be attributed.
#[derive(Debug, Clone)]
pub struct CountModel {
    pub tag: ModelKind,
    pub grid: PixelGrid,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    /// Shot-noise diagonal actually placed on the covariance (zeros when
    /// the shot noise is folded into the smooth kernel).
    pub shot_diag: DVector<f64>,
    pub phonon_part: Option<DMatrix<f64>>,
    pub goldstone_part: Option<DMatrix<f64>>,
}

impl CountModel {
    /// Independent Poisson counts: C = diag(mean).
    pub fn poisson(model: &SolitonModel, grid: &PixelGrid) -> Result<Self> {
        let mean = DVector::from_vec(model.pixel_means(grid)?);
        let cov = DMatrix::from_diagonal(&mean);
        Ok(CountModel {
            tag: ModelKind::Poisson,
            grid: *grid,
            shot_diag: mean.clone(),
            mean,
            cov,
            phonon_part: None,
            goldstone_part: None,
        })
    }

    /// Gaussian approximation with the Poisson covariance C = diag(mean).
    pub fn gaussian_diag(model: &SolitonModel, grid: &PixelGrid) -> Result<Self> {
        let mut m = Self::poisson(model, grid)?;
        m.tag = ModelKind::GaussianDiagonal;
        Ok(m)
    }

    pub fn m_px(&self) -> usize {
        self.mean.len()
    }

    /// Cholesky factorization of the covariance; failure means the model
    /// is not valid at these parameters.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.cov.clone()).ok_or_else(|| {
            Error::ModelValidity(format!(
                "covariance matrix for the {} model is not positive definite",
                self.tag
            ))
        })
    }
}
