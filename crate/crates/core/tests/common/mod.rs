//! Shared helpers for integration tests.
//!
//! The centrepiece is an independent implementation of the Gaussian Fisher
//! information written in "determinant form",
//!
//! F = 1/2 { det''(C)/det(C) - (det'(C)/det(C))^2
//!           + sum_{s,j} [ (C^-1)''_{sj} C_{sj} + 2 (C^-1)_{sj} m'_s m'_j ] },
//!
//! with ' = d/dq. It deliberately shares no code with the production trace
//! form: all derivatives are taken by central finite differences of the
//! model builder, and the determinant curvature is evaluated through the
//! well-conditioned ratios det(C(q0)^-1 C(q0 +/- h)) ~= 1.

use nalgebra::DMatrix;
use soliton_metrology::{CountModel, Result};

/// Determinant-form Fisher information at `q`, finite differences at step
/// `h` refined by one Richardson extrapolation step (leading O(h^2) error
/// cancelled between `h` and `h/2`).
pub fn fisher_determinant_form<B>(build: &B, q: f64, h: f64) -> Result<f64>
where
    B: Fn(f64) -> Result<CountModel>,
{
    let coarse = determinant_form_at(build, q, h)?;
    let fine = determinant_form_at(build, q, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// One finite-difference evaluation of the determinant form.
pub fn determinant_form_at<B>(build: &B, q: f64, h: f64) -> Result<f64>
where
    B: Fn(f64) -> Result<CountModel>,
{
    let base = build(q)?;
    let plus = build(q + h)?;
    let minus = build(q - h)?;

    let chol = base.cholesky()?;

    // det C(q +/- h) / det C(q), both close to 1, so the second-difference
    // quotient below is free of large cancellations.
    let r_plus = chol.solve(&plus.cov).determinant();
    let r_minus = chol.solve(&minus.cov).determinant();
    let d2_det = (r_plus - 2.0 + r_minus) / (h * h);
    let d1_det = (r_plus - r_minus) / (2.0 * h);

    let inv0 = chol.inverse();
    let inv_plus = plus.cholesky()?.inverse();
    let inv_minus = minus.cholesky()?.inverse();
    let d2_inv: DMatrix<f64> = (inv_plus + inv_minus - 2.0 * &inv0) / (h * h);
    let curvature_term = d2_inv.component_mul(&base.cov).sum();

    let d_mean = (&plus.mean - &minus.mean) / (2.0 * h);
    let mean_term = 2.0 * d_mean.dot(&(&inv0 * &d_mean));

    Ok(0.5 * (d2_det - d1_det * d1_det + curvature_term + mean_term))
}
