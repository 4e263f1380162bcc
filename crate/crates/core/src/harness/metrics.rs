//! Recovery quality measures.

use std::time::Duration;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Squared relative error `‖X̂ − M‖_F² / ‖M‖_F²`.
///
/// This is the squared ratio; take the square root for the plain relative
/// Frobenius error.
pub fn relerr(xhat: &Tensor3, m: &Tensor3) -> Result<f64> {
    let num = xhat.sub(m)?.frobenius_norm().powi(2);
    let den = m.frobenius_norm().powi(2);
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "relerr reference tensor is zero".into(),
        ));
    }
    Ok(num / den)
}

/// `10 log10(N ‖M‖_∞² / ‖X̂ − M‖_F²)` in decibels; `+∞` on exact recovery.
pub fn psnr(xhat: &Tensor3, m: &Tensor3) -> Result<f64> {
    let err = xhat.sub(m)?.frobenius_norm().powi(2);
    let peak = m.max_abs();
    if peak == 0.0 {
        return Err(Error::InvalidParameter(
            "psnr reference tensor is zero".into(),
        ));
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (m.shape().len() as f64 * peak * peak / err).log10())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub relerr: f64,
    pub psnr: f64,
    pub wall_time: Duration,
    pub iterations: usize,
}

impl Metrics {
    pub fn evaluate(
        xhat: &Tensor3,
        m: &Tensor3,
        wall_time: Duration,
        iterations: usize,
    ) -> Result<Self> {
        Ok(Metrics {
            relerr: relerr(xhat, m)?,
            psnr: psnr(xhat, m)?,
            wall_time,
            iterations,
        })
    }
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "relerr={:.6e} psnr={:.4} time={:.3} iterations={}",
            self.relerr,
            self.psnr,
            self.wall_time.as_secs_f64(),
            self.iterations
        )
    }
}
