//! Numerical primitives: log-gamma, regularized incomplete beta/gamma,
//! Poisson mass and the boundary-crossing helper `h_k`.
//!
//! The incomplete beta/gamma evaluations are delegated to `statrs`
//! (continued-fraction/series implementations); this module fixes the
//! conventions the distribution recursions rely on, in particular the
//! shape-0 gamma distribution as a point mass at 0.

use crate::error::{Error, Result};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// ln(k!) for k >= 0. Infallible convenience used throughout the recursions.
pub fn ln_factorial(k: usize) -> f64 {
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// Survival function of Beta(a, b) at x: 1 - I_x(a, b).
pub fn beta_sf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "beta_sf requires positive shapes, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta_sf requires x in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    Ok(1.0 - beta_reg(a, b, x))
}

/// CDF of Gamma(shape, 1). Shape 0 is a point mass at 0, so the CDF is 1
/// for every x >= 0.
pub fn gamma_cdf(x: f64, shape: f64) -> Result<f64> {
    if x < 0.0 || shape < 0.0 {
        return Err(Error::Domain(format!(
            "gamma_cdf requires x >= 0 and shape >= 0, got x={x}, shape={shape}"
        )));
    }
    if shape == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(shape, x))
}

/// Survival function of Gamma(shape, 1).
pub fn gamma_sf(x: f64, shape: f64) -> Result<f64> {
    if x < 0.0 || shape < 0.0 {
        return Err(Error::Domain(format!(
            "gamma_sf requires x >= 0 and shape >= 0, got x={x}, shape={shape}"
        )));
    }
    if shape == 0.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(shape, x))
}

/// h_k(x) = x F_{Gamma(k-1)}(k x) - F_{Gamma(k)}(k x).
///
/// For k = 1 the first CDF degenerates to the shape-0 point mass, giving
/// h_1(x) = x - F_{Gamma(1)}(x).
pub fn h(k: u64, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("h requires k >= 1".into()));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("h requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let kx = k as f64 * x;
    Ok(x * gamma_cdf(kx, (k - 1) as f64)? - gamma_cdf(kx, k as f64)?)
}

/// log of the Poisson(lambda) probability mass at k.
pub fn poisson_ln_pmf(k: u64, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!(
            "poisson pmf requires lambda >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    Ok(-lambda + k as f64 * lambda.ln() - ln_factorial(k as usize))
}

/// Poisson(lambda) probability mass at k, computed in log space.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    Ok(poisson_ln_pmf(k, lambda)?.exp())
}
