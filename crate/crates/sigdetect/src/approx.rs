//! Approximate distributions: the gamma-process recursion, the
//! linear-boundary closed form, and the close-to-linear Poisson-sum tail.
//!
//! All three approximate the same uniform-order-statistic crossing
//! probability as the exact recursions, trading accuracy for speed; their
//! quality is asserted against the exact oracle in the test suite.

use crate::error::{Error, Result};
use crate::exact::{BoundaryVector, CdfResult, CANCELLATION_LIMIT};
use crate::gof::{g_inverse, GofFamily};
use crate::logsum::{KahanSum, LogScaled, SignedLogSum};
use crate::models::DTransform;
use crate::special::{gamma_sf, h, ln_factorial, poisson_ln_pmf};

/// Approximate CDF via the joint-gamma recursion on d_k = (n+1) u_k.
///
/// Index-truncation domains only; O(k1^2).
pub fn cdf_gamma_approx(bv: &BoundaryVector) -> Result<CdfResult> {
    let dom = bv.domain;
    if !dom.is_index_trunc() {
        return Err(Error::MethodMismatch(
            "gamma approximation requires an index-truncation domain".into(),
        ));
    }
    let (k0, k1) = (dom.k0, dom.k1);
    let n = bv.n;
    let d = |k: usize| (n as f64 + 1.0) * bv.uk(k);
    let dk1 = d(k1);
    if (k0..=k1).all(|k| d(k) <= 0.0) {
        return Ok(CdfResult {
            value: 1.0,
            loss_of_significance: false,
        });
    }
    // c[k] for k = 1..=k1-k0, backward-in-origin recursion
    let mut c = vec![LogScaled::ZERO; k1 - k0 + 2];
    let mut max_cancel = 1.0f64;
    let mut acc = SignedLogSum::with_capacity(k1 + 1);
    for k in 1..=(k1 - k0) {
        acc.clear();
        acc.push(LogScaled::from_f64(gamma_sf(dk1, k as f64)?));
        for j in 1..k {
            acc.push_neg(c[k - j].mul_log(j as f64 * d(k1 - k + j).ln() - ln_factorial(j)));
        }
        let r = acc.reduce();
        if r.value.sign != 0 {
            max_cancel = max_cancel.max(r.cancellation_ratio);
        }
        c[k] = r.value;
    }
    acc.clear();
    acc.push(LogScaled::from_f64(gamma_sf(dk1, k1 as f64)?));
    for k in k0..k1 {
        acc.push_neg(c[k1 - k].mul_log(k as f64 * d(k).ln() - ln_factorial(k)));
    }
    let r = acc.reduce();
    max_cancel = max_cancel.max(r.cancellation_ratio);
    Ok(CdfResult {
        value: r.value.value().clamp(0.0, 1.0),
        loss_of_significance: max_cancel > CANCELLATION_LIMIT,
    })
}

/// A boundary that is linear in the index: u_k = a + lambda k on the
/// transformed scale (times n, depending on convention — see
/// `linear_boundary_prob`).
#[derive(Debug, Clone, Copy)]
pub struct LinearBoundary {
    pub a: f64,
    pub lambda: f64,
    pub k1: usize,
}

impl LinearBoundary {
    pub fn validate(&self) -> Result<()> {
        if self.k1 < 1 {
            return Err(Error::Domain("linear boundary requires k1 >= 1".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "linear boundary requires lambda >= 0, got {}",
                self.lambda
            )));
        }
        // Tolerate rounding at the boundary case a = -lambda (e.g. b = 1/n).
        let tol = 1e-12 * (1.0 + self.a.abs());
        for k in [1, self.k1] {
            if self.a + self.lambda * (k as f64) < -tol {
                return Err(Error::Domain(format!(
                    "linear boundary must be nonnegative on 1..=k1; a + lambda*{k} = {}",
                    self.a + self.lambda * k as f64
                )));
            }
        }
        Ok(())
    }
}

/// Closed-form crossing probability for a linear boundary:
/// exp(-a) (1 - lambda + h_{k1}(lambda)), clamped to [0,1].
pub fn linear_boundary_prob(lb: &LinearBoundary) -> Result<f64> {
    lb.validate()?;
    let v = (-lb.a).exp() * (1.0 - lb.lambda + h(lb.k1 as u64, lb.lambda)?);
    Ok(v.clamp(0.0, 1.0))
}

/// One-step approximation of P(KS+ <= b) on the domain 1..=k1 for small
/// thresholds b <= 1/n.
///
/// The quality degrades as k1 approaches n (the gamma surrogate for the
/// high order statistics breaks down); k1 <= n/2 with n in the hundreds
/// keeps the error around 1e-2.
pub fn ks_cdf_approx(n: usize, b: f64, k1: usize) -> Result<f64> {
    if n < 1 || k1 < 1 || k1 > n {
        return Err(Error::Domain(format!("need 1 <= k1 <= n, got k1={k1}, n={n}")));
    }
    if !(b > 0.0 && b <= 1.0 / n as f64) {
        return Err(Error::Domain(format!(
            "the linear-boundary form of KS+ is valid for 0 < b <= 1/n, got b={b}, n={n}"
        )));
    }
    linear_boundary_prob(&LinearBoundary {
        a: -(n as f64 + 1.0) * b,
        lambda: (n as f64 + 1.0) / n as f64,
        k1,
    })
}

/// Survival probability by the Poisson-sum tail formula.
///
/// `d[k]` is the Poisson mean at index k and `dprime[k]` the scaled local
/// slope; both are 1-based over k0..=k1 (index k stored at k - k0). The
/// boundary conditions — increasing, convex, slope below one, and below the
/// diagonal — are checked on the grid and any violation aborts with the
/// failing indices.
pub fn sf_poisson_sum(d: &[f64], dprime: &[f64], n: usize, k0: usize, k1: usize) -> Result<f64> {
    if k0 < 1 || k0 > k1 || k1 > n {
        return Err(Error::Domain(format!(
            "need 1 <= k0 <= k1 <= n, got k0={k0}, k1={k1}, n={n}"
        )));
    }
    let len = k1 - k0 + 1;
    if d.len() != len || dprime.len() != len {
        return Err(Error::Domain(format!(
            "need {len} grid values, got {} and {}",
            d.len(),
            dprime.len()
        )));
    }
    let nf = n as f64;
    let mut bad: Vec<usize> = Vec::new();
    for (off, k) in (k0..=k1).enumerate() {
        let lam = dprime[off] / nf;
        if !(lam < 1.0) || !(lam >= 0.0) {
            bad.push(k);
            continue;
        }
        if d[off] >= k as f64 * nf / (nf + 1.0) {
            bad.push(k);
            continue;
        }
        if off > 0 && d[off] < d[off - 1] - 1e-12 {
            bad.push(k);
            continue;
        }
        if off > 0 && off + 1 < len && d[off + 1] - 2.0 * d[off] + d[off - 1] < -1e-9 * nf {
            bad.push(k);
        }
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(format!(
            "boundary fails the close-to-linear conditions at k = {bad:?}"
        )));
    }
    let root_n = (nf.sqrt()).floor() as usize;
    let mut total = KahanSum::new();
    for (off, k) in (k0..=k1).enumerate() {
        let kstar = (k1 - k).min(root_n);
        let lam = dprime[off] / nf;
        let factor = if kstar == 0 {
            1.0
        } else {
            1.0 - lam + h(kstar as u64, lam)?
        };
        let lp = poisson_ln_pmf(k as u64, d[off])?;
        total.add(factor * lp.exp());
    }
    Ok(total.total().clamp(0.0, 1.0))
}

/// Build the Poisson-sum inputs d_k = n D(g(k/n, b)) and the scaled slope
/// d'_k = (n+1) d/dx D(g(x, b)) by central differences.
pub fn poisson_inputs(
    family: GofFamily,
    dtr: &DTransform,
    b: f64,
    n: usize,
    k0: usize,
    k1: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    const STEP: f64 = 1e-5;
    let nf = n as f64;
    let dg = |x: f64| -> Result<f64> { dtr.eval(g_inverse(family, n, x, b)) };
    let mut d = Vec::with_capacity(k1 - k0 + 1);
    let mut dp = Vec::with_capacity(k1 - k0 + 1);
    for k in k0..=k1 {
        let x = k as f64 / nf;
        d.push(nf * dg(x)?);
        let slope = (dg(x + STEP)? - dg(x - STEP)?) / (2.0 * STEP);
        dp.push((nf + 1.0) * slope);
    }
    Ok((d, dp))
}

/// Closed-form Poisson-sum tail for the HC2004 statistic under the null.
///
/// Requires b0 = b/sqrt(n) above 2x - 1 over the whole index range so the
/// analytic boundary and slope apply.
pub fn hc_sf_approx(n: usize, b: f64, k0: usize, k1: usize) -> Result<f64> {
    if k0 < 1 || k0 > k1 || k1 > n {
        return Err(Error::Domain(format!(
            "need 1 <= k0 <= k1 <= n, got k0={k0}, k1={k1}, n={n}"
        )));
    }
    let nf = n as f64;
    let b0 = b / nf.sqrt();
    let xmax = k1 as f64 / nf;
    if !(b0 > 0.0) || b0 <= 2.0 * xmax - 1.0 {
        return Err(Error::Precondition(format!(
            "requires b/sqrt(n) > max(0, 2 k1/n - 1), got {b0}"
        )));
    }
    let c = b0 * b0;
    let mut d = Vec::with_capacity(k1 - k0 + 1);
    let mut dp = Vec::with_capacity(k1 - k0 + 1);
    for k in k0..=k1 {
        let x = k as f64 / nf;
        let sq = (c + 4.0 * x * (1.0 - x)).sqrt();
        let g = (x + (c - b0 * sq) / 2.0) / (1.0 + c);
        let gp = (1.0 - b0 * (1.0 - 2.0 * x) / sq) / (1.0 + c);
        d.push(nf * g.max(0.0));
        dp.push((nf + 1.0) * gp);
    }
    sf_poisson_sum(&d, &dp, n, k0, k1)
}
