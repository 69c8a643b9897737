//! Exact CDF of the supremum statistic via backward recursions over uniform
//! order statistics.
//!
//! Every distribution question reduces to a boundary-crossing probability
//! for uniform order statistics: S <= b iff U_(k) > u_k for each k in the
//! domain whose value falls inside the p-value window. The recursions below
//! evaluate that probability for pure index truncation (O(k1^2)), pure
//! p-value truncation (O(n^3)), the general rectangle (O(n^3)) and the
//! alpha1 = 1 special case (O(n^2)).
//!
//! The published recursions enumerate strata by the first and last order
//! statistic inside the p-value window but omit the strata in which no
//! order statistic is constrained (window empty, window entirely below the
//! index range, or at least k1 values below the window). Those strata make
//! the statistic trivially small, so their full probability mass is added
//! explicitly; the small-n quadrature and Monte-Carlo oracles in the test
//! suite pin this down.

use crate::error::{Error, Result};
use crate::gof::{g_inverse, GofFamily, SupDomain};
use crate::logsum::{KahanSum, LogScaled, SignedLogSum};
use crate::models::DTransform;
use crate::special::{beta_sf, ln_factorial};

/// Cancellation ratio beyond which a result is flagged as unreliable.
pub const CANCELLATION_LIMIT: f64 = 1e8;

/// Inner sums may stop after this many consecutive negligible terms.
const TRUNC_RUN: usize = 30;
/// Relative size below which a term counts as negligible (log scale).
const LN_TRUNC: f64 = -39.14390948; // ln(1e-17)
/// Sample size above which inner-sum truncation is enabled by default.
pub const TRUNC_DEFAULT_N: usize = 500;

/// Transformed crossing levels u_k for k = 1..=k1, plus the window edges
/// beta0/beta1 in the transformed (uniform) scale.
#[derive(Debug, Clone)]
pub struct BoundaryVector {
    u: Vec<f64>,
    pub n: usize,
    pub domain: SupDomain,
    pub beta0: f64,
    pub beta1: f64,
    /// True when the raw u-sequence was not nondecreasing and had to be
    /// replaced by its running maximum.
    pub monotonized: bool,
}

impl BoundaryVector {
    /// u_k = D(g(k/n, b) v alpha0) for the given family and threshold.
    pub fn build(
        family: GofFamily,
        d: &DTransform,
        b: f64,
        n: usize,
        domain: SupDomain,
    ) -> Result<Self> {
        family.validate()?;
        domain.validate(n)?;
        let mut u = Vec::with_capacity(domain.k1);
        for k in 1..=domain.k1 {
            let g = g_inverse(family, n, k as f64 / n as f64, b);
            u.push(d.eval(g.max(domain.alpha0))?.clamp(0.0, 1.0));
        }
        let beta0 = d.eval(domain.alpha0)?;
        let beta1 = d.eval(domain.alpha1)?;
        Ok(Self::from_raw(u, n, domain, beta0, beta1))
    }

    /// Wrap precomputed levels (used by tests and the gamma approximation).
    pub fn from_raw(raw: Vec<f64>, n: usize, domain: SupDomain, beta0: f64, beta1: f64) -> Self {
        let mut u = raw;
        let mut monotonized = false;
        let mut running = 0.0f64;
        for v in u.iter_mut() {
            if *v < running - 1e-12 {
                monotonized = true;
            }
            running = running.max(*v);
            *v = running;
        }
        BoundaryVector {
            u,
            n,
            domain,
            beta0,
            beta1,
            monotonized,
        }
    }

    /// 1-based access.
    pub fn uk(&self, k: usize) -> f64 {
        self.u[k - 1]
    }

    pub fn levels(&self) -> &[f64] {
        &self.u
    }
}

/// A probability plus a numerical-health flag.
#[derive(Debug, Clone, Copy)]
pub struct CdfResult {
    pub value: f64,
    /// Set when some internal sum lost more than ~8 digits to cancellation.
    pub loss_of_significance: bool,
}

/// c * ln(v) with the 0 * ln 0 = 0 convention.
fn xln(c: f64, v: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * v.ln()
    }
}

struct CancelTracker {
    max_ratio: f64,
}

impl CancelTracker {
    fn new() -> Self {
        CancelTracker { max_ratio: 1.0 }
    }

    fn reduce(&mut self, acc: &SignedLogSum) -> LogScaled {
        let r = acc.reduce();
        if r.value.sign != 0 && r.cancellation_ratio > self.max_ratio {
            self.max_ratio = r.cancellation_ratio;
        }
        r.value
    }

    fn flagged(&self) -> bool {
        self.max_ratio > CANCELLATION_LIMIT
    }
}

/// Exact CDF for a pure index-truncation domain (alpha0 = 0, alpha1 = 1).
pub fn cdf_index_trunc(bv: &BoundaryVector) -> Result<CdfResult> {
    let d = bv.domain;
    if !d.is_index_trunc() {
        return Err(Error::MethodMismatch(format!(
            "index-truncation recursion requires alpha0=0, alpha1=1, got [{}, {}]",
            d.alpha0, d.alpha1
        )));
    }
    let (k0, k1) = (d.k0, d.k1);
    if (k0..=k1).all(|k| bv.uk(k) <= 0.0) {
        return Ok(CdfResult {
            value: 1.0,
            loss_of_significance: false,
        });
    }
    if (k0..=k1).any(|k| bv.uk(k) >= 1.0) {
        return Ok(CdfResult {
            value: 0.0,
            loss_of_significance: false,
        });
    }
    let n = bv.n;
    let m = (n - k1 + 1) as f64;
    let truncate = n > TRUNC_DEFAULT_N;
    let mut tracker = CancelTracker::new();
    let a = index_coefficients_signed(bv, k0 + 1, truncate, &mut tracker)?;
    let mut acc = SignedLogSum::with_capacity(k1 + 1);
    acc.push(LogScaled::from_f64(beta_sf(bv.uk(k1), k1 as f64, m)?));
    for i in k0..k1 {
        acc.push_neg(a[i + 1].mul_log(i as f64 * bv.uk(i).ln() - ln_factorial(i)));
    }
    let p = tracker.reduce(&acc).value();
    Ok(CdfResult {
        value: p.clamp(0.0, 1.0),
        loss_of_significance: tracker.flagged(),
    })
}

/// The index-truncation backward recursion, producing the coefficients
/// a_{lo}..a_{k1} (1-based storage).
fn index_coefficients_signed(
    bv: &BoundaryVector,
    lo: usize,
    truncate: bool,
    tracker: &mut CancelTracker,
) -> Result<Vec<LogScaled>> {
    let n = bv.n;
    let k1 = bv.domain.k1;
    let m = (n - k1 + 1) as f64;
    let uk1 = bv.uk(k1).min(1.0);
    let lognf = |k: usize| ln_factorial(n) - ln_factorial(n - k + 1);
    let mut a = vec![LogScaled::ZERO; k1 + 2];
    a[k1] = LogScaled::from_log(lognf(k1) + beta_sf(uk1, 1.0, m)?.ln());
    let mut acc = SignedLogSum::with_capacity(k1 + 1);
    for k in (lo..k1).rev() {
        acc.clear();
        acc.push(LogScaled::from_log(
            lognf(k) + beta_sf(uk1, (k1 - k + 1) as f64, m)?.ln(),
        ));
        let mut below = 0usize;
        for j in 1..=(k1 - k) {
            let term = a[k + j].mul_log(j as f64 * bv.uk(k + j - 1).ln() - ln_factorial(j));
            acc.push_neg(term);
            if truncate {
                if term.is_zero() || term.log_magnitude < acc.max_log() + LN_TRUNC {
                    below += 1;
                    if below >= TRUNC_RUN {
                        break;
                    }
                } else {
                    below = 0;
                }
            }
        }
        a[k] = tracker.reduce(&acc);
    }
    Ok(a)
}

/// Mass of the strata in which no order statistic is constrained: at least
/// k1 values below the window, or every in-window value carries an index
/// below k0 (including the empty window).
fn unconstrained_mass(n: usize, k0: usize, k1: usize, b0: f64, b1: f64) -> Result<f64> {
    let m = (n - k1 + 1) as f64;
    let mut total = KahanSum::new();
    // P(U_(k1) <= b0): the whole index range sits below the window
    total.add(1.0 - beta_sf(b0, k1 as f64, m)?);
    let lnf = ln_factorial(n);
    for i in 1..=k1 {
        if b0 == 0.0 && i > 1 {
            break;
        }
        let it = i.max(k0);
        for j in i..=it {
            if b1 == 1.0 && j < n + 1 {
                // the (1 - beta1)^(n-j+1) factor vanishes
                continue;
            }
            let lt = lnf - ln_factorial(i - 1) - ln_factorial(j - i) - ln_factorial(n - j + 1)
                + xln((i - 1) as f64, b0)
                + xln((j - i) as f64, b1 - b0)
                + xln((n - j + 1) as f64, 1.0 - b1);
            total.add(lt.exp());
        }
    }
    Ok(total.total())
}

/// Exact CDF for a pure p-value truncation domain (k0 = 1, k1 = n).
pub fn cdf_pvalue_trunc(bv: &BoundaryVector) -> Result<CdfResult> {
    let d = bv.domain;
    let n = bv.n;
    if !d.is_pvalue_trunc(n) {
        return Err(Error::MethodMismatch(format!(
            "p-value-truncation recursion requires k0=1, k1=n, got k0={}, k1={}",
            d.k0, d.k1
        )));
    }
    cdf_general(bv)
}

/// Exact CDF for the general rectangle domain.
pub fn cdf_general(bv: &BoundaryVector) -> Result<CdfResult> {
    let d = bv.domain;
    let n = bv.n;
    let (k0, k1) = (d.k0, d.k1);
    let (b0, b1) = (bv.beta0, bv.beta1);
    if b1 <= b0 {
        // zero-width window: the effective domain is a.s. empty
        return Ok(CdfResult {
            value: 1.0,
            loss_of_significance: false,
        });
    }
    let uc = |k: usize| bv.uk(k).clamp(b0, b1);
    let lnf = ln_factorial(n);
    let truncate = n > TRUNC_DEFAULT_N;
    let mut tracker = CancelTracker::new();
    let mut total = KahanSum::new();
    let mut acc = SignedLogSum::with_capacity(n + 2);
    let mut aj = vec![LogScaled::ZERO; k1 + 2];
    for j in 2..=n + 1 {
        let jt = j.min(k1 + 1);
        // backward recursion for a_j(k), k = jt-1 .. 1; a_j(jt) = 0
        for v in aj.iter_mut() {
            *v = LogScaled::ZERO;
        }
        let shape2 = (j - jt + 1) as f64;
        let top = uc(jt - 1) / b1;
        for k in (1..jt).rev() {
            acc.clear();
            acc.push(LogScaled::from_log(
                lnf - ln_factorial(j - k)
                    + xln((j - k) as f64, b1)
                    + beta_sf(top.min(1.0), (jt - k) as f64, shape2)?.ln(),
            ));
            let mut below = 0usize;
            for l in 1..jt - k {
                let term = aj[k + l].mul_log(l as f64 * uc(k + l - 1).ln() - ln_factorial(l));
                acc.push_neg(term);
                if truncate {
                    if term.is_zero() || term.log_magnitude < acc.max_log() + LN_TRUNC {
                        below += 1;
                        if below >= TRUNC_RUN {
                            break;
                        }
                    } else {
                        below = 0;
                    }
                }
            }
            aj[k] = tracker.reduce(&acc);
        }
        // bracket and weight for each first-in-window index i
        for i in 1..=k1 {
            let it = i.max(k0);
            if j < it + 1 {
                continue;
            }
            // weight c_ij: exactly i-1 values below the window, n-j+1 above
            if (b0 == 0.0 && i > 1) || (b1 == 1.0 && j < n + 1) {
                continue;
            }
            let lc = xln((i - 1) as f64, b0) - ln_factorial(i - 1)
                + xln((n + 1 - j) as f64, 1.0 - b1)
                - ln_factorial(n + 1 - j);
            let bt0 = if i < k0 { b0 } else { 0.0 };
            let width = b1 - bt0;
            let arg = ((uc(jt - 1) - bt0) / width).clamp(0.0, 1.0);
            acc.clear();
            acc.push(LogScaled::from_log(
                lnf + xln((j - i) as f64, width) - ln_factorial(j - i)
                    + beta_sf(arg, (jt - i) as f64, (j - jt + 1) as f64)?.ln(),
            ));
            for k in it..jt {
                acc.push_neg(
                    aj[k + 1].mul_log(
                        (k - i + 1) as f64 * (uc(k) - bt0).max(0.0).ln() - ln_factorial(k - i + 1),
                    ),
                );
            }
            let bracket = tracker.reduce(&acc);
            total.add(bracket.mul_log(lc).value());
        }
    }
    total.add(unconstrained_mass(n, k0, k1, b0, b1)?);
    Ok(CdfResult {
        value: total.total().clamp(0.0, 1.0),
        loss_of_significance: tracker.flagged(),
    })
}

/// Exact CDF for alpha1 = 1 (index range plus a lower p-value cut), O(n^2).
pub fn cdf_modified(bv: &BoundaryVector) -> Result<CdfResult> {
    let d = bv.domain;
    let n = bv.n;
    let (k0, k1) = (d.k0, d.k1);
    let b0 = bv.beta0;
    if d.alpha1 != 1.0 || bv.beta1 != 1.0 {
        return Err(Error::MethodMismatch(format!(
            "the O(n^2) recursion requires alpha1 = 1, got alpha1={}, beta1={}",
            d.alpha1, bv.beta1
        )));
    }
    if b0 >= 1.0 {
        return Ok(CdfResult {
            value: 1.0,
            loss_of_significance: false,
        });
    }
    let m = (n - k1 + 1) as f64;
    let lnf = ln_factorial(n);
    let truncate = n > TRUNC_DEFAULT_N;
    let mut tracker = CancelTracker::new();
    // shared coefficients from the index-truncation recursion
    let a = index_coefficients_signed(bv, k0.min(2).max(1), truncate, &mut tracker)?;
    let mut total = KahanSum::new();
    let mut acc = SignedLogSum::with_capacity(k1 + 1);
    for i in 1..=k1 {
        if b0 == 0.0 && i > 1 {
            break;
        }
        let lc = xln((i - 1) as f64, b0) - ln_factorial(i - 1);
        let it = i.max(k0);
        let bt0 = if i < k0 { b0 } else { 0.0 };
        let arg = ((bv.uk(k1).min(1.0) - bt0) / (1.0 - bt0)).clamp(0.0, 1.0);
        acc.clear();
        acc.push(LogScaled::from_log(
            lnf + xln((n + 1 - i) as f64, 1.0 - bt0) - ln_factorial(n + 1 - i)
                + beta_sf(arg, (k1 + 1 - i) as f64, m)?.ln(),
        ));
        for k in it..k1 {
            acc.push_neg(a[k + 1].mul_log(
                (k + 1 - i) as f64 * (bv.uk(k).max(bt0) - bt0).ln() - ln_factorial(k + 1 - i),
            ));
        }
        let bracket = tracker.reduce(&acc);
        total.add(bracket.mul_log(lc).value());
    }
    // all of the index range below the p-value cut
    total.add(1.0 - beta_sf(b0, k1 as f64, m)?);
    Ok(CdfResult {
        value: total.total().clamp(0.0, 1.0),
        loss_of_significance: tracker.flagged(),
    })
}
