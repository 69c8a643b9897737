//! The supremum-type statistic family: f-functions, their inverses in y,
//! and statistic evaluation over a truncation domain.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest |s| accepted for the divergence parameter.
pub const MAX_PHI_S: f64 = 5.0;

/// A member of the statistic family. `PhiDiv { s: 2.0 }` is the 2004-style
/// Higher Criticism, `s: -1.0` the 2008 variant, `s: 1.0` Berk-Jones and
/// `s: 0.0` reverse Berk-Jones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GofFamily {
    KsPlus,
    PhiDiv { s: f64 },
}

impl GofFamily {
    pub fn hc2004() -> Self {
        GofFamily::PhiDiv { s: 2.0 }
    }

    pub fn hc2008() -> Self {
        GofFamily::PhiDiv { s: -1.0 }
    }

    pub fn berk_jones() -> Self {
        GofFamily::PhiDiv { s: 1.0 }
    }

    pub fn reverse_berk_jones() -> Self {
        GofFamily::PhiDiv { s: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let GofFamily::PhiDiv { s } = *self {
            if !s.is_finite() || s.abs() > MAX_PHI_S {
                return Err(Error::Domain(format!(
                    "divergence parameter must lie in [-{MAX_PHI_S}, {MAX_PHI_S}], got {s}"
                )));
            }
        }
        Ok(())
    }

    /// Parse CLI-style names: ks, hc2004, hc2008, bj, rbj, phi:s=<real>.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let fam = match lower.as_str() {
            "ks" | "ks+" | "ksplus" => GofFamily::KsPlus,
            "hc2004" | "hc" => GofFamily::hc2004(),
            "hc2008" => GofFamily::hc2008(),
            "bj" | "berkjones" => GofFamily::berk_jones(),
            "rbj" => GofFamily::reverse_berk_jones(),
            _ => {
                let s = lower
                    .strip_prefix("phi:s=")
                    .or_else(|| lower.strip_prefix("phi="))
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown family '{name}'")))?;
                GofFamily::PhiDiv { s }
            }
        };
        fam.validate()?;
        Ok(fam)
    }
}

impl std::fmt::Display for GofFamily {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            GofFamily::KsPlus => write!(fm, "ks"),
            GofFamily::PhiDiv { s } if s == 2.0 => write!(fm, "hc2004"),
            GofFamily::PhiDiv { s } if s == -1.0 => write!(fm, "hc2008"),
            GofFamily::PhiDiv { s } if s == 1.0 => write!(fm, "bj"),
            GofFamily::PhiDiv { s } if s == 0.0 => write!(fm, "rbj"),
            GofFamily::PhiDiv { s } => write!(fm, "phi:s={s}"),
        }
    }
}

/// The truncation rectangle over which the supremum is taken: indices
/// `k0..=k1` intersected with sorted p-values in `[alpha0, alpha1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupDomain {
    pub k0: usize,
    pub k1: usize,
    pub alpha0: f64,
    pub alpha1: f64,
}

impl SupDomain {
    /// The conventional default: k0 = 1, k1 = floor(n/2), no p-value bounds.
    pub fn default_for(n: usize) -> Self {
        SupDomain {
            k0: 1,
            k1: (n / 2).max(1),
            alpha0: 0.0,
            alpha1: 1.0,
        }
    }

    pub fn full(n: usize) -> Self {
        SupDomain {
            k0: 1,
            k1: n,
            alpha0: 0.0,
            alpha1: 1.0,
        }
    }

    /// Index truncation only.
    pub fn indices(k0: usize, k1: usize) -> Self {
        SupDomain {
            k0,
            k1,
            alpha0: 0.0,
            alpha1: 1.0,
        }
    }

    /// The modified-HC domain: drop the smallest order statistic and
    /// p-values below 1/n.
    pub fn modified_hc(n: usize) -> Self {
        SupDomain {
            k0: 2,
            k1: (n / 2).max(2),
            alpha0: 1.0 / n as f64,
            alpha1: 1.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k0 < 1 || self.k0 > self.k1 || self.k1 > n {
            return Err(Error::Domain(format!(
                "need 1 <= k0 <= k1 <= n, got k0={}, k1={}, n={n}",
                self.k0, self.k1
            )));
        }
        if !(0.0 <= self.alpha0 && self.alpha0 <= self.alpha1 && self.alpha1 <= 1.0) {
            return Err(Error::Domain(format!(
                "need 0 <= alpha0 <= alpha1 <= 1, got alpha0={}, alpha1={}",
                self.alpha0, self.alpha1
            )));
        }
        Ok(())
    }

    pub fn is_index_trunc(&self) -> bool {
        self.alpha0 == 0.0 && self.alpha1 == 1.0
    }

    pub fn is_pvalue_trunc(&self, n: usize) -> bool {
        self.k0 == 1 && self.k1 == n
    }
}

/// Outcome of evaluating the statistic on a sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StatResult {
    /// Supremum value; negative infinity when no pair meets the domain.
    pub value: f64,
    /// Rank (1-based) achieving the supremum, if any.
    pub argmax_index: Option<usize>,
    pub empty_domain: bool,
}

/// xlog(x/y) with the 0 log 0 = 0 convention.
fn xlogxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// The divergence kernel; nonnegative on [0,1]^2, zero iff x = y.
fn phi_kernel(s: f64, x: f64, y: f64) -> f64 {
    let v = if s == 1.0 {
        xlogxy(x, y) + xlogxy(1.0 - x, 1.0 - y)
    } else if s == 0.0 {
        xlogxy(y, x) + xlogxy(1.0 - y, 1.0 - x)
    } else {
        (1.0 - x.powf(s) * y.powf(1.0 - s) - (1.0 - x).powf(s) * (1.0 - y).powf(1.0 - s))
            / (s * (1.0 - s))
    };
    // rounding can produce tiny negatives near x = y
    v.max(0.0)
}

/// Evaluate f(x, y) for the given family at sample size n.
pub fn f_eval(family: GofFamily, n: usize, x: f64, y: f64) -> f64 {
    match family {
        GofFamily::KsPlus => x - y,
        GofFamily::PhiDiv { s } if s == 2.0 => {
            (n as f64).sqrt() * (x - y) / (y * (1.0 - y)).sqrt()
        }
        GofFamily::PhiDiv { s } if s == -1.0 => {
            (n as f64).sqrt() * (x - y) / (x * (1.0 - x)).sqrt()
        }
        GofFamily::PhiDiv { s } => {
            let mag = (2.0 * n as f64 * phi_kernel(s, x, y)).sqrt();
            if y <= x {
                mag
            } else {
                -mag
            }
        }
    }
}

/// Solve f(x, y) = b for y.
///
/// f is strictly decreasing in y, so the solution is unique where
/// attainable; when b exceeds the supremum of f(x, ·) the result clamps to
/// 0, and when b is below the infimum it clamps to 1.
pub fn g_inverse(family: GofFamily, n: usize, x: f64, b: f64) -> f64 {
    match family {
        GofFamily::KsPlus => (x - b).clamp(0.0, 1.0),
        GofFamily::PhiDiv { s } if s == 2.0 => {
            let c = b * b / n as f64;
            let disc = c.sqrt() * (c + 4.0 * x * (1.0 - x)).sqrt();
            let half = if b >= 0.0 {
                (c - disc) / 2.0
            } else {
                (c + disc) / 2.0
            };
            ((x + half) / (1.0 + c)).clamp(0.0, 1.0)
        }
        GofFamily::PhiDiv { s } if s == -1.0 => {
            (x - b / (n as f64).sqrt() * (x * (1.0 - x)).sqrt()).clamp(0.0, 1.0)
        }
        _ => {
            const EPS: f64 = 1e-15;
            if f_eval(family, n, x, EPS) < b {
                return 0.0;
            }
            if f_eval(family, n, x, 1.0 - EPS) > b {
                return 1.0;
            }
            let (mut lo, mut hi) = (EPS, 1.0 - EPS);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if f_eval(family, n, x, mid) >= b {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// Evaluate the supremum statistic over sorted p-values restricted to the
/// domain.
pub fn statistic(family: GofFamily, pvalues: &[f64], domain: SupDomain) -> Result<StatResult> {
    family.validate()?;
    let n = pvalues.len();
    if n == 0 {
        return Err(Error::Domain("statistic requires nonempty p-values".into()));
    }
    domain.validate(n)?;
    for &p in pvalues {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p-value out of [0,1]: {p}")));
        }
    }
    let mut sorted: Vec<f64> = pvalues.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for i in domain.k0..=domain.k1 {
        let p = sorted[i - 1];
        if p < domain.alpha0 || p > domain.alpha1 {
            continue;
        }
        let v = f_eval(family, n, i as f64 / n as f64, p);
        if v > best {
            best = v;
            arg = Some(i);
        }
    }
    Ok(StatResult {
        value: best,
        argmax_index: arg,
        empty_domain: arg.is_none(),
    })
}
