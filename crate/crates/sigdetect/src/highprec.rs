//! Arbitrary-precision evaluation of the index-truncation CDF recursion.
//!
//! The f64 recursion loses all significance for large n (the backward
//! substitution subtracts terms that agree in hundreds of digits), so this
//! path redoes the same computation with a software big-float whose
//! precision scales with n. It is used automatically when the fast path
//! raises its loss-of-significance flag, and serves as the large-n oracle in
//! the test suite.

use crate::error::{Error, Result};
use crate::exact::{BoundaryVector, CdfResult};
use astro_float::{BigFloat, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// Decimal digits carried for a given sample size, with headroom over the
/// empirically required cancellation depth.
pub fn digits_for(n: usize) -> usize {
    40 + n / 4
}

fn prec_bits(digits: usize) -> usize {
    // log2(10) ~ 3.33
    digits * 10 / 3 + 32
}

struct Field {
    p: usize,
}

impl Field {
    fn new(p: usize) -> Self {
        Field { p }
    }

    fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn from_usize(&self, x: usize) -> BigFloat {
        BigFloat::from_f64(x as f64, self.p)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    fn one(&self) -> BigFloat {
        self.from_f64(1.0)
    }

    fn zero(&self) -> BigFloat {
        self.from_f64(0.0)
    }
}

/// Best-effort conversion back to f64 using the top mantissa words.
fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some(words) = x.mantissa_digits() else {
        return f64::NAN;
    };
    let Some(e) = x.exponent() else {
        return f64::NAN;
    };
    // words are least-significant first; the value is 0.mantissa * 2^e
    let mut frac = 0.0f64;
    for (i, w) in words.iter().rev().take(2).enumerate() {
        frac += *w as f64 * (2.0f64).powi(-64 * (i as i32 + 1));
    }
    let v = frac * (2.0f64).powi(e);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Binomial survival form of the beta tail: P(Beta(a, m) > x) as
/// sum_{j=0}^{a-1} C(N, j) x^j (1-x)^{N-j} with N = a + m - 1.
fn beta_sf_terms(f: &Field, x: &BigFloat, a: usize, m: usize) -> BigFloat {
    let nn = a + m - 1;
    let one_minus = f.sub(&f.one(), x);
    // start at j = 0: (1-x)^N
    let mut term = pow_usize(f, &one_minus, nn);
    let mut total = term.clone();
    for j in 1..a {
        // C(N,j)/C(N,j-1) = (N-j+1)/j, and one power moves from (1-x) to x
        let ratio = f.div(&f.from_usize(nn - j + 1), &f.from_usize(j));
        term = f.mul(&term, &ratio);
        term = f.mul(&term, x);
        term = f.div(&term, &one_minus);
        total = f.add(&total, &term);
    }
    total
}

fn pow_usize(f: &Field, x: &BigFloat, mut e: usize) -> BigFloat {
    let mut base = x.clone();
    let mut acc = f.one();
    while e > 0 {
        if e & 1 == 1 {
            acc = f.mul(&acc, &base);
        }
        base = f.mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// The index-truncation CDF computed in software floating point. Domain and
/// boundary conventions match the fast path exactly.
pub fn cdf_index_trunc_hp(bv: &BoundaryVector) -> Result<CdfResult> {
    cdf_index_trunc_hp_digits(bv, digits_for(bv.n))
}

pub fn cdf_index_trunc_hp_digits(bv: &BoundaryVector, digits: usize) -> Result<CdfResult> {
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
    let m = n - k1 + 1;
    let f = Field::new(prec_bits(digits));
    let uk1 = f.from_f64(bv.uk(k1).min(1.0));
    let u: Vec<BigFloat> = (1..=k1).map(|k| f.from_f64(bv.uk(k).max(0.0))).collect();

    // falling factorials n!/(n-k+1)! for k = 1..k1
    let mut ff = vec![f.one(); k1 + 1];
    for k in 2..=k1 {
        ff[k] = f.mul(&ff[k - 1], &f.from_usize(n - k + 2));
    }
    // inverse factorials 1/j!
    let mut inv_fact = vec![f.one(); k1 + 1];
    for j in 1..=k1 {
        inv_fact[j] = f.div(&inv_fact[j - 1], &f.from_usize(j));
    }

    let lo = k0 + 1;
    let mut a = vec![f.zero(); k1 + 2];
    a[k1] = f.mul(&ff[k1], &beta_sf_terms(&f, &uk1, 1, m));
    // rolling powers: when processing index k, pw[t] = u_{t+1}^{t+1-k+1}
    // (0-based t), maintained by one multiply per entry per step
    let mut pw = u.clone();
    for k in (lo..k1).rev() {
        let mut s = f.mul(&ff[k], &beta_sf_terms(&f, &uk1, k1 - k + 1, m));
        for j in 1..=(k1 - k) {
            let t = f.mul(&pw[k + j - 2], &inv_fact[j]);
            s = f.sub(&s, &f.mul(&t, &a[k + j]));
        }
        a[k] = s;
        if k > lo {
            // advance exponents for the next (smaller) k
            for t in (k - 1)..(k1 - 1) {
                pw[t] = f.mul(&pw[t], &u[t]);
            }
        }
    }
    let mut p = beta_sf_terms(&f, &uk1, k1, m);
    for i in k0..k1 {
        let t = f.mul(&pow_usize(&f, &u[i - 1], i), &inv_fact[i]);
        p = f.sub(&p, &f.mul(&t, &a[i + 1]));
    }
    Ok(CdfResult {
        value: to_f64(&p).clamp(0.0, 1.0),
        loss_of_significance: false,
    })
}

/// The gamma-surrogate CDF (index truncation) in software floating point.
///
/// The common factor e^{-d_{k1}} is pulled out of every gamma tail so the
/// whole recursion is polynomial in the d's; the factor is restored on the
/// log scale at the end.
pub fn cdf_gamma_approx_hp(bv: &BoundaryVector) -> Result<CdfResult> {
    let dom = bv.domain;
    if !dom.is_index_trunc() {
        return Err(Error::MethodMismatch(
            "gamma approximation requires an index-truncation domain".into(),
        ));
    }
    let (k0, k1) = (dom.k0, dom.k1);
    let n = bv.n;
    let nf = n as f64 + 1.0;
    if (k0..=k1).all(|k| nf * bv.uk(k) <= 0.0) {
        return Ok(CdfResult {
            value: 1.0,
            loss_of_significance: false,
        });
    }
    let f = Field::new(prec_bits(digits_for(n)));
    let d: Vec<BigFloat> = (1..=k1).map(|k| f.from_f64(nf * bv.uk(k).max(0.0))).collect();
    let dk1 = d[k1 - 1].clone();
    let dk1_f64 = nf * bv.uk(k1);

    // prefix sums s[a] = sum_{j<a} dk1^j / j!  (the scaled gamma tails)
    let mut s = vec![f.zero(); k1 + 1];
    let mut term = f.one();
    s[1] = f.one();
    for a in 2..=k1 {
        term = f.div(&f.mul(&term, &dk1), &f.from_usize(a - 1));
        s[a] = f.add(&s[a - 1], &term);
    }
    let mut inv_fact = vec![f.one(); k1 + 1];
    for j in 1..=k1 {
        inv_fact[j] = f.div(&inv_fact[j - 1], &f.from_usize(j));
    }

    // scaled coefficients: c[k] = e^{dk1} * (original c_k)
    let mut c = vec![f.zero(); k1 + 1];
    c[1] = f.one();
    // rolling powers: at step k, pw[t] = d_{t+1}^{t+1-(k1-k)} (0-based t)
    let mut pw = d.clone();
    for k in 2..=k1 {
        let mut acc = s[k].clone();
        for j in 1..k {
            let t = f.mul(&pw[k1 - k + j - 1], &inv_fact[j]);
            acc = f.sub(&acc, &f.mul(&t, &c[k - j]));
        }
        c[k] = acc;
        if k < k1 {
            for t in (k1 - k)..(k1 - 1) {
                pw[t] = f.mul(&pw[t], &d[t]);
            }
        }
    }
    let mut p = s[k1].clone();
    for k in k0..k1 {
        let t = f.mul(&pow_usize(&f, &d[k - 1], k), &inv_fact[k]);
        p = f.sub(&p, &f.mul(&t, &c[k1 - k]));
    }
    // restore the e^{-dk1} factor on the log scale
    let v = if p.is_zero() || p.is_negative() {
        0.0
    } else {
        let lg = log2_approx(&p);
        (lg * std::f64::consts::LN_2 - dk1_f64).exp()
    };
    Ok(CdfResult {
        value: v.clamp(0.0, 1.0),
        loss_of_significance: false,
    })
}

/// log2 of a positive big float, to f64 accuracy.
fn log2_approx(x: &BigFloat) -> f64 {
    let Some(words) = x.mantissa_digits() else {
        return f64::NAN;
    };
    let mut frac = 0.0f64;
    for (i, w) in words.iter().rev().take(2).enumerate() {
        frac += *w as f64 * (2.0f64).powi(-64 * (i as i32 + 1));
    }
    frac.log2() + x.exponent().unwrap_or(0) as f64
}
