//! Signed log-magnitude arithmetic for the backward recursions.
//!
//! The recursion coefficients carry factors like `n!/(n-k+1)!` and `u^k/k!`
//! that overflow or underflow f64 long before `n = 2000`, so every
//! coefficient is stored as a sign plus the natural log of its absolute
//! value. Sums of such terms are evaluated by rescaling to the largest
//! exponent and compensated (Kahan) accumulation, with a cancellation
//! monitor comparing the sum of magnitudes against the result.

/// A real number represented as `sign * exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    /// -1, 0 or +1.
    pub sign: i8,
    /// ln|value|; `f64::NEG_INFINITY` when `sign == 0`.
    pub log_magnitude: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScaled {
                sign,
                log_magnitude,
            }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScaled {
                sign: if v > 0.0 { 1 } else { -1 },
                log_magnitude: v.abs().ln(),
            }
        }
    }

    /// A positive value given directly as its log.
    pub fn from_log(log_magnitude: f64) -> Self {
        Self::new(1, log_magnitude)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    pub fn mul(&self, other: &LogScaled) -> LogScaled {
        Self::new(
            self.sign * other.sign,
            self.log_magnitude + other.log_magnitude,
        )
    }

    /// Multiply by a positive factor given as its log.
    pub fn mul_log(&self, log_factor: f64) -> LogScaled {
        Self::new(self.sign, self.log_magnitude + log_factor)
    }
}

/// Plain compensated (Kahan-Babuska) summation for linear-space totals.
#[derive(Debug, Default, Clone)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Accumulates signed log-magnitude terms and reduces them with a single
/// rescaled compensated pass.
#[derive(Debug)]
pub struct SignedLogSum {
    terms: Vec<(i8, f64)>,
}

/// Result of reducing a [`SignedLogSum`].
#[derive(Debug, Clone, Copy)]
pub struct LogSumResult {
    pub value: LogScaled,
    /// sum(|terms|) / |result|; large values signal loss of significance.
    pub cancellation_ratio: f64,
}

impl SignedLogSum {
    pub fn with_capacity(cap: usize) -> Self {
        Self {
            terms: Vec::with_capacity(cap),
        }
    }

    pub fn clear(&mut self) {
        self.terms.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: LogScaled) {
        if term.sign != 0 {
            self.terms.push((term.sign, term.log_magnitude));
        }
    }

    pub fn push_neg(&mut self, term: LogScaled) {
        if term.sign != 0 {
            self.terms.push((-term.sign, term.log_magnitude));
        }
    }

    /// Magnitude (log) of the largest term currently held.
    pub fn max_log(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(_, l)| l)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn reduce(&self) -> LogSumResult {
        if self.terms.is_empty() {
            return LogSumResult {
                value: LogScaled::ZERO,
                cancellation_ratio: 1.0,
            };
        }
        let m = self.max_log();
        if m == f64::NEG_INFINITY {
            return LogSumResult {
                value: LogScaled::ZERO,
                cancellation_ratio: 1.0,
            };
        }
        let mut sum = KahanSum::new();
        let mut abs_sum = KahanSum::new();
        for &(s, l) in &self.terms {
            let t = (l - m).exp();
            sum.add(f64::from(s) * t);
            abs_sum.add(t);
        }
        let total = sum.total();
        let value = if total == 0.0 {
            LogScaled::ZERO
        } else {
            LogScaled::new(if total > 0.0 { 1 } else { -1 }, m + total.abs().ln())
        };
        let cancellation_ratio = if total == 0.0 {
            f64::INFINITY
        } else {
            abs_sum.total() / total.abs()
        };
        LogSumResult {
            value,
            cancellation_ratio,
        }
    }
}
