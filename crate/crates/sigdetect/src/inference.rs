//! User-facing quantities: p-values, critical values, statistical power, the
//! sparse-detection boundary and batch power sweeps.

use crate::approx::{cdf_gamma_approx, poisson_inputs, sf_poisson_sum};
use crate::error::{Error, Result};
use crate::exact::{cdf_general, cdf_index_trunc, cdf_modified, cdf_pvalue_trunc, BoundaryVector};
use crate::highprec::{cdf_gamma_approx_hp, cdf_index_trunc_hp};
use crate::gof::{GofFamily, SupDomain};
use crate::models::{ArwParams, ComponentDist, DTransform, MixtureModel, PvalueSide};
use crate::montecarlo::{empirical_sf, sample_stats, SimConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How a tail probability is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum MethodChoice {
    /// Cheapest applicable exact recursion for the domain shape.
    ExactAuto,
    /// Gamma-surrogate approximation (index truncation only).
    GammaApprox,
    /// Poisson-sum tail approximation.
    PoissonTail,
    MonteCarlo { reps: usize, seed: u64 },
}

impl MethodChoice {
    /// Parse CLI-style names: exact | gamma | poisson | mc[:reps=..,seed=..].
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "exact" | "exact-auto" | "auto" => return Ok(MethodChoice::ExactAuto),
            "gamma" | "gamma-approx" => return Ok(MethodChoice::GammaApprox),
            "poisson" | "poisson-tail" => return Ok(MethodChoice::PoissonTail),
            "mc" | "montecarlo" | "monte-carlo" => {
                let d = SimConfig::default();
                return Ok(MethodChoice::MonteCarlo {
                    reps: d.reps,
                    seed: d.seed,
                });
            }
            _ => {}
        }
        if let Some(rest) = lower
            .strip_prefix("mc:")
            .or_else(|| lower.strip_prefix("montecarlo:"))
        {
            let d = SimConfig::default();
            let (mut reps, mut seed) = (d.reps, d.seed);
            for kv in rest.split(',') {
                match kv.split_once('=') {
                    Some(("reps", v)) => {
                        reps = v
                            .parse()
                            .map_err(|_| Error::Domain(format!("bad reps '{v}'")))?
                    }
                    Some(("seed", v)) => {
                        seed = v
                            .parse()
                            .map_err(|_| Error::Domain(format!("bad seed '{v}'")))?
                    }
                    _ => return Err(Error::Domain(format!("bad mc option '{kv}'"))),
                }
            }
            return Ok(MethodChoice::MonteCarlo { reps, seed });
        }
        Err(Error::Domain(format!("unknown method '{name}'")))
    }
}

impl std::fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            MethodChoice::ExactAuto => write!(f, "exact-auto"),
            MethodChoice::GammaApprox => write!(f, "gamma"),
            MethodChoice::PoissonTail => write!(f, "poisson"),
            MethodChoice::MonteCarlo { reps, seed } => write!(f, "mc:reps={reps},seed={seed}"),
        }
    }
}

/// A test configuration: which statistic, over which domain, at which sample
/// size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub family: GofFamily,
    pub domain: SupDomain,
    pub n: usize,
}

impl TestSpec {
    pub fn new(family: GofFamily, domain: SupDomain, n: usize) -> Result<Self> {
        family.validate()?;
        domain.validate(n)?;
        Ok(TestSpec { family, domain, n })
    }

    pub fn with_default_domain(family: GofFamily, n: usize) -> Result<Self> {
        TestSpec::new(family, SupDomain::default_for(n), n)
    }
}

/// A tail probability together with how it was obtained and any numerical
/// health flags raised along the way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SfOutcome {
    pub value: f64,
    /// Concrete routine used: thm1 | thm2 | thm3 | cor1 | gamma | poisson | mc.
    pub routine: String,
    pub loss_of_significance: bool,
    pub monotonized: bool,
    /// Monte-Carlo standard error when the routine is mc.
    pub se: Option<f64>,
}

impl SfOutcome {
    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.loss_of_significance {
            f.push("loss_of_significance");
        }
        if self.monotonized {
            f.push("monotonized");
        }
        f.join(";")
    }
}

/// Which exact recursion applies to this domain shape, by specialization.
fn exact_routine(bv: &BoundaryVector) -> Result<(crate::exact::CdfResult, &'static str)> {
    let dom = bv.domain;
    if dom.is_index_trunc() {
        Ok((cdf_index_trunc(bv)?, "thm1"))
    } else if dom.is_pvalue_trunc(bv.n) {
        Ok((cdf_pvalue_trunc(bv)?, "thm2"))
    } else if dom.alpha1 == 1.0 {
        Ok((cdf_modified(bv)?, "cor1"))
    } else {
        Ok((cdf_general(bv)?, "thm3"))
    }
}

/// Survival function of the statistic at threshold b under the hypothesis
/// encoded by the transform. The Monte-Carlo branch samples from `mc_model`
/// (p-values taken under its null component, with the given side).
fn sf_at(
    spec: &TestSpec,
    b: f64,
    dtr: &DTransform,
    mc_model: &MixtureModel,
    mc_side: PvalueSide,
    method: MethodChoice,
) -> Result<SfOutcome> {
    if b == f64::INFINITY {
        return Ok(SfOutcome {
            value: 0.0,
            routine: "limit".into(),
            loss_of_significance: false,
            monotonized: false,
            se: None,
        });
    }
    if b == f64::NEG_INFINITY {
        return Ok(SfOutcome {
            value: 1.0,
            routine: "limit".into(),
            loss_of_significance: false,
            monotonized: false,
            se: None,
        });
    }
    match method {
        MethodChoice::ExactAuto => {
            let bv = BoundaryVector::build(spec.family, dtr, b, spec.n, spec.domain)?;
            let (mut r, mut name) = exact_routine(&bv)?;
            if r.loss_of_significance && bv.domain.is_index_trunc() {
                // the f64 recursion cancelled away its significance; redo it
                // in software floating point
                r = cdf_index_trunc_hp(&bv)?;
                name = "thm1-hp";
            }
            Ok(SfOutcome {
                value: (1.0 - r.value).clamp(0.0, 1.0),
                routine: name.into(),
                loss_of_significance: r.loss_of_significance,
                monotonized: bv.monotonized,
                se: None,
            })
        }
        MethodChoice::GammaApprox => {
            let bv = BoundaryVector::build(spec.family, dtr, b, spec.n, spec.domain)?;
            let mut r = cdf_gamma_approx(&bv)?;
            let mut name = "gamma";
            if r.loss_of_significance {
                r = cdf_gamma_approx_hp(&bv)?;
                name = "gamma-hp";
            }
            Ok(SfOutcome {
                value: (1.0 - r.value).clamp(0.0, 1.0),
                routine: name.into(),
                loss_of_significance: r.loss_of_significance,
                monotonized: bv.monotonized,
                se: None,
            })
        }
        MethodChoice::PoissonTail => {
            if !spec.domain.is_index_trunc() {
                return Err(Error::MethodMismatch(
                    "the Poisson tail approximation requires an index-truncation domain".into(),
                ));
            }
            let (d, dp) = poisson_inputs(spec.family, dtr, b, spec.n, spec.domain.k0, spec.domain.k1)?;
            let v = sf_poisson_sum(&d, &dp, spec.n, spec.domain.k0, spec.domain.k1)?;
            Ok(SfOutcome {
                value: v,
                routine: "poisson".into(),
                loss_of_significance: false,
                monotonized: false,
                se: None,
            })
        }
        MethodChoice::MonteCarlo { reps, seed } => {
            let cfg = SimConfig::new(reps, seed);
            let samples = sample_stats(mc_model, spec.family, spec.domain, spec.n, mc_side, &cfg)?;
            let est = empirical_sf(&samples, b)?;
            Ok(SfOutcome {
                value: est.value,
                routine: "mc".into(),
                loss_of_significance: false,
                monotonized: false,
                se: Some(est.se),
            })
        }
    }
}

fn null_mc_model() -> MixtureModel {
    MixtureModel::pure_null(ComponentDist::std_normal())
}

/// Null survival function of the statistic at threshold b.
pub fn sf_h0(spec: &TestSpec, b: f64, method: MethodChoice) -> Result<SfOutcome> {
    sf_at(
        spec,
        b,
        &DTransform::null(),
        &null_mc_model(),
        PvalueSide::OneSided,
        method,
    )
}

/// p-value of an observed statistic: P_{H0}(S >= observed).
pub fn pvalue(spec: &TestSpec, observed: f64, method: MethodChoice) -> Result<SfOutcome> {
    if observed.is_nan() {
        return Err(Error::Domain("observed statistic is NaN".into()));
    }
    sf_h0(spec, observed, method)
}

/// Smallest threshold b with null SF(b) <= level, by bracketed bisection on
/// the monotone survival function.
pub fn critical_value(spec: &TestSpec, level: f64, method: MethodChoice) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "level must lie in (0,1), got {level}"
        )));
    }
    if let MethodChoice::MonteCarlo { reps, seed } = method {
        let cfg = SimConfig::new(reps, seed);
        let mut samples = sample_stats(
            &null_mc_model(),
            spec.family,
            spec.domain,
            spec.n,
            PvalueSide::OneSided,
            &cfg,
        )?;
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cap = level * reps as f64;
        for i in 0..reps {
            if i == 0 || samples[i] > samples[i - 1] {
                // ties count as exceeding, so the count at samples[i] is the
                // whole upper block starting at its first occurrence
                if (reps - i) as f64 <= cap {
                    return Ok(samples[i]);
                }
            }
        }
        return Ok(samples[reps - 1]);
    }
    let sf = |b: f64| -> Result<f64> { Ok(sf_h0(spec, b, method)?.value) };
    // expand a bracket [lo, hi] with SF(lo) > level >= SF(hi)
    let (mut lo, mut hi) = match method {
        // the tail approximations reject nonpositive thresholds
        MethodChoice::PoissonTail => (1e-8, 1.0),
        _ => (-1.0, 1.0),
    };
    let mut it = 0;
    while sf(hi)? > level {
        hi = hi * 2.0 + 1.0;
        it += 1;
        if it > 80 {
            return Err(Error::Domain(format!(
                "no threshold reaches level {level} (last tried {hi})"
            )));
        }
    }
    it = 0;
    while sf(lo)? <= level {
        lo = lo * 2.0 - 1.0;
        it += 1;
        if it > 80 {
            // the SF never rises above the level: any threshold works
            return Ok(hi.min(0.0));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sf(mid)? <= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Power of the level-`level` test against the mixture alternative: the
/// alternative's survival function evaluated at the null critical value.
pub fn power(
    spec: &TestSpec,
    level: f64,
    h1: &MixtureModel,
    side: PvalueSide,
    method: MethodChoice,
) -> Result<SfOutcome> {
    h1.validate()?;
    let crit = critical_value(spec, level, method)?;
    let dtr = DTransform::new(h1.null.clone(), Some(h1.clone()), side)?;
    sf_at(spec, crit, &dtr, h1, side, method)
}

/// Detection boundary rho*(alpha) for the sparse normal-mixture problem.
pub fn detection_boundary(alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "detection boundary requires alpha in (1/2, 1), got {alpha}"
        )));
    }
    if alpha <= 0.75 {
        Ok(alpha - 0.5)
    } else {
        let t = 1.0 - (1.0 - alpha).sqrt();
        Ok(t * t)
    }
}

/// One alternative in a sweep grid: either sparse-regime parameters
/// (epsilon = n^-alpha, mu = sqrt(2 r log n)) or an explicit normal mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AltSpec {
    Sparse { alpha: f64, r: f64 },
    NormalMix { epsilon: f64, mu: f64 },
}

impl AltSpec {
    fn resolve(&self, n: usize) -> (f64, f64) {
        match *self {
            AltSpec::Sparse { alpha, r } => {
                let p = ArwParams { alpha, r, n };
                (p.epsilon(), p.mu())
            }
            AltSpec::NormalMix { epsilon, mu } => (epsilon, mu),
        }
    }
}

fn default_side() -> PvalueSide {
    PvalueSide::TwoSided
}

fn default_method() -> String {
    "exact-auto".into()
}

/// Declarative sweep grid; rows are emitted in nesting order
/// family > n > alternative > level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub families: Vec<String>,
    pub n: Vec<usize>,
    pub levels: Vec<f64>,
    pub alternatives: Vec<AltSpec>,
    /// Explicit domain; per-n default (k0=1, k1=n/2) when omitted.
    #[serde(default)]
    pub domain: Option<SupDomain>,
    #[serde(default = "default_side")]
    pub side: PvalueSide,
    #[serde(default = "default_method")]
    pub method: String,
}

/// One sweep cell. `power` is absent when the cell errored; the sweep
/// continues regardless.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub s: Option<f64>,
    pub n: usize,
    pub k0: usize,
    pub k1: usize,
    pub alpha0: f64,
    pub alpha1: f64,
    pub level: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub power: Option<f64>,
    pub method: String,
    pub flags: String,
    pub error: Option<String>,
}

/// Evaluate power over the whole grid in parallel, preserving grid order.
pub fn power_sweep(sweep: &SweepSpec) -> Result<Vec<SweepRow>> {
    let method = MethodChoice::parse(&sweep.method)?;
    let mut cells = Vec::new();
    for fam_name in &sweep.families {
        for &n in &sweep.n {
            for alt in &sweep.alternatives {
                for &level in &sweep.levels {
                    cells.push((fam_name.clone(), n, *alt, level));
                }
            }
        }
    }
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|(fam_name, n, alt, level)| {
            let (epsilon, mu) = alt.resolve(*n);
            let domain = sweep.domain.unwrap_or_else(|| SupDomain::default_for(*n));
            let mut row = SweepRow {
                family: fam_name.clone(),
                s: None,
                n: *n,
                k0: domain.k0,
                k1: domain.k1,
                alpha0: domain.alpha0,
                alpha1: domain.alpha1,
                level: *level,
                epsilon,
                mu,
                power: None,
                method: method.to_string(),
                flags: String::new(),
                error: None,
            };
            let run = || -> Result<SfOutcome> {
                let family = GofFamily::parse(fam_name)?;
                let spec = TestSpec::new(family, domain, *n)?;
                let h1 = MixtureModel::normal_mix(epsilon, mu);
                power(&spec, *level, &h1, sweep.side, method)
            };
            if let GofFamily::PhiDiv { s } = match GofFamily::parse(fam_name) {
                Ok(f) => f,
                Err(_) => GofFamily::KsPlus,
            } {
                row.s = Some(s);
            }
            match run() {
                Ok(out) => {
                    row.power = Some(out.value);
                    row.flags = out.flags();
                    row.method = out.routine;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Format with 12 significant digits, plain notation where reasonable.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&mag) {
        format!("{:.*e}", 11, x)
    } else {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t.is_empty() || t == "-" {
            "0".into()
        } else {
            t.to_string()
        }
    }
}

pub const SWEEP_CSV_HEADER: &str =
    "family,s,n,k0,k1,alpha0,alpha1,level,epsilon,mu,power,method,flags,error";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.s.map(fmt_sig).unwrap_or_default(),
            self.n,
            self.k0,
            self.k1,
            fmt_sig(self.alpha0),
            fmt_sig(self.alpha1),
            fmt_sig(self.level),
            fmt_sig(self.epsilon),
            fmt_sig(self.mu),
            self.power.map(fmt_sig).unwrap_or_default(),
            self.method,
            self.flags,
            self.error.clone().unwrap_or_default(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hc_spec(n: usize) -> TestSpec {
        TestSpec::with_default_domain(GofFamily::hc2004(), n).unwrap()
    }

    #[test]
    fn pvalue_limits() {
        let spec = hc_spec(20);
        assert_eq!(
            pvalue(&spec, f64::NEG_INFINITY, MethodChoice::ExactAuto)
                .unwrap()
                .value,
            1.0
        );
        assert_eq!(
            pvalue(&spec, f64::INFINITY, MethodChoice::ExactAuto)
                .unwrap()
                .value,
            0.0
        );
        assert!(pvalue(&spec, f64::NAN, MethodChoice::ExactAuto).is_err());
    }

    #[test]
    fn reference_thresholds_reproduced() {
        // published 5%/1% thresholds for n = 100, k1 = 50
        let spec = hc_spec(100);
        let p = pvalue(&spec, 4.723, MethodChoice::ExactAuto).unwrap();
        assert!((p.value - 0.05).abs() < 0.002, "pvalue {}", p.value);

        let bj = TestSpec::with_default_domain(GofFamily::berk_jones(), 100).unwrap();
        let b = critical_value(&bj, 0.01, MethodChoice::ExactAuto).unwrap();
        assert!((b - 3.354).abs() < 0.005, "bj crit {b}");

        let rbj = TestSpec::with_default_domain(GofFamily::reverse_berk_jones(), 50).unwrap();
        let b = critical_value(&rbj, 0.05, MethodChoice::ExactAuto).unwrap();
        assert!((b - 2.301).abs() < 0.005, "rbj crit {b}");

        let hc08 = TestSpec::with_default_domain(GofFamily::hc2008(), 100).unwrap();
        let b = critical_value(&hc08, 0.10, MethodChoice::ExactAuto).unwrap();
        assert!((b - 2.010).abs() < 0.005, "hc08 crit {b}");
    }

    #[test]
    fn critical_pvalue_roundtrip() {
        for (fam, n) in [
            (GofFamily::hc2004(), 40),
            (GofFamily::berk_jones(), 25),
            (GofFamily::KsPlus, 30),
        ] {
            let spec = TestSpec::with_default_domain(fam, n).unwrap();
            for level in [0.10, 0.05, 0.01] {
                let b = critical_value(&spec, level, MethodChoice::ExactAuto).unwrap();
                let p = pvalue(&spec, b, MethodChoice::ExactAuto).unwrap().value;
                assert!(
                    p <= level + 1e-9 && p >= level - 1e-6,
                    "{fam} n={n} level={level}: pvalue {p}"
                );
            }
        }
    }

    #[test]
    fn mc_pvalue_close_to_exact() {
        let spec = hc_spec(25);
        let b = critical_value(&spec, 0.05, MethodChoice::ExactAuto).unwrap();
        let mc = pvalue(
            &spec,
            b,
            MethodChoice::MonteCarlo {
                reps: 20_000,
                seed: 5,
            },
        )
        .unwrap();
        let se = mc.se.unwrap();
        assert!(
            (mc.value - 0.05).abs() < 3.0 * se + 1e-3,
            "mc {} se {}",
            mc.value,
            se
        );
    }

    #[test]
    fn power_at_epsilon_zero_equals_level() {
        let spec = hc_spec(30);
        let h1 = MixtureModel::normal_mix(0.0, 3.0);
        for level in [0.10, 0.05] {
            let p = power(&spec, level, &h1, PvalueSide::TwoSided, MethodChoice::ExactAuto)
                .unwrap()
                .value;
            assert!((p - level).abs() < 1e-6, "level {level}: power {p}");
        }
    }

    #[test]
    fn power_monotone_in_signal() {
        let spec = hc_spec(50);
        let mut prev = 0.0;
        for &mu in &[0.5, 1.0, 1.5, 2.0, 3.0, 20.0] {
            let h1 = MixtureModel::normal_mix(0.1, mu);
            let p = power(&spec, 0.05, &h1, PvalueSide::TwoSided, MethodChoice::ExactAuto)
                .unwrap()
                .value;
            assert!(p >= prev - 1e-9, "mu={mu}: {p} < {prev}");
            prev = p;
        }
        assert!(prev > 0.99, "power at mu=20 is {prev}");
        // and in epsilon
        prev = 0.0;
        for &eps in &[0.01, 0.05, 0.1, 0.2] {
            let h1 = MixtureModel::normal_mix(eps, 2.0);
            let p = power(&spec, 0.05, &h1, PvalueSide::TwoSided, MethodChoice::ExactAuto)
                .unwrap()
                .value;
            assert!(p >= prev - 1e-9, "eps={eps}: {p} < {prev}");
            prev = p;
        }
    }

    #[test]
    fn power_matches_monte_carlo() {
        let spec = hc_spec(40);
        let h1 = MixtureModel::normal_mix(0.1, 2.0);
        let exact = power(&spec, 0.05, &h1, PvalueSide::TwoSided, MethodChoice::ExactAuto)
            .unwrap()
            .value;
        let mc = power(
            &spec,
            0.05,
            &h1,
            PvalueSide::TwoSided,
            MethodChoice::MonteCarlo {
                reps: 20_000,
                seed: 3,
            },
        )
        .unwrap();
        // the MC critical value adds its own noise on top of the SF estimate
        assert!(
            (exact - mc.value).abs() < 5.0 * mc.se.unwrap() + 0.01,
            "exact {exact} mc {}",
            mc.value
        );
    }

    #[test]
    fn detection_boundary_shape() {
        assert!((detection_boundary(0.6).unwrap() - 0.1).abs() < 1e-15);
        let left = detection_boundary(0.75 - 1e-9).unwrap();
        let right = detection_boundary(0.75 + 1e-9).unwrap();
        assert!((left - 0.25).abs() < 1e-8);
        assert!((right - 0.25).abs() < 1e-8);
        let expect = (1.0 - 0.19f64.sqrt()).powi(2);
        assert!((detection_boundary(0.81).unwrap() - expect).abs() < 1e-15);
        // increasing
        let mut prev = 0.0;
        for i in 1..100 {
            let a = 0.5 + 0.005 * i as f64;
            if a >= 1.0 {
                break;
            }
            let v = detection_boundary(a).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(detection_boundary(0.5).is_err());
        assert!(detection_boundary(1.0).is_err());
    }

    #[test]
    fn gamma_and_exact_methods_agree_roughly() {
        let spec = hc_spec(60);
        let b = critical_value(&spec, 0.05, MethodChoice::ExactAuto).unwrap();
        let g = sf_h0(&spec, b, MethodChoice::GammaApprox).unwrap().value;
        assert!((g - 0.05).abs() < 0.02, "gamma sf {g}");
    }

    #[test]
    fn poisson_tail_method_in_deep_tail() {
        let spec = hc_spec(150);
        let b = critical_value(&spec, 0.01, MethodChoice::ExactAuto).unwrap();
        let p = sf_h0(&spec, b, MethodChoice::PoissonTail).unwrap().value;
        assert!((p / 0.01 - 1.0).abs() < 0.2, "poisson sf {p}");
    }

    #[test]
    fn sweep_single_cell_matches_power() {
        let sweep = SweepSpec {
            families: vec!["hc2004".into()],
            n: vec![40],
            levels: vec![0.05],
            alternatives: vec![AltSpec::NormalMix {
                epsilon: 0.1,
                mu: 2.0,
            }],
            domain: None,
            side: PvalueSide::TwoSided,
            method: "exact-auto".into(),
        };
        let rows = power_sweep(&sweep).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = power(
            &hc_spec(40),
            0.05,
            &MixtureModel::normal_mix(0.1, 2.0),
            PvalueSide::TwoSided,
            MethodChoice::ExactAuto,
        )
        .unwrap()
        .value;
        assert_eq!(rows[0].power, Some(direct));
        assert!(rows[0].error.is_none());
        assert_eq!(rows[0].s, Some(2.0));
    }

    #[test]
    fn sweep_survives_bad_cells() {
        let sweep = SweepSpec {
            families: vec!["nosuch".into(), "ks".into()],
            n: vec![20],
            levels: vec![0.05],
            alternatives: vec![AltSpec::Sparse { alpha: 0.9, r: 0.3 }],
            domain: None,
            side: PvalueSide::TwoSided,
            method: "exact-auto".into(),
        };
        let rows = power_sweep(&sweep).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.is_some());
        assert!(rows[0].power.is_none());
        assert!(rows[1].error.is_none());
        assert!(rows[1].power.is_some());
        // sparse parameterization resolved to concrete epsilon/mu
        assert!((rows[1].epsilon - 20f64.powf(-0.9)).abs() < 1e-15);
        let csv = rows[1].to_csv();
        assert_eq!(csv.split(',').count(), 14);
    }

    #[test]
    fn method_parsing() {
        assert_eq!(MethodChoice::parse("exact").unwrap(), MethodChoice::ExactAuto);
        assert_eq!(MethodChoice::parse("gamma").unwrap(), MethodChoice::GammaApprox);
        assert_eq!(
            MethodChoice::parse("mc:reps=100,seed=9").unwrap(),
            MethodChoice::MonteCarlo { reps: 100, seed: 9 }
        );
        assert!(MethodChoice::parse("bogus").is_err());
        assert!(MethodChoice::parse("mc:reps=x").is_err());
    }

    #[test]
    fn fmt_sig_examples() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.05), "0.05");
        assert_eq!(fmt_sig(3.354), "3.354");
        assert_eq!(fmt_sig(1.0), "1");
        assert!(fmt_sig(1.23e-9).contains('e'));
    }
}
