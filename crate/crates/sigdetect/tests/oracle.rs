//! Cross-checks of the exact CDF recursions against an independent
//! brute-force oracle at small n, plus frozen reference values from the
//! closed-form one-sided KS distribution.

mod common;

use common::{crossing_cdf_bruteforce, domain_grid, family_grid, random_family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigdetect::exact::{
    cdf_general, cdf_index_trunc, cdf_modified, cdf_pvalue_trunc, BoundaryVector,
};
use sigdetect::gof::{GofFamily, SupDomain};
use sigdetect::models::DTransform;

fn build(family: GofFamily, b: f64, n: usize, dom: SupDomain) -> BoundaryVector {
    BoundaryVector::build(family, &DTransform::null(), b, n, dom).unwrap()
}

/// Every implemented routine applicable to the domain, as (name, value).
fn all_routines(bv: &BoundaryVector) -> Vec<(&'static str, f64)> {
    let d = bv.domain;
    let mut out = vec![("general", cdf_general(bv).unwrap().value)];
    if d.is_index_trunc() {
        out.push(("index_trunc", cdf_index_trunc(bv).unwrap().value));
    }
    if d.is_pvalue_trunc(bv.n) {
        out.push(("pvalue_trunc", cdf_pvalue_trunc(bv).unwrap().value));
    }
    if d.alpha1 == 1.0 {
        out.push(("modified", cdf_modified(bv).unwrap().value));
    }
    out
}

#[test]
fn ks_worked_value_n2() {
    // n = 2, KS+, threshold 0.25, full domain: P = 0.3125 by hand.
    let bv = build(GofFamily::KsPlus, 0.25, 2, SupDomain::full(2));
    assert!((crossing_cdf_bruteforce(&bv) - 0.3125).abs() < 1e-12);
    for (name, v) in all_routines(&bv) {
        assert!((v - 0.3125).abs() < 1e-12, "{name} gave {v}");
    }
}

#[test]
fn bruteforce_matches_exact_small_n() {
    let mut checked = 0usize;
    for n in 2..=6 {
        for (family, bs) in family_grid() {
            for &b in &bs {
                for dom in domain_grid(n) {
                    let bv = build(family, b, n, dom);
                    let want = crossing_cdf_bruteforce(&bv);
                    for (name, got) in all_routines(&bv) {
                        assert!(
                            (got - want).abs() < 1e-7,
                            "{family:?} n={n} b={b} dom={dom:?} {name}: got {got}, oracle {want}"
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 500);
}

#[test]
fn bruteforce_matches_exact_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for case in 0..200 {
        let n = rng.random_range(2..=7usize);
        let (family, b) = random_family(&mut rng);
        let k0 = rng.random_range(1..=n);
        let k1 = rng.random_range(k0..=n);
        let alpha0: f64 = if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..0.5)
        };
        let alpha1 = if rng.random_bool(0.5) {
            1.0
        } else {
            rng.random_range(alpha0.max(0.5)..1.0)
        };
        let dom = SupDomain {
            k0,
            k1,
            alpha0,
            alpha1,
        };
        let bv = build(family, b, n, dom);
        let want = crossing_cdf_bruteforce(&bv);
        for (name, got) in all_routines(&bv) {
            assert!(
                (got - want).abs() < 1e-7,
                "case {case}: {family:?} n={n} b={b} dom={dom:?} {name}: got {got}, oracle {want}"
            );
        }
    }
}

/// Closed-form one-sided KS lower tail (Birnbaum-Tingey), frozen from an
/// independent high-precision evaluation.
#[test]
fn ks_closed_form_reference() {
    let bv = build(GofFamily::KsPlus, 0.01, 50, SupDomain::full(50));
    let r = cdf_general(&bv).unwrap();
    let want = 0.016283483384593324;
    assert!(
        ((r.value - want) / want).abs() < 1e-9,
        "got {}, want {want}",
        r.value
    );
}
