//! Shared helpers for integration tests: a small-n brute-force oracle for the
//! boundary-crossing probability, computed by exact piecewise-polynomial
//! integration over the ordered simplex.

use rand::Rng;
use sigdetect::exact::BoundaryVector;
use sigdetect::gof::{GofFamily, SupDomain};

/// P(U_(k) not in [beta0, min(beta1, u_k)] for every k in [k0, k1]) where
/// U_(1) <= ... <= U_(n) are uniform order statistics.
///
/// The unit interval is split at every interval endpoint, so each segment is
/// entirely inside or outside each forbidden interval. The joint density of
/// the order statistics is n! on the simplex; an assignment placing m_j of
/// them in segment j (in order) has probability n! * prod_j L_j^m_j / m_j!.
/// We enumerate all assignments and keep those violating no constraint.
/// Exact up to f64 arithmetic; practical for n up to ~8.
pub fn crossing_cdf_bruteforce(bv: &BoundaryVector) -> f64 {
    let n = bv.n;
    let d = bv.domain;
    let (b0, b1) = (bv.beta0, bv.beta1);

    let tops: Vec<f64> = (d.k0..=d.k1).map(|k| bv.uk(k).min(b1)).collect();
    let mut pts: Vec<f64> = vec![0.0, 1.0, b0.clamp(0.0, 1.0)];
    pts.extend(tops.iter().map(|t| t.clamp(0.0, 1.0)));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    let segs: Vec<(f64, f64)> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();

    // forbidden[j][i]: order statistic k0+i may not land in segment j
    let forbidden: Vec<Vec<bool>> = segs
        .iter()
        .map(|&(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            tops.iter().map(|&t| mid > b0 && mid < t).collect()
        })
        .collect();

    let lens: Vec<f64> = segs.iter().map(|&(lo, hi)| hi - lo).collect();
    let n_fact: f64 = (1..=n).map(|i| i as f64).product();

    let mut total = 0.0;
    dfs(
        &lens, &forbidden, n, d.k0, d.k1, 0, 0, n_fact, &mut total,
    );
    total
}

/// (family, plausible thresholds) pairs covering all closed-form and
/// bisection-based boundary inversions.
pub fn family_grid() -> Vec<(GofFamily, Vec<f64>)> {
    vec![
        (GofFamily::hc2004(), vec![0.8, 1.5, 3.0]),
        (GofFamily::hc2008(), vec![0.8, 1.5, 2.5]),
        (GofFamily::berk_jones(), vec![0.3, 1.0, 2.0]),
        (GofFamily::reverse_berk_jones(), vec![0.3, 1.0, 2.0]),
        (GofFamily::KsPlus, vec![0.1, 0.3, 0.6]),
        (GofFamily::PhiDiv { s: 0.7 }, vec![0.3, 1.0, 2.0]),
        (GofFamily::PhiDiv { s: -2.5 }, vec![0.8, 1.5, 2.5]),
    ]
}

/// Domain shapes hitting every routine specialization at sample size n.
pub fn domain_grid(n: usize) -> Vec<SupDomain> {
    let mut doms = vec![
        SupDomain::default_for(n),
        SupDomain::full(n),
        SupDomain {
            k0: 1,
            k1: n,
            alpha0: 0.1,
            alpha1: 0.8,
        },
        SupDomain {
            k0: 1,
            k1: n,
            alpha0: 0.2,
            alpha1: 1.0,
        },
    ];
    if n >= 2 {
        doms.push(SupDomain::indices(2, n));
        doms.push(SupDomain {
            k0: 2,
            k1: n,
            alpha0: 1.0 / n as f64,
            alpha1: 1.0,
        });
        doms.push(SupDomain {
            k0: 1,
            k1: n - 1,
            alpha0: 0.05,
            alpha1: 0.9,
        });
    }
    doms
}

/// A random family with a threshold drawn from a range where its boundary is
/// nondegenerate.
pub fn random_family<R: Rng>(rng: &mut R) -> (GofFamily, f64) {
    match rng.random_range(0..6u8) {
        0 => (GofFamily::hc2004(), rng.random_range(0.8..4.0)),
        1 => (GofFamily::hc2008(), rng.random_range(0.8..3.0)),
        2 => (GofFamily::berk_jones(), rng.random_range(0.3..3.0)),
        3 => (GofFamily::reverse_berk_jones(), rng.random_range(0.3..3.0)),
        4 => (GofFamily::KsPlus, rng.random_range(0.05..0.8)),
        _ => (
            GofFamily::PhiDiv {
                s: rng.random_range(-5.0..5.0),
            },
            rng.random_range(0.5..3.0),
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    lens: &[f64],
    forbidden: &[Vec<bool>],
    n: usize,
    k0: usize,
    k1: usize,
    j: usize,
    placed: usize,
    acc: f64,
    total: &mut f64,
) {
    if j == lens.len() {
        if placed == n {
            *total += acc;
        }
        return;
    }
    let mut term = acc;
    for m in 0..=(n - placed) {
        if m > 0 {
            let k = placed + m; // 1-based index of the newly placed order stat
            if k >= k0 && k <= k1 && forbidden[j][k - k0] {
                break; // any larger m also contains position k
            }
            term *= lens[j] / m as f64;
        }
        dfs(lens, forbidden, n, k0, k1, j + 1, placed + m, term, total);
    }
}
