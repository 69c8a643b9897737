//! Seeded simulation oracle: sample statistics under arbitrary mixture
//! models and estimate empirical tail probabilities.

use crate::error::{Error, Result};
use crate::gof::{statistic, GofFamily, SupDomain};
use crate::models::{pvalues_from_stats, ComponentDist, ExpParam, MixtureModel, PvalueSide};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Gamma, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Simulation settings. Identical (seed, chunk, reps) produce bit-identical
/// sample streams regardless of thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub reps: usize,
    pub seed: u64,
    /// Reps per deterministic RNG chunk; affects the stream keying, not the
    /// results' dependence on scheduling.
    pub chunk: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            reps: 5000,
            seed: 0,
            chunk: 256,
        }
    }
}

impl SimConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        SimConfig {
            reps,
            seed,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.chunk == 0 {
            return Err(Error::Domain("reps and chunk must be >= 1".into()));
        }
        Ok(())
    }

    /// Per-repetition generator, keyed by (seed, chunk index, index within
    /// chunk) so serial and parallel runs agree bit-for-bit.
    fn rep_rng(&self, rep: usize) -> ChaCha8Rng {
        let chunk_idx = (rep / self.chunk) as u64;
        let within = (rep % self.chunk) as u64;
        let mut key = splitmix64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        key = splitmix64(key ^ chunk_idx);
        key = splitmix64(key ^ within);
        ChaCha8Rng::seed_from_u64(key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One draw from a component distribution, built constructively (normal and
/// chi-square composition) so sampling accuracy does not depend on quantile
/// inversion.
pub fn sample_component<R: Rng + ?Sized>(dist: &ComponentDist, rng: &mut R) -> f64 {
    match *dist {
        ComponentDist::Normal { mu, sigma } => {
            Normal::new(mu, sigma).unwrap().sample(rng)
        }
        ComponentDist::StudentT { nu, delta } => {
            let z: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
            let w: f64 = ChiSquared::new(nu).unwrap().sample(rng);
            (z + delta) / (w / nu).sqrt()
        }
        ComponentDist::ChiSquare { nu, delta } => {
            if delta == 0.0 {
                ChiSquared::new(nu).unwrap().sample(rng)
            } else if nu >= 1.0 {
                let z: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
                let head = (z + delta.sqrt()).powi(2);
                if nu > 1.0 {
                    head + ChiSquared::new(nu - 1.0).unwrap().sample(rng)
                } else {
                    head
                }
            } else {
                // fractional degrees of freedom: Poisson-mixture construction
                let k: f64 = Poisson::new(delta / 2.0).unwrap().sample(rng);
                ChiSquared::new(nu + 2.0 * k).unwrap().sample(rng)
            }
        }
        ComponentDist::Exponential {
            nu,
            parameterization,
        } => {
            let rate = match parameterization {
                ExpParam::Rate => nu,
                ExpParam::Scale => 1.0 / nu,
            };
            Exp::new(rate).unwrap().sample(rng)
        }
        ComponentDist::GenNormal { p, mu, sigma } => {
            let g: f64 = Gamma::new(1.0 / p, 1.0).unwrap().sample(rng);
            let r = (p * sigma.powf(p) * g).powf(1.0 / p);
            if rng.random::<bool>() {
                mu + r
            } else {
                mu - r
            }
        }
    }
}

/// One draw from the mixture. With epsilon = 0 no mixing coin is tossed, so
/// the stream matches the pure-null model exactly.
pub fn sample_mixture<R: Rng + ?Sized>(model: &MixtureModel, rng: &mut R) -> f64 {
    if model.epsilon == 0.0 {
        sample_component(&model.null, rng)
    } else if rng.random::<f64>() < model.epsilon {
        sample_component(&model.signal, rng)
    } else {
        sample_component(&model.null, rng)
    }
}

/// `reps` statistic values: each repetition draws n observations from the
/// model, forms p-values under the model's null component, and evaluates the
/// supremum statistic.
pub fn sample_stats(
    model: &MixtureModel,
    family: GofFamily,
    domain: SupDomain,
    n: usize,
    side: PvalueSide,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    model.validate()?;
    family.validate()?;
    domain.validate(n)?;
    if side == PvalueSide::TwoSided && !model.null.is_symmetric_about_zero() {
        return Err(Error::AsymmetricTwoSided(format!("{:?}", model.null)));
    }
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rep_rng(rep);
            let xs: Vec<f64> = (0..n).map(|_| sample_mixture(model, &mut rng)).collect();
            let pv = pvalues_from_stats(&xs, &model.null, side)?;
            Ok(statistic(family, &pv.values, domain)?.value)
        })
        .collect()
}

/// An empirical tail probability with its binomial standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SfEstimate {
    pub value: f64,
    pub se: f64,
    pub reps: usize,
}

/// Fraction of samples >= b (ties count as exceeding) with binomial SE.
pub fn empirical_sf(samples: &[f64], b: f64) -> Result<SfEstimate> {
    if samples.is_empty() {
        return Err(Error::Domain("empirical_sf requires nonempty samples".into()));
    }
    let reps = samples.len();
    let hits = samples.iter().filter(|&&x| x >= b).count();
    let p = hits as f64 / reps as f64;
    Ok(SfEstimate {
        value: p,
        se: (p * (1.0 - p) / reps as f64).sqrt(),
        reps,
    })
}
