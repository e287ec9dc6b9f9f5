//! Choice systems, IIA-structured systems and the divergences between them.

use std::sync::Arc;

use serde::Serialize;

use crate::collection::Collection;
use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Inputs this close to unit mass are renormalized instead of rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

fn normalize(mut values: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entry {i} = {} is negative or not finite",
            values[i]
        )));
    }
    let total: f64 = values.iter().sum();
    let gap = (total - 1.0).abs();
    if gap > RENORMALIZE_TOL {
        return Err(Error::InvalidDistribution(format!("{what}: entries sum to {total}, not 1")));
    }
    if gap > NORMALIZATION_TOL {
        values.iter_mut().for_each(|v| *v /= total);
    }
    Ok(values)
}

/// A distribution over the `d` canonical `(item, set)` pairs of a collection.
#[derive(Debug, Clone, Serialize)]
pub struct ChoiceSystem {
    #[serde(skip)]
    collection: Arc<Collection>,
    probs: Vec<f64>,
}

impl ChoiceSystem {
    /// Validates and wraps a probability vector in canonical order.
    ///
    /// Zero entries are allowed, but every set must carry positive weight.
    pub fn new(collection: Arc<Collection>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != collection.d() {
            return Err(Error::DimensionMismatch { expected: collection.d(), found: probs.len() });
        }
        let probs = normalize(probs, "choice system")?;
        for c in 0..collection.n_sets() {
            let w: f64 = probs[collection.set_range(c)].iter().sum();
            if w <= 0.0 {
                return Err(Error::InvalidDistribution(format!("set {c} has zero weight")));
            }
        }
        Ok(Self { collection, probs })
    }

    pub fn collection(&self) -> &Arc<Collection> {
        &self.collection
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn d(&self) -> usize {
        self.probs.len()
    }

    /// Set weight `w(C)`.
    pub fn set_weight(&self, c: usize) -> f64 {
        self.probs[self.collection.set_range(c)].iter().sum()
    }

    /// Set weights for every set.
    pub fn set_marginals(&self) -> Vec<f64> {
        (0..self.collection.n_sets()).map(|c| self.set_weight(c)).collect()
    }

    /// Total mass on each item across all sets.
    pub fn item_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.collection.n_items()];
        for (i, &(x, _)) in self.collection.pairs().iter().enumerate() {
            out[x] += self.probs[i];
        }
        out
    }

    /// Within-set choice probability `P_{x,C}` for the pair at canonical index `i`.
    pub fn within_set(&self, i: usize) -> f64 {
        let (_, c) = self.collection.pair(i);
        self.probs[i] / self.set_weight(c)
    }

    fn check_same(&self, other: &ChoiceSystem) -> Result<()> {
        if Arc::ptr_eq(&self.collection, &other.collection) || *self.collection == *other.collection {
            Ok(())
        } else {
            Err(Error::CollectionMismatch)
        }
    }
}

/// An IIA (multinomial logit) system: item qualities and set weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IiaSystem {
    gamma: Vec<f64>,
    set_weights: Vec<f64>,
}

impl IiaSystem {
    pub fn new(gamma: Vec<f64>, set_weights: Vec<f64>) -> Result<Self> {
        let gamma = normalize(gamma, "gamma")?;
        let set_weights = normalize(set_weights, "set weights")?;
        if gamma.iter().chain(&set_weights).any(|&v| v <= 0.0) {
            return Err(Error::InvalidDistribution("IIA parameters must be strictly positive".into()));
        }
        Ok(Self { gamma, set_weights })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn set_weights(&self) -> &[f64] {
        &self.set_weights
    }
}

/// Expands an IIA system into its choice system via the ratio representation.
pub fn expand_iia(sys: &IiaSystem, coll: &Arc<Collection>) -> Result<ChoiceSystem> {
    if sys.gamma.len() != coll.n_items() {
        return Err(Error::DimensionMismatch { expected: coll.n_items(), found: sys.gamma.len() });
    }
    if sys.set_weights.len() != coll.n_sets() {
        return Err(Error::DimensionMismatch { expected: coll.n_sets(), found: sys.set_weights.len() });
    }
    let probs = expand_raw(&sys.gamma, &sys.set_weights, coll);
    ChoiceSystem::new(Arc::clone(coll), probs)
}

/// Ratio-representation expansion without validation. `gamma` need not be normalized.
pub(crate) fn expand_raw(gamma: &[f64], set_weights: &[f64], coll: &Collection) -> Vec<f64> {
    let mut probs = Vec::with_capacity(coll.d());
    for (c, set) in coll.sets().iter().enumerate() {
        let total: f64 = set.iter().map(|&z| gamma[z]).sum();
        probs.extend(set.iter().map(|&x| set_weights[c] * gamma[x] / total));
    }
    probs
}

/// The uniform choice system `p0` with every entry `1/d`.
pub fn uniform_system(coll: &Arc<Collection>) -> ChoiceSystem {
    let d = coll.d();
    ChoiceSystem { collection: Arc::clone(coll), probs: vec![1.0 / d as f64; d] }
}

/// IIA parameters reproducing the uniform system: equal qualities and set
/// weights proportional to set size. The uniform system is IIA for every collection.
pub fn uniform_iia_witness(coll: &Collection) -> IiaSystem {
    let d = coll.d() as f64;
    let gamma = vec![1.0 / coll.n_items() as f64; coll.n_items()];
    let w = coll.sets().iter().map(|s| s.len() as f64 / d).collect();
    IiaSystem::new(gamma, w).expect("uniform parameters are valid")
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &ChoiceSystem, q: &ChoiceSystem) -> Result<f64> {
    p.check_same(q)?;
    Ok(tv_raw(&p.probs, &q.probs))
}

pub(crate) fn tv_raw(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `χ²(p, q) = Σ p_i² / q_i − 1`.
pub fn chi_squared(p: &ChoiceSystem, q: &ChoiceSystem) -> Result<f64> {
    p.check_same(q)?;
    let mut total = 0.0;
    for (i, (&a, &b)) in p.probs.iter().zip(&q.probs).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::SupportViolation { index: i });
        }
        total += a * a / b;
    }
    Ok((total - 1.0).max(0.0))
}

/// `KL(q ‖ p) = Σ q_i log(q_i / p_i)` with `0 log 0 = 0`.
pub fn kl_divergence(q: &ChoiceSystem, p: &ChoiceSystem) -> Result<f64> {
    q.check_same(p)?;
    let mut total = 0.0;
    for (i, (&a, &b)) in q.probs.iter().zip(&p.probs).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::SupportViolation { index: i });
        }
        total += a * (a / b).ln();
    }
    Ok(total.max(0.0))
}

/// Shannon entropy in nats.
pub fn entropy(p: &ChoiceSystem) -> f64 {
    -p.probs.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}
