//! Maximum-likelihood IIA fit, i.e. the KL projection onto the IIA family.
//!
//! Set weights of the projection are the set marginals of `q`. Qualities
//! `γ = softmax(θ)` minimize the convex function
//! `F(θ) = −Σ_j θ_j a_j + Σ_C w_C log Σ_{k∈C} e^{θ_k}`, where `a` are the item
//! marginals. `F` depends on `q` only through those two marginal vectors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::system::{ChoiceSystem, IiaSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlConfig {
    /// Stop once the gradient norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Optional `λ/2 ‖θ‖²` term; keeps the fit finite when an item is never chosen.
    pub ridge: f64,
}

impl Default for KlConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, ridge: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlFit {
    pub system: IiaSystem,
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub fn kl_projection(q: &ChoiceSystem) -> Result<IiaSystem> {
    Ok(kl_projection_with(q, &KlConfig::default())?.system)
}

pub fn kl_projection_with(q: &ChoiceSystem, cfg: &KlConfig) -> Result<KlFit> {
    let coll = q.collection();
    let w = q.set_marginals();
    if let Some(c) = w.iter().position(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter(format!("set {c} has zero weight; the projection needs positive set weights")));
    }
    let a = q.item_marginals();
    let problem = LogitProblem::new(coll, &a, &w, cfg.ridge);
    let (theta, iterations, grad_norm) = problem.solve(None, cfg)?;
    let gamma = softmax(&theta).into_iter().map(|g| g.max(1e-300)).collect();
    let system = IiaSystem::new(gamma, w)?;
    Ok(KlFit { system, theta, iterations, grad_norm })
}

pub(crate) fn softmax(theta: &[f64]) -> Vec<f64> {
    let top = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// The convex program in `θ` for given item and set marginals.
pub(crate) struct LogitProblem<'a> {
    coll: &'a Collection,
    items: &'a [f64],
    sets: &'a [f64],
    ridge: f64,
}

impl<'a> LogitProblem<'a> {
    pub(crate) fn new(coll: &'a Collection, items: &'a [f64], sets: &'a [f64], ridge: f64) -> Self {
        Self { coll, items, sets, ridge }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut f: f64 = -theta.iter().zip(self.items).map(|(t, a)| t * a).sum::<f64>();
        f += 0.5 * self.ridge * theta.iter().map(|t| t * t).sum::<f64>();
        for (set, &w) in self.coll.sets().iter().zip(self.sets) {
            if w > 0.0 {
                let top = set.iter().map(|&k| theta[k]).fold(f64::NEG_INFINITY, f64::max);
                let lse = top + set.iter().map(|&k| (theta[k] - top).exp()).sum::<f64>().ln();
                f += w * lse;
            }
        }
        f
    }

    fn grad_hess(&self, theta: &[f64], g: &mut DVector<f64>, h: &mut DMatrix<f64>, p: &mut Vec<f64>) {
        let n = theta.len();
        h.fill(0.0);
        for j in 0..n {
            g[j] = self.ridge * theta[j] - self.items[j];
            h[(j, j)] = self.ridge;
        }
        for (set, &w) in self.coll.sets().iter().zip(self.sets) {
            if w <= 0.0 {
                continue;
            }
            let top = set.iter().map(|&k| theta[k]).fold(f64::NEG_INFINITY, f64::max);
            p.clear();
            p.extend(set.iter().map(|&k| (theta[k] - top).exp()));
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
            for (a, &j) in set.iter().enumerate() {
                g[j] += w * p[a];
                h[(j, j)] += w * p[a];
                for (b, &k) in set.iter().enumerate() {
                    h[(j, k)] -= w * p[a] * p[b];
                }
            }
        }
    }

    /// Damped Newton from `start` (zeros when absent). Returns `θ`, the
    /// iteration count and the final gradient norm.
    pub(crate) fn solve(&self, start: Option<&[f64]>, cfg: &KlConfig) -> Result<(Vec<f64>, usize, f64)> {
        let n = self.coll.n_items();
        let mut theta = start.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        let mut p = Vec::new();
        let mut gnorm = f64::INFINITY;
        for it in 0..=cfg.max_iter {
            self.grad_hess(&theta, &mut g, &mut h, &mut p);
            gnorm = g.norm();
            if gnorm <= cfg.tol {
                return Ok((theta, it, gnorm));
            }
            if it == cfg.max_iter {
                break;
            }
            if self.ridge == 0.0 {
                // the objective is flat along the all-ones direction
                h.add_scalar_mut(1.0);
            }
            let mut dir = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => -&g,
            };
            let mut slope = g.dot(&dir);
            if !(slope < 0.0) {
                dir = -&g;
                slope = -gnorm * gnorm;
            }
            let f0 = self.value(&theta);
            let mut step = 1.0;
            let mut next: Vec<f64>;
            loop {
                next = theta.iter().zip(dir.iter()).map(|(t, d)| t + step * d).collect();
                let f1 = self.value(&next);
                // near the optimum the decrease is below rounding; trust the full step
                if f1 <= f0 + 1e-4 * step * slope || (step == 1.0 && gnorm < 1e-6) {
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    return Err(Error::NonConvergence { iterations: it, grad_norm: gnorm });
                }
            }
            theta = next;
            if self.ridge == 0.0 {
                let mean = theta.iter().sum::<f64>() / n as f64;
                theta.iter_mut().for_each(|t| *t -= mean);
            }
        }
        Err(Error::NonConvergence { iterations: cfg.max_iter, grad_norm: gnorm })
    }

    /// Within-set probabilities of the fit, in canonical order.
    pub(crate) fn within_set(&self, theta: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for set in self.coll.sets() {
            let top = set.iter().map(|&k| theta[k]).fold(f64::NEG_INFINITY, f64::max);
            let start = out.len();
            out.extend(set.iter().map(|&k| (theta[k] - top).exp()));
            let total: f64 = out[start..].iter().sum();
            out[start..].iter_mut().for_each(|v| *v /= total);
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::collection::presets;
    use crate::system::{expand_iia, tv_distance, uniform_system};

    #[test]
    fn members_are_fixed_points() {
        let coll = Arc::new(presets::twin_pairs());
        let sys = IiaSystem::new(vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.3, 0.2]).unwrap();
        let q = expand_iia(&sys, &coll).unwrap();
        let fit = kl_projection(&q).unwrap();
        let back = expand_iia(&fit, &coll).unwrap();
        for (a, b) in q.probs().iter().zip(back.probs()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn uniform_on_equal_sets() {
        let coll = Arc::new(presets::all_pairs(5).unwrap());
        let fit = kl_projection(&uniform_system(&coll)).unwrap();
        assert!(fit.gamma().iter().all(|g| (g - 0.2).abs() < 1e-12));
        assert!(fit.set_weights().iter().all(|w| (w - 0.1).abs() < 1e-12));
    }

    #[test]
    fn boundary_fit_and_iteration_cap() {
        let coll = Arc::new(Collection::parse("a,b\nb,c\n").unwrap());
        let q = ChoiceSystem::new(coll.clone(), vec![0.0, 0.5, 0.25, 0.25]).unwrap();
        let err = kl_projection_with(&q, &KlConfig { max_iter: 2, ..Default::default() });
        assert!(matches!(err, Err(Error::NonConvergence { iterations: 2, .. })));
        for ridge in [0.0, 1e-6] {
            let fit = kl_projection_with(&q, &KlConfig { ridge, ..Default::default() }).unwrap();
            let back = expand_iia(&fit.system, &coll).unwrap();
            assert!(tv_distance(&q, &back).unwrap() < 1e-3);
        }
    }
}
