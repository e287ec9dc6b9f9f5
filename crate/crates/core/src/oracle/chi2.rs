//! Exact χ² between the uniform product measure and the mixture alternative,
//! and the inequality chain leading from it to the risk bound.
//!
//! For a family of `M` orientations with perturbation size `ε`,
//! `χ² + 1 = (1/M²) Σ_{b,b'} (1 + ε² bᵀb'/d)^N`. With all `2^s` orientations the
//! product `bᵀb'` is `Σ_i |σ_i| s_i` for independent uniform signs `s_i`, so the
//! same quantity is an expectation over a sum of independent `±|σ_i|` terms.

use serde::Serialize;

use crate::bounds::{risk_lower_bound, BoundInput};
use crate::error::{Error, Result};
use crate::perturbation::{inner_product, perturbed_probs, FamilyMode, PerturbationFamily};

/// Largest exhaustive family accepted.
pub const MAX_CHI2_FAMILY: usize = 1 << 14;
/// Largest `d^N` for exact total variation over outcome sequences.
pub const MAX_SEQUENCES: f64 = 1e6;
/// Pairs summed entrywise (rather than by cycle weights) up to this family size.
const ENTRYWISE_FAMILY: usize = 1 << 10;

/// Agreement required between the two evaluation paths.
pub const PATH_TOL: f64 = 1e-12;
/// Smallest slack accepted on a link of the chain.
pub const LINK_TOL: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Report {
    pub n_samples: u64,
    pub epsilon: f64,
    pub family_size: usize,
    pub d: usize,
    pub alpha: f64,
    /// `χ²(P1, P0)`.
    pub chi2: f64,
    /// `χ² + 1` from the pairwise double sum.
    pub pairwise: f64,
    /// `χ² + 1` from the distribution of `bᵀb'`.
    pub by_cycles: f64,
    /// `(1/M²) Σ exp(N ε² bᵀb'/d)`, pairwise.
    pub exp_pairwise: f64,
    /// The same as a product of `cosh(N ε² |σ_i| / d)`.
    pub exp_cosh: f64,
    /// `exp(N² ε⁴ α / (2d))`.
    pub exp_alpha: f64,
}

fn check_family(fam: &PerturbationFamily) -> Result<()> {
    if fam.mode() != FamilyMode::Exhaustive {
        return Err(Error::InvalidParameter("exact χ² needs the exhaustive family".into()));
    }
    if fam.len() > MAX_CHI2_FAMILY {
        return Err(Error::Guard(format!(
            "exact χ² needs at most {MAX_CHI2_FAMILY} orientations, got {}",
            fam.len()
        )));
    }
    Ok(())
}

/// Compensated sum.
#[derive(Default)]
struct Sum {
    total: f64,
    carry: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.carry += (self.total - t) + v;
        } else {
            self.carry += (v - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.carry
    }
}

/// Pairwise mean of `f(bᵀb')` over all ordered pairs of the family.
fn pairwise_mean(fam: &PerturbationFamily, f: impl Fn(i64) -> f64) -> Result<f64> {
    let m = fam.len();
    let lengths = fam.cycle_lengths();
    let mut sum = Sum::default();
    if m <= ENTRYWISE_FAMILY {
        let os = fam.orientations();
        for b in os {
            for b2 in os {
                sum.add(f(inner_product(b, b2, lengths)?));
            }
        }
    } else {
        // family index k has a_i = -1 exactly for the set bits of k, so the
        // product depends on k xor k' only
        let d = fam.d() as i64;
        let table: Vec<f64> = (0..m)
            .map(|x| {
                let flipped: i64 =
                    lengths.iter().enumerate().filter(|(i, _)| x >> i & 1 == 1).map(|(_, &l)| l as i64).sum();
                f(d - 2 * flipped)
            })
            .collect();
        for k in 0..m {
            for k2 in 0..m {
                sum.add(table[k ^ k2]);
            }
        }
    }
    Ok(sum.value() / (m as f64 * m as f64))
}

/// Distribution of `Σ_i |σ_i| s_i` over independent uniform signs, indexed by
/// `S + d`.
fn signed_sum_distribution(lengths: &[usize], d: usize) -> Vec<f64> {
    let mut dist = vec![0.0; 2 * d + 1];
    dist[d] = 1.0;
    for &l in lengths {
        let mut next = vec![0.0; 2 * d + 1];
        for (i, &p) in dist.iter().enumerate() {
            if p > 0.0 {
                next[i + l] += 0.5 * p;
                next[i - l] += 0.5 * p;
            }
        }
        dist = next;
    }
    dist
}

pub fn exact_chi2_mixture(fam: &PerturbationFamily, n_samples: u64) -> Result<Chi2Report> {
    check_family(fam)?;
    let d = fam.d();
    let df = d as f64;
    let eps2 = fam.epsilon() * fam.epsilon();
    let nf = n_samples as f64;
    let poly = |s: i64| -> f64 {
        if n_samples == 0 {
            1.0
        } else {
            (1.0 + eps2 * s as f64 / df).powf(nf)
        }
    };
    let pairwise = pairwise_mean(fam, poly)?;
    let dist = signed_sum_distribution(fam.cycle_lengths(), d);
    let mut by = Sum::default();
    for (i, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            by.add(p * poly(i as i64 - d as i64));
        }
    }
    let by_cycles = by.value();
    if (pairwise - by_cycles).abs() > PATH_TOL * pairwise.abs().max(1.0) {
        return Err(Error::Guard(format!(
            "χ² evaluation paths disagree: pairwise {pairwise} vs by cycles {by_cycles}"
        )));
    }
    let scale = nf * eps2 / df;
    let exp_pairwise = pairwise_mean(fam, |s| (scale * s as f64).exp())?;
    let exp_cosh: f64 = fam.cycle_lengths().iter().map(|&l| (scale * l as f64).cosh()).product();
    if (exp_pairwise - exp_cosh).abs() > PATH_TOL * exp_cosh.abs().max(1.0) {
        return Err(Error::Guard(format!(
            "exponential sum paths disagree: pairwise {exp_pairwise} vs cosh product {exp_cosh}"
        )));
    }
    let alpha = fam.alpha();
    Ok(Chi2Report {
        n_samples,
        epsilon: fam.epsilon(),
        family_size: fam.len(),
        d,
        alpha,
        chi2: (by_cycles - 1.0).max(0.0),
        pairwise,
        by_cycles,
        exp_pairwise,
        exp_cosh,
        exp_alpha: (nf * nf * eps2 * eps2 * alpha / (2.0 * df)).exp(),
    })
}

/// `TV(P0, P1)` between the uniform product measure and the mixture over
/// `N`-record datasets, summed over count vectors (each stands for all its
/// orderings). `None` when `d^N` exceeds the enumeration guard.
pub fn mixture_tv(fam: &PerturbationFamily, n_samples: u64) -> Result<Option<f64>> {
    check_family(fam)?;
    let d = fam.d();
    if (d as f64).powf(n_samples as f64) > MAX_SEQUENCES {
        return Ok(None);
    }
    let n = n_samples as usize;
    let members: Vec<Vec<f64>> =
        fam.orientations().iter().map(|o| perturbed_probs(&o.b, fam.epsilon())).collect();
    let ln_fact: Vec<f64> = (0..=n).scan(0.0, |acc, k| {
        if k > 0 {
            *acc += (k as f64).ln();
        }
        Some(*acc)
    }).collect();
    let p0 = (d as f64).powi(-(n as i32));
    let m = members.len() as f64;
    let mut counts = vec![0usize; d];
    let mut sum = Sum::default();
    let mut visit = |counts: &[usize]| {
        let mut ln_multi = ln_fact[n];
        for &c in counts {
            ln_multi -= ln_fact[c];
        }
        let mut p1 = 0.0;
        for q in &members {
            let mut prod = 1.0;
            for (&c, &qi) in counts.iter().zip(q) {
                if c > 0 {
                    prod *= qi.powi(c as i32);
                }
            }
            p1 += prod;
        }
        p1 /= m;
        sum.add(ln_multi.exp() * (p1 - p0).abs());
    };
    compositions(&mut counts, 0, n, &mut visit);
    Ok(Some(0.5 * sum.value()))
}

fn compositions(counts: &mut [usize], pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        counts[pos] = 0;
        return;
    }
    for k in 0..=left {
        counts[pos] = k;
        compositions(counts, pos + 1, left - k, visit);
    }
    counts[pos] = 0;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub name: String,
    /// Claimed `lhs <= rhs`.
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Link {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name: name.into(), lhs, rhs, slack, pass: slack >= LINK_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaChainReport {
    pub chi2: Chi2Report,
    pub tv: Option<f64>,
    pub risk_bound: Option<f64>,
    pub links: Vec<Link>,
    pub notices: Vec<String>,
}

impl LemmaChainReport {
    pub fn all_pass(&self) -> bool {
        self.links.iter().all(|l| l.pass)
    }
}

/// Checks, on exact quantities:
/// `TV² ≤ χ²/4`, `χ² + 1 ≤ (1/M²)Σ exp(Nε²bᵀb'/d)`, that sum `≤ exp(N²ε⁴α/(2d))`,
/// and `1/2 − TV/2 ≥` the closed-form risk bound at `δ = ε/(2μ)`.
pub fn verify_lemma_chain(fam: &PerturbationFamily, n_samples: u64) -> Result<LemmaChainReport> {
    let chi2 = exact_chi2_mixture(fam, n_samples)?;
    let mut notices = Vec::new();
    let tv = mixture_tv(fam, n_samples)?;
    if tv.is_none() {
        notices.push(format!(
            "TV over outcome sequences skipped: d^N = {}^{} exceeds {MAX_SEQUENCES:e}",
            fam.d(),
            n_samples
        ));
    }
    let mut links = Vec::new();
    if let Some(tv) = tv {
        links.push(Link::new("tv^2 <= chi2/4", tv * tv, 0.25 * chi2.chi2));
    }
    links.push(Link::new("chi2 + 1 <= mean exp(N eps^2 b.b'/d)", chi2.by_cycles, chi2.exp_pairwise));
    links.push(Link::new("mean exp(N eps^2 b.b'/d) <= exp(N^2 eps^4 alpha/(2d))", chi2.exp_pairwise, chi2.exp_alpha));
    let mu = fam.mu();
    let delta = fam.epsilon() / (2.0 * mu);
    let mut risk_bound = None;
    match BoundInput::new(n_samples, delta, fam.d(), mu, fam.alpha()).and_then(|i| risk_lower_bound(&i)) {
        Ok(report) => {
            risk_bound = Some(report.risk_lower);
            if let Some(tv) = tv {
                links.push(Link::new("risk bound <= 1/2 - tv/2", report.risk_lower, 0.5 - 0.5 * tv));
            }
            // unclamped on both sides; an overflowing exponent makes the bound -inf
            links.push(Link::new(
                "risk bound <= 1/2 - sqrt(chi2)/4",
                report.raw.unwrap_or(f64::NEG_INFINITY),
                0.5 - 0.25 * chi2.chi2.sqrt(),
            ));
        }
        Err(e) => notices.push(format!("risk bound not evaluated: {e}")),
    }
    Ok(LemmaChainReport { chi2, tv, risk_bound, links, notices })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::collection::presets;
    use crate::graph::{decompose_combined, decompose_kirkman, IncidenceGraph};
    use crate::perturbation::{enumerate_family, DEFAULT_FAMILY_LIMIT};

    fn family(coll: crate::collection::Collection, eps: f64) -> PerturbationFamily {
        let coll = Arc::new(coll);
        let dec = decompose_combined(&IncidenceGraph::build(&coll)).unwrap();
        enumerate_family(&coll, &dec, eps, DEFAULT_FAMILY_LIMIT).unwrap()
    }

    #[test]
    fn triangle_value() {
        let r = exact_chi2_mixture(&family(presets::triangle(), 0.5), 2).unwrap();
        assert!((r.chi2 - 0.0625).abs() < 1e-15);
        assert_eq!(exact_chi2_mixture(&family(presets::triangle(), 0.5), 0).unwrap().chi2, 0.0);
    }

    #[test]
    fn chain_holds_and_zero_eps_is_tight() {
        let r = verify_lemma_chain(&family(presets::twin_pairs(), 0.4), 3).unwrap();
        assert!(r.all_pass(), "{:?}", r.links);
        assert!(r.links[2].slack > 0.0);
        let z = verify_lemma_chain(&family(presets::twin_pairs(), 0.0), 3).unwrap();
        assert!(z.all_pass());
        assert!(z.tv.unwrap() < 1e-15 && z.chi2.chi2 == 0.0);
    }

    #[test]
    fn large_family_uses_cycle_weights() {
        // 12 six-cycles: 4096 orientations, above the entrywise cutoff
        let coll = Arc::new(presets::all_pairs(9).unwrap());
        let dec = decompose_kirkman(&coll, 0).unwrap();
        let f = enumerate_family(&coll, &dec, 0.1, DEFAULT_FAMILY_LIMIT).unwrap();
        let r = exact_chi2_mixture(&f, 4).unwrap();
        assert!(r.by_cycles <= r.exp_pairwise && r.exp_pairwise <= r.exp_alpha);
    }
}
