//! Closed-form minimax risk lower bounds.
//!
//! Every bound has the shape `1/2 - 1/4 sqrt(exp(x) - 1)` with exponent
//! `x = 8 mu^4 alpha N^2 delta^4 / d`; the variants differ only in where
//! `mu`, `alpha` and `d` come from.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::graph::{
    decompose_bfs_peel, decompose_combined, decompose_kirkman, decompose_pigeonhole, global_caps, CapBranch,
    CycleDecomposition, IncidenceGraph, Strategy,
};

/// Above this exponent the bound is zero: `1/4 sqrt(e^x - 1) >= 1/2`.
pub fn vacuous_threshold() -> f64 {
    5f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInput {
    /// Number of samples `N`.
    pub n_samples: u64,
    pub delta: f64,
    pub d: usize,
    pub mu: f64,
    pub alpha: f64,
}

impl BoundInput {
    pub fn new(n_samples: u64, delta: f64, d: usize, mu: f64, alpha: f64) -> Result<Self> {
        let input = Self { n_samples, delta, d, mu, alpha };
        input.check()?;
        Ok(input)
    }

    fn check(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be a non-negative number, got {}", self.delta)));
        }
        if self.d < 4 {
            return Err(Error::InvalidParameter(format!("d must be at least 4, got {}", self.d)));
        }
        if !(self.mu >= 4.0 && self.mu.is_finite()) || !(self.alpha >= 4.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu and alpha must be at least 4 (every cycle has length >= 4), got mu = {}, alpha = {}",
                self.mu, self.alpha
            )));
        }
        Ok(())
    }

    /// `8 mu^4 alpha N^2 delta^4 / d`.
    pub fn exponent(&self) -> f64 {
        let n = self.n_samples as f64;
        8.0 * self.mu.powi(4) * self.alpha * n * n * self.delta.powi(4) / self.d as f64
    }

    /// Largest `delta` the perturbation construction can realize, `1/(2 mu)`.
    pub fn max_delta(&self) -> f64 {
        1.0 / (2.0 * self.mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub formula: String,
    pub exponent: f64,
    /// Unclamped `1/2 - 1/4 sqrt(exp(x) - 1)`; `None` when `exp(x)` overflows.
    pub raw: Option<f64>,
    pub risk_lower: f64,
    /// Whether clamping at zero changed the value.
    pub clamped: bool,
    pub vacuous: bool,
    /// `d^(1/4) / (mu alpha^(1/4) sqrt(N))`, up to constants.
    pub radius_scale: Option<f64>,
    /// `sqrt(d) / (sqrt(mu^4 alpha) delta^2)`, up to constants.
    pub sample_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    pub inputs: BoundInput,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// `1/2 - 1/4 sqrt(exp(x) - 1)` and whether it overflowed.
fn le_cam_value(x: f64) -> Option<f64> {
    finite(0.5 - 0.25 * x.exp_m1().sqrt())
}

fn report(formula: &str, input: BoundInput, exponent: f64) -> BoundReport {
    let raw = le_cam_value(exponent);
    let vacuous = exponent >= vacuous_threshold();
    let risk_lower = if vacuous { 0.0 } else { raw.unwrap_or(0.0).clamp(0.0, 0.5) };
    let (radius, sample) = radius_and_sample_scales(&input);
    let mut warnings = Vec::new();
    if input.delta > input.max_delta() * (1.0 + 1e-12) {
        warnings.push(format!(
            "delta = {} exceeds 1/(2 mu) = {}; no perturbation of this decomposition reaches that separation",
            input.delta,
            input.max_delta()
        ));
    }
    BoundReport {
        formula: formula.to_string(),
        exponent,
        raw,
        risk_lower,
        clamped: raw.is_none_or(|r| r != risk_lower),
        vacuous,
        radius_scale: radius,
        sample_scale: sample,
        branch: None,
        inputs: input,
        warnings,
    }
}

pub const RISK_FORMULA: &str = "1/2 - 1/4*sqrt(exp(8*mu^4*alpha*N^2*delta^4/d) - 1)";

/// The structure-dependent lower bound on the minimax risk.
pub fn risk_lower_bound(input: &BoundInput) -> Result<BoundReport> {
    input.check()?;
    Ok(report(RISK_FORMULA, *input, input.exponent()))
}

/// Testing-radius and sample-complexity scalings; constants are omitted.
pub fn radius_and_sample_scales(input: &BoundInput) -> (Option<f64>, Option<f64>) {
    let d = input.d as f64;
    let radius = d.powf(0.25) / (input.mu * input.alpha.powf(0.25) * (input.n_samples as f64).sqrt());
    let sample = d.sqrt() / ((input.mu.powi(4) * input.alpha).sqrt() * input.delta * input.delta);
    (finite(radius), finite(sample))
}

/// Risk floor over level-`level` tests: `1 - level - 1/2 sqrt(exp(x) - 1)`, clamped at zero.
pub fn level_alpha_bound(input: &BoundInput, level: f64) -> Result<f64> {
    input.check()?;
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::InvalidParameter(format!("test level must lie in (0, 1], got {level}")));
    }
    let v = 1.0 - level - 0.5 * input.exponent().exp_m1().sqrt();
    Ok(if v.is_finite() { v.max(0.0) } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    AllSubsets,
    AllPairs,
    BigCycle,
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "all_subsets" | "all_subsets_even" | "all_even_subsets" => Ok(Structure::AllSubsets),
            "all_pairs" => Ok(Structure::AllPairs),
            "big_cycle" => Ok(Structure::BigCycle),
            other => Err(Error::InvalidParameter(format!("unsupported structure {other:?}"))),
        }
    }
}

/// Exponent constant for all pairs with a six-cycle decomposition: `8 * 6^4 * 6`.
pub const ALL_PAIRS_CONSTANT: f64 = 62208.0;
/// Exponent constant for the single big cycle: `8 * 2^4 * 2 / 2`, times `n^4`.
pub const BIG_CYCLE_CONSTANT: f64 = 128.0;

/// Closed-form bound for one of the named structures.
pub fn table_bounds(structure: Structure, n: usize, n_samples: u64, delta: f64) -> Result<BoundReport> {
    let nf = n as f64;
    match structure {
        Structure::BigCycle => {
            if n < 3 {
                return Err(Error::InvalidParameter("big_cycle needs n >= 3".into()));
            }
            let input = BoundInput::new(n_samples, delta, 2 * n, 2.0 * nf, 2.0 * nf)?;
            let mut r = report("1/2 - 1/4*sqrt(exp(128*n^4*N^2*delta^4) - 1)", input, input.exponent());
            r.branch = Some("mu = alpha = d = 2n".into());
            Ok(r)
        }
        Structure::AllPairs => {
            if n < 3 {
                return Err(Error::InvalidParameter("all_pairs needs n >= 3".into()));
            }
            let d = n * (n - 1);
            let df = d as f64;
            let (mu, alpha, branch, formula) = match n % 6 {
                1 | 3 => (6.0, 6.0, "six-cycles", "1/2 - 1/4*sqrt(exp(62208*N^2*delta^4/(n*(n-1))) - 1)"),
                5 => (
                    6.0 * df / (df - 2.0),
                    6.0 + 16.0 / df,
                    "six-cycles plus one eight-cycle",
                    RISK_FORMULA,
                ),
                _ => (6.0, 6.0, "even n (graph not Eulerian)", "1/2 - 1/4*sqrt(exp(62208*N^2*delta^4/(n*(n-1))) - 1)"),
            };
            let input = BoundInput::new(n_samples, delta, d, mu, alpha)?;
            let mut r = report(formula, input, input.exponent());
            r.branch = Some(branch.into());
            if n % 2 == 0 {
                r.warnings.push(format!(
                    "all pairs on n = {n} items has odd item degrees; the six-cycle values are not backed by a decomposition"
                ));
            }
            Ok(r)
        }
        Structure::AllSubsets => {
            if !(3..=60).contains(&n) {
                return Err(Error::InvalidParameter("all_subsets needs 3 <= n <= 60".into()));
            }
            let d = n << (n - 2);
            let cap = 5.0 * nf.log2();
            let input = BoundInput::new(n_samples, delta, d, cap.max(4.0), cap.max(4.0))?;
            let mut r = report(
                "1/2 - 1/4*sqrt(exp(8*(5*log2(n))^5*N^2*delta^4/(n*2^(n-2))) - 1)",
                input,
                input.exponent(),
            );
            r.branch = Some("mu, alpha <= 5 log2(n)".into());
            Ok(r)
        }
    }
}

/// Bound for any even-degree incidence graph with `n` items and `d` edges,
/// from the global caps on `mu` and `alpha`.
pub fn global_bound(n_samples: u64, delta: f64, n: usize, d: usize) -> Result<BoundReport> {
    let caps = global_caps(n, d)?;
    let input = BoundInput::new(n_samples, delta, d, caps.mu_cap, caps.alpha_cap)?;
    let branch = match (caps.mu_branch, caps.alpha_branch) {
        (CapBranch::Log, CapBranch::Log) => "log",
        (CapBranch::Linear, CapBranch::Linear) => "linear",
        _ => "mixed",
    };
    let mut r = report("1/2 - 1/4*sqrt(exp(8*mu_cap^4*alpha_cap*N^2*delta^4/d) - 1)", input, input.exponent());
    r.branch = Some(branch.into());
    r.warnings.retain(|w| !w.starts_with("delta"));
    Ok(r)
}

/// One evaluated strategy in [`best_over_strategies`].
#[derive(Debug, Clone, Serialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestBound {
    pub strategy: Strategy,
    pub report: BoundReport,
    #[serde(skip)]
    pub decomposition: CycleDecomposition,
    pub candidates: Vec<StrategyOutcome>,
}

fn better(a: &BoundReport, b: &BoundReport) -> bool {
    // larger bound wins; among vacuous bounds, the smaller exponent
    a.risk_lower > b.risk_lower || (a.risk_lower == b.risk_lower && a.exponent < b.exponent)
}

/// Evaluates every applicable decomposition strategy on `g` and keeps the
/// one giving the largest bound. `g` must have even degrees.
pub fn best_over_strategies(
    coll: &Collection,
    g: &IncidenceGraph,
    n_samples: u64,
    delta: f64,
    seed: u64,
) -> Result<BestBound> {
    let mut strategies = vec![Strategy::Pigeonhole, Strategy::Combined, Strategy::BfsPeel];
    let full = g.n_edges() == coll.d();
    if full && coll.is_all_pairs() && coll.n_items() % 2 == 1 {
        strategies.push(Strategy::Kirkman);
    }
    let mut best: Option<(Strategy, BoundReport, CycleDecomposition)> = None;
    let mut candidates = Vec::new();
    let mut first_error = None;
    for s in strategies {
        let dec = match s {
            Strategy::Pigeonhole => decompose_pigeonhole(g),
            Strategy::Combined => decompose_combined(g),
            Strategy::BfsPeel => decompose_bfs_peel(g),
            Strategy::Kirkman => decompose_kirkman(coll, seed),
        };
        let evaluated = dec.and_then(|dec| {
            let m = dec.metrics()?;
            let r = risk_lower_bound(&BoundInput::new(n_samples, delta, m.d, m.mu, m.alpha)?)?;
            Ok((dec, r))
        });
        match evaluated {
            Ok((dec, r)) => {
                candidates.push(StrategyOutcome { strategy: s, report: Some(r.clone()), error: None });
                if best.as_ref().is_none_or(|(_, b, _)| better(&r, b)) {
                    best = Some((s, r, dec));
                }
            }
            Err(e) => {
                candidates.push(StrategyOutcome { strategy: s, report: None, error: Some(e.to_string()) });
                // an incomplete peel is expected; other failures are reported if nothing succeeds
                if s != Strategy::BfsPeel && first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    match best {
        Some((strategy, report, decomposition)) => Ok(BestBound { strategy, report, decomposition, candidates }),
        None => Err(first_error.unwrap_or_else(|| Error::InvalidDecomposition("no strategy produced a decomposition".into()))),
    }
}

/// CSV over a grid of `(N, delta)`: `N,delta,d,mu,alpha,risk_lower`.
pub fn sweep_csv(d: usize, mu: f64, alpha: f64, samples: &[u64], deltas: &[f64]) -> Result<String> {
    let mut out = String::from("N,delta,d,mu,alpha,risk_lower\n");
    for &n in samples {
        for &delta in deltas {
            let r = risk_lower_bound(&BoundInput::new(n, delta, d, mu, alpha)?)?;
            let _ = writeln!(out, "{n},{delta},{d},{mu},{alpha},{}", r.risk_lower);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::presets;

    fn input(n: u64, delta: f64) -> BoundInput {
        BoundInput::new(n, delta, 42, 6.0, 6.0).unwrap()
    }

    #[test]
    fn small_exponent_gives_coin_flip() {
        let r = risk_lower_bound(&input(1, 1e-6)).unwrap();
        assert!((r.risk_lower - 0.5).abs() < 1e-9);
        assert_eq!(risk_lower_bound(&input(0, 0.05)).unwrap().risk_lower, 0.5);
    }

    #[test]
    fn kirkman_seven_example() {
        let r = risk_lower_bound(&input(10, 0.05)).unwrap();
        let x = 62208.0 * 100.0 * 6.25e-6 / 42.0;
        assert!((r.exponent - x).abs() < 1e-12);
        assert!((r.risk_lower - (0.5 - 0.25 * (x.exp() - 1.0).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn vacuous_threshold_is_ln5() {
        let delta_at = |x: f64| (x * 42.0 / (8.0 * 1296.0 * 6.0)).powf(0.25);
        let r = risk_lower_bound(&input(1, delta_at(5f64.ln() * 1.0001))).unwrap();
        assert!(r.vacuous && r.risk_lower == 0.0);
        assert!(r.raw.unwrap() < 0.0);
        let r = risk_lower_bound(&input(1, delta_at(5f64.ln() * 0.999))).unwrap();
        assert!(!r.vacuous && r.risk_lower > 0.0);
        let huge = risk_lower_bound(&input(1_000_000, 0.08)).unwrap();
        assert!(huge.vacuous && huge.raw.is_none() && huge.risk_lower == 0.0);
        assert!(serde_json::to_string(&huge).is_ok());
    }

    #[test]
    fn scales() {
        let (r1, _) = radius_and_sample_scales(&input(100, 0.01));
        let (r2, _) = radius_and_sample_scales(&input(200, 0.01));
        assert!((r2.unwrap() / r1.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn level_alpha() {
        let i = input(1, 1e-7);
        assert!((level_alpha_bound(&i, 0.05).unwrap() - 0.95).abs() < 1e-9);
        assert_eq!(level_alpha_bound(&i, 1.0).unwrap(), 0.0);
        assert!(level_alpha_bound(&i, 0.0).is_err());
    }

    #[test]
    fn table_constants() {
        let r = table_bounds(Structure::BigCycle, 5, 100, 0.01).unwrap();
        assert!((r.exponent - 8.0).abs() < 1e-12);
        let direct = risk_lower_bound(&BoundInput::new(100, 0.01, 10, 10.0, 10.0).unwrap()).unwrap();
        assert_eq!(r.risk_lower, direct.risk_lower);
        let r = table_bounds(Structure::AllPairs, 7, 10, 0.05).unwrap();
        assert!((r.exponent - 62208.0 * 100.0 * 0.05f64.powi(4) / 42.0).abs() < 1e-12);
        let r = table_bounds(Structure::AllPairs, 11, 10, 0.05).unwrap();
        assert!((r.inputs.alpha - (6.0 + 16.0 / 110.0)).abs() < 1e-15);
        assert_eq!(table_bounds(Structure::AllSubsets, 6, 1, 0.01).unwrap().inputs.d, 96);
        assert!("sideways".parse::<Structure>().is_err());
    }

    #[test]
    fn global_branches() {
        let sparse = global_bound(10, 0.01, 10, 20).unwrap();
        assert_eq!(sparse.branch.as_deref(), Some("linear"));
        let dense = global_bound(10, 0.01, 10, 10 << 9).unwrap();
        assert_eq!(dense.branch.as_deref(), Some("log"));
        assert_eq!(global_bound(0, 0.01, 10, 40).unwrap().risk_lower, 0.5);
    }

    #[test]
    fn best_strategy_choices() {
        let k7 = presets::all_pairs(7).unwrap();
        let best = best_over_strategies(&k7, &IncidenceGraph::build(&k7), 10, 0.01, 0).unwrap();
        assert_eq!(best.report.inputs.mu, 6.0);
        assert_eq!(best.report.inputs.alpha, 6.0);

        let twin = presets::twin_pairs();
        let best = best_over_strategies(&twin, &IncidenceGraph::build(&twin), 10, 0.01, 0).unwrap();
        assert_eq!(best.decomposition.cycle_lengths(), vec![4, 4]);

        let odd = presets::all_pairs(4).unwrap();
        assert!(best_over_strategies(&odd, &IncidenceGraph::build(&odd), 10, 0.01, 0).is_err());
    }

    #[test]
    fn sweep_is_monotone_in_n() {
        let csv = sweep_csv(42, 6.0, 6.0, &(1..=50).map(|k| k * 20).collect::<Vec<_>>(), &[0.01]).unwrap();
        let risks: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert!(risks.windows(2).all(|w| w[1] <= w[0]));
        assert!(csv.starts_with("N,delta,d,mu,alpha,risk_lower\n"));
    }
}
