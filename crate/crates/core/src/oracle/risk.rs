//! Monte-Carlo estimates of `½ P0(reject) + ½ P1(accept)` for concrete tests,
//! where `P0` draws `N` records from the uniform system and `P1` first picks one
//! hidden family member and then draws all `N` records from it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::collection::Collection;
use crate::dataset::{derive_seed, Sampler};
use crate::error::{Error, Result};
use crate::perturbation::Mixture;

use super::logit::{KlConfig, LogitProblem};

pub const DEFAULT_LEVEL: f64 = 0.05;
pub const DEFAULT_BOOTSTRAP: usize = 499;
pub const DEFAULT_CALIBRATION: usize = 4000;
pub const DEFAULT_RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum TestProcedure {
    /// Pearson statistic against the uniform system; threshold is the
    /// Monte-Carlo `1 − level` quantile under the uniform system.
    UniformChi2 { level: f64, calibration: usize },
    /// Likelihood ratio of the unrestricted fit against the IIA fit, calibrated
    /// by parametric bootstrap from the IIA fit.
    UniversalLogit { level: f64, bootstrap: usize, ridge: f64 },
    AlwaysAccept,
    AlwaysReject,
    CoinFlip,
}

impl TestProcedure {
    pub const NAMES: [&'static str; 5] = ["uniform-chi2", "universal-logit", "always-accept", "always-reject", "coin-flip"];

    /// Every registered test with default settings.
    pub fn registered() -> Vec<TestProcedure> {
        Self::NAMES.iter().map(|n| n.parse().expect("registered name")).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformChi2 { .. } => Self::NAMES[0],
            Self::UniversalLogit { .. } => Self::NAMES[1],
            Self::AlwaysAccept => Self::NAMES[2],
            Self::AlwaysReject => Self::NAMES[3],
            Self::CoinFlip => Self::NAMES[4],
        }
    }
}

impl fmt::Display for TestProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestProcedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform-chi2" => Self::UniformChi2 { level: DEFAULT_LEVEL, calibration: DEFAULT_CALIBRATION },
            "universal-logit" => {
                Self::UniversalLogit { level: DEFAULT_LEVEL, bootstrap: DEFAULT_BOOTSTRAP, ridge: DEFAULT_RIDGE }
            }
            "always-accept" => Self::AlwaysAccept,
            "always-reject" => Self::AlwaysReject,
            "coin-flip" => Self::CoinFlip,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown test {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub test: String,
    pub n_samples: u64,
    pub trials: usize,
    /// Rejection rate under the uniform system.
    pub type1: f64,
    /// Acceptance rate under the mixture.
    pub type2: f64,
    pub risk: f64,
    /// `½ sqrt(r0(1 − r0)/T + r1(1 − r1)/T)`.
    pub se: f64,
}

/// Binomial standard error of `½ (r0 + r1)` from two independent samples of size `trials`.
pub fn risk_standard_error(type1: f64, type2: f64, trials: usize) -> f64 {
    let t = trials as f64;
    0.5 * (type1 * (1.0 - type1) / t + type2 * (1.0 - type2) / t).sqrt()
}

/// A test with everything that does not depend on the data precomputed.
enum Decider<'a> {
    Fixed(bool),
    Coin,
    Pearson { threshold: f64, expected: f64 },
    Logit { coll: &'a Collection, level: f64, bootstrap: usize, cfg: KlConfig },
}

fn pearson(counts: &[u32], expected: f64) -> f64 {
    counts.iter().map(|&c| (c as f64 - expected).powi(2)).sum::<f64>() / expected
}

impl<'a> Decider<'a> {
    fn new(test: &TestProcedure, coll: &'a Collection, n: u64, seed: u64) -> Result<Self> {
        let check_level = |level: f64| {
            if level > 0.0 && level < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("test level must lie in (0, 1), got {level}")))
            }
        };
        Ok(match *test {
            TestProcedure::AlwaysAccept => Self::Fixed(false),
            TestProcedure::AlwaysReject => Self::Fixed(true),
            TestProcedure::CoinFlip => Self::Coin,
            TestProcedure::UniformChi2 { level, calibration } => {
                check_level(level)?;
                if calibration == 0 {
                    return Err(Error::InvalidParameter("calibration needs at least one draw".into()));
                }
                let d = coll.d();
                let expected = n as f64 / d as f64;
                let uniform = Sampler::new(&vec![1.0; d])?;
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
                let mut stats: Vec<f64> =
                    (0..calibration).map(|_| pearson(&uniform.counts(n, &mut rng), expected)).collect();
                stats.sort_by(f64::total_cmp);
                let k = (((1.0 - level) * calibration as f64).ceil() as usize).clamp(1, calibration) - 1;
                Self::Pearson { threshold: stats[k], expected }
            }
            TestProcedure::UniversalLogit { level, bootstrap, ridge } => {
                check_level(level)?;
                if bootstrap == 0 {
                    return Err(Error::InvalidParameter("bootstrap needs at least one resample".into()));
                }
                Self::Logit { coll, level, bootstrap, cfg: KlConfig { ridge, ..KlConfig::default() } }
            }
        })
    }

    fn reject<R: Rng>(&self, counts: &[u32], rng: &mut R) -> Result<bool> {
        match self {
            Self::Fixed(v) => Ok(*v),
            Self::Coin => Ok(rng.random_bool(0.5)),
            Self::Pearson { threshold, expected } => Ok(pearson(counts, *expected) > *threshold),
            Self::Logit { coll, level, bootstrap, cfg } => logit_reject(coll, counts, *level, *bootstrap, cfg, rng),
        }
    }
}

/// Unrestricted and IIA log-likelihoods differ by `Σ c_i ln(c_i / (n_C P_i))`.
struct LogitFit {
    theta: Vec<f64>,
    within: Vec<f64>,
    statistic: f64,
}

fn fit_counts(coll: &Collection, counts: &[u32], warm: Option<&[f64]>, cfg: &KlConfig) -> Result<LogitFit> {
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let mut items = vec![0.0; coll.n_items()];
    let mut sets = vec![0.0; coll.n_sets()];
    for (i, &c) in counts.iter().enumerate() {
        let (x, s) = coll.pair(i);
        items[x] += c as f64 / total;
        sets[s] += c as f64 / total;
    }
    let problem = LogitProblem::new(coll, &items, &sets, cfg.ridge);
    let (theta, _, _) = problem.solve(warm, cfg)?;
    let mut within = Vec::with_capacity(coll.d());
    problem.within_set(&theta, &mut within);
    let mut statistic = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            let set_total = sets[coll.pair(i).1] * total;
            statistic += 2.0 * c as f64 * (c as f64 / (set_total * within[i])).ln();
        }
    }
    Ok(LogitFit { theta, within, statistic })
}

fn logit_reject<R: Rng>(
    coll: &Collection,
    counts: &[u32],
    level: f64,
    bootstrap: usize,
    cfg: &KlConfig,
    rng: &mut R,
) -> Result<bool> {
    let n: u64 = counts.iter().map(|&c| c as u64).sum();
    let fit = fit_counts(coll, counts, None, cfg)?;
    let mut null = vec![0.0; coll.d()];
    for c in 0..coll.n_sets() {
        let range = coll.set_range(c);
        let weight: f64 = counts[range.clone()].iter().map(|&v| v as f64).sum::<f64>() / n as f64;
        for i in range {
            null[i] = weight * fit.within[i];
        }
    }
    let sampler = Sampler::new(&null)?;
    // p-value (1 + #{T_b >= T}) / (B + 1) is at most `level` iff the number of
    // exceedances stays within `allowed`
    let allowed = (level * (bootstrap + 1) as f64 - 1.0 + 1e-9).floor();
    if allowed < 0.0 {
        return Ok(false);
    }
    let allowed = allowed as usize;
    let mut exceed = 0usize;
    for b in 0..bootstrap {
        let resample = sampler.counts(n, rng);
        let t = fit_counts(coll, &resample, Some(&fit.theta), cfg)?.statistic;
        if t >= fit.statistic - 1e-12 * fit.statistic.abs().max(1.0) {
            exceed += 1;
            if exceed > allowed {
                return Ok(false);
            }
        }
        if exceed + (bootstrap - b - 1) <= allowed {
            return Ok(true);
        }
    }
    Ok(exceed <= allowed)
}

/// Runs `trials` datasets under each hypothesis. Trial `t` under hypothesis
/// `h` uses the stream `derive_seed(seed, 2t + h)`.
pub fn simulate_risk(
    test: &TestProcedure,
    mixture: &Mixture,
    n_samples: u64,
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("simulation needs at least one trial".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("simulation needs datasets of at least one record".into()));
    }
    let fam = mixture.family();
    let coll = fam.collection();
    let decider = Decider::new(test, coll, n_samples, seed)?;
    let uniform = Sampler::new(&vec![1.0; coll.d()])?;
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, bool)> {
            let mut rng0 = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * t as u64));
            let counts = uniform.counts(n_samples, &mut rng0);
            let null_reject = decider.reject(&counts, &mut rng0)?;
            let mut rng1 = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * t as u64 + 1));
            let k = mixture.hidden_index(&mut rng1);
            let counts = mixture.sampler(k).counts(n_samples, &mut rng1);
            let alt_reject = decider.reject(&counts, &mut rng1)?;
            Ok((null_reject, alt_reject))
        })
        .collect::<Result<_>>()?;
    let tf = trials as f64;
    let type1 = outcomes.iter().filter(|o| o.0).count() as f64 / tf;
    let type2 = outcomes.iter().filter(|o| !o.1).count() as f64 / tf;
    Ok(RiskEstimate {
        test: test.name().to_string(),
        n_samples,
        trials,
        type1,
        type2,
        risk: 0.5 * (type1 + type2),
        se: risk_standard_error(type1, type2, trials),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::collection::presets;
    use crate::graph::{decompose_combined, IncidenceGraph};
    use crate::perturbation::{enumerate_family, DEFAULT_FAMILY_LIMIT};

    fn mixture(eps: f64) -> Mixture {
        let coll = Arc::new(presets::triangle());
        let dec = decompose_combined(&IncidenceGraph::build(&coll)).unwrap();
        Mixture::new(enumerate_family(&coll, &dec, eps, DEFAULT_FAMILY_LIMIT).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_tests() {
        let m = mixture(0.5);
        let a = simulate_risk(&TestProcedure::AlwaysAccept, &m, 10, 50, 1).unwrap();
        assert_eq!((a.type1, a.type2, a.risk, a.se), (0.0, 1.0, 0.5, 0.0));
        let r = simulate_risk(&TestProcedure::AlwaysReject, &m, 10, 50, 1).unwrap();
        assert_eq!((r.type1, r.type2, r.risk), (1.0, 0.0, 0.5));
        let c = simulate_risk(&TestProcedure::CoinFlip, &m, 10, 2000, 1).unwrap();
        assert!((c.risk - 0.5).abs() < 4.0 * c.se);
    }

    #[test]
    fn deterministic_and_powerful_at_large_n() {
        let m = mixture(1.0);
        let t: TestProcedure = "uniform-chi2".parse().unwrap();
        let a = simulate_risk(&t, &m, 200, 200, 9).unwrap();
        assert_eq!(a, simulate_risk(&t, &m, 200, 200, 9).unwrap());
        assert!(a.risk < 0.1, "{a:?}");
        let l: TestProcedure = "universal-logit".parse().unwrap();
        let b = simulate_risk(&l, &m, 200, 100, 9).unwrap();
        assert!(b.risk < 0.15, "{b:?}");
        assert!("nope".parse::<TestProcedure>().is_err());
    }
}
