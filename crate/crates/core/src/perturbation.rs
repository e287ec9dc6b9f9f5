//! Sign vectors from oriented cycle decompositions and the perturbed systems
//! they induce around the uniform system.
//!
//! Orienting each cycle of a complete decomposition one way or the other and
//! alternating `+1/-1` along it gives a vector `b` whose sums over every set
//! and over every item vanish. `q = (1 + eps*b)/d` then keeps every set
//! weight and item marginal of the uniform system.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collection::Collection;
use crate::dataset::{derive_seed, Dataset, Sampler};
use crate::error::{Error, Result};
use crate::graph::CycleDecomposition;
use crate::system::ChoiceSystem;

/// Default cap on exhaustive family size.
pub const DEFAULT_FAMILY_LIMIT: u64 = 1 << 20;

/// A sign vector `b` over canonical indices and the per-cycle directions `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Orientation {
    pub b: Vec<i8>,
    pub a: Vec<i8>,
}

impl Orientation {
    pub fn d(&self) -> usize {
        self.b.len()
    }

    pub fn negated(&self) -> Orientation {
        Orientation { b: self.b.iter().map(|v| -v).collect(), a: self.a.iter().map(|v| -v).collect() }
    }
}

fn check_full_cover(dec: &CycleDecomposition) -> Result<()> {
    if !dec.is_complete() {
        return Err(Error::IncompleteDecomposition { uncovered: dec.remainder.len() });
    }
    let covered: usize = dec.cycles.iter().map(Vec::len).sum();
    if covered != dec.edges || dec.cycles.iter().flatten().any(|&e| e >= dec.edges) {
        return Err(Error::InvalidDecomposition(
            "orientations need a decomposition of the full collection (edge ids 0..d)".into(),
        ));
    }
    Ok(())
}

/// Builds `b` from direction bits: the smallest edge id of cycle `i` gets
/// `a[i]`, and signs alternate along the cycle from there.
pub fn orient(dec: &CycleDecomposition, a: &[i8]) -> Result<Orientation> {
    check_full_cover(dec)?;
    if a.len() != dec.cycles.len() {
        return Err(Error::DimensionMismatch { expected: dec.cycles.len(), found: a.len() });
    }
    if a.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::InvalidParameter("direction bits must be +1 or -1".into()));
    }
    let mut b = vec![0i8; dec.edges];
    for (cycle, &dir) in dec.cycles.iter().zip(a) {
        let k = cycle.len();
        let start = cycle.iter().enumerate().min_by_key(|&(_, e)| *e).map(|(p, _)| p).unwrap_or(0);
        for (offset, idx) in (0..k).map(|j| (j, (start + j) % k)) {
            b[cycle[idx]] = if offset % 2 == 0 { dir } else { -dir };
        }
    }
    Ok(Orientation { b, a: a.to_vec() })
}

/// Direction bits for family index `k`: bit `i` set means cycle `i` is reversed.
pub fn directions_from_index(k: u64, cycles: usize) -> Vec<i8> {
    (0..cycles).map(|i| if i < 64 && k >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// Outcome of checking a sign vector against a collection and decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrientationCheck {
    pub valid: bool,
    /// `(set, sum)` for every set whose entries do not sum to zero.
    pub set_violations: Vec<(usize, i64)>,
    /// `(item, sum)` for every item whose entries do not sum to zero.
    pub item_violations: Vec<(usize, i64)>,
    /// Cycles along which signs fail to alternate.
    pub alternation_violations: Vec<usize>,
    pub first_violation: Option<String>,
}

/// Checks the zero-sum constraints per set and per item, and sign alternation
/// along every cycle of `dec`.
pub fn validate(b: &[i8], dec: &CycleDecomposition, coll: &Collection) -> Result<OrientationCheck> {
    if b.len() != coll.d() {
        return Err(Error::DimensionMismatch { expected: coll.d(), found: b.len() });
    }
    let mut set_sum = vec![0i64; coll.n_sets()];
    let mut item_sum = vec![0i64; coll.n_items()];
    for (i, &(x, c)) in coll.pairs().iter().enumerate() {
        set_sum[c] += b[i] as i64;
        item_sum[x] += b[i] as i64;
    }
    let set_violations: Vec<(usize, i64)> =
        set_sum.iter().enumerate().filter(|(_, &s)| s != 0).map(|(c, &s)| (c, s)).collect();
    let item_violations: Vec<(usize, i64)> =
        item_sum.iter().enumerate().filter(|(_, &s)| s != 0).map(|(x, &s)| (x, s)).collect();
    let alternation_violations: Vec<usize> = dec
        .cycles
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let k = c.len();
            (0..k).any(|j| c[j] >= b.len() || c[(j + 1) % k] >= b.len() || (b[c[j]] - b[c[(j + 1) % k]]).abs() != 2)
        })
        .map(|(i, _)| i)
        .collect();
    let first_violation = if let Some(&(c, s)) = set_violations.first() {
        Some(format!("set {c} sums to {s}"))
    } else if let Some(&(x, s)) = item_violations.first() {
        Some(format!("item {} sums to {s}", coll.item_name(x)))
    } else {
        alternation_violations.first().map(|i| format!("signs do not alternate along cycle {i}"))
    };
    Ok(OrientationCheck {
        valid: first_violation.is_none(),
        set_violations,
        item_violations,
        alternation_violations,
        first_violation,
    })
}

fn is_uniform(p: &ChoiceSystem) -> bool {
    let u = 1.0 / p.d() as f64;
    p.probs().iter().all(|&v| (v - u).abs() <= 1e-12)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    Ok(())
}

/// `q = (1 + eps*b)/d`.
pub fn perturb(p0: &ChoiceSystem, b: &Orientation, eps: f64) -> Result<ChoiceSystem> {
    check_epsilon(eps)?;
    if !is_uniform(p0) {
        return Err(Error::InvalidParameter("perturbations are taken around the uniform system".into()));
    }
    if b.d() != p0.d() {
        return Err(Error::DimensionMismatch { expected: p0.d(), found: b.d() });
    }
    ChoiceSystem::new(Arc::clone(p0.collection()), perturbed_probs(&b.b, eps))
}

pub(crate) fn perturbed_probs(b: &[i8], eps: f64) -> Vec<f64> {
    let d = b.len() as f64;
    b.iter().map(|&s| (1.0 + eps * s as f64) / d).collect()
}

/// Separation calibration for a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub delta: f64,
    pub mu: f64,
    /// `2 mu delta`.
    pub epsilon: f64,
    /// `4 n delta`, sufficient for any decomposition (cycles are at most `2n` long).
    pub universal_epsilon: f64,
    /// Largest admissible `delta`, `1/(2 mu)`.
    pub max_delta: f64,
    /// Certified distance from the IIA family of every perturbed system, `eps |σ| / (2d)`.
    pub certified_floor: f64,
}

/// `eps = 2 mu delta`; errors when that leaves `[0, 1]`.
pub fn epsilon_for_delta(dec: &CycleDecomposition, n_items: usize, delta: f64) -> Result<Calibration> {
    let m = dec.metrics()?;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    let max_delta = 1.0 / (2.0 * m.mu);
    let epsilon = 2.0 * m.mu * delta;
    if epsilon > 1.0 + 1e-12 {
        return Err(Error::DeltaTooLarge { delta, max: max_delta });
    }
    let epsilon = epsilon.min(1.0);
    Ok(Calibration {
        delta,
        mu: m.mu,
        epsilon,
        universal_epsilon: 4.0 * n_items as f64 * delta,
        max_delta,
        certified_floor: epsilon * m.cycles as f64 / (2.0 * m.d as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    Exhaustive,
    /// Distinct orientations drawn at random; exact mixture checks do not apply.
    Sampled,
}

/// Perturbed systems `q_b` for a set of orientations of one decomposition.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    collection: Arc<Collection>,
    cycle_lengths: Vec<usize>,
    orientations: Vec<Orientation>,
    epsilon: f64,
    mode: FamilyMode,
}

impl PerturbationFamily {
    pub fn collection(&self) -> &Arc<Collection> {
        &self.collection
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn cycle_lengths(&self) -> &[usize] {
        &self.cycle_lengths
    }

    pub fn d(&self) -> usize {
        self.collection.d()
    }

    /// `Σ|σ_i|² / d` of the underlying decomposition.
    pub fn alpha(&self) -> f64 {
        self.cycle_lengths.iter().map(|&k| (k * k) as f64).sum::<f64>() / self.d() as f64
    }

    pub fn mu(&self) -> f64 {
        self.d() as f64 / self.cycle_lengths.len() as f64
    }

    /// The same orientations at another perturbation size.
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        check_epsilon(eps)?;
        Ok(Self { epsilon: eps, ..self.clone() })
    }

    pub fn system(&self, k: usize) -> Result<ChoiceSystem> {
        ChoiceSystem::new(Arc::clone(&self.collection), perturbed_probs(&self.orientations[k].b, self.epsilon))
    }

    pub fn systems(&self) -> Result<Vec<ChoiceSystem>> {
        (0..self.len()).map(|k| self.system(k)).collect()
    }
}

fn family_base(coll: &Arc<Collection>, dec: &CycleDecomposition, eps: f64) -> Result<()> {
    check_epsilon(eps)?;
    check_full_cover(dec)?;
    if dec.edges != coll.d() {
        return Err(Error::DimensionMismatch { expected: coll.d(), found: dec.edges });
    }
    Ok(())
}

/// All `2^|σ|` orientations, in family-index order.
pub fn enumerate_family(
    coll: &Arc<Collection>,
    dec: &CycleDecomposition,
    eps: f64,
    limit: u64,
) -> Result<PerturbationFamily> {
    family_base(coll, dec, eps)?;
    let s = dec.cycles.len();
    if s >= 63 || (1u64 << s) > limit {
        return Err(Error::FamilyTooLarge { cycles: s, limit });
    }
    let orientations = (0..1u64 << s)
        .map(|k| orient(dec, &directions_from_index(k, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PerturbationFamily {
        collection: Arc::clone(coll),
        cycle_lengths: dec.cycle_lengths(),
        orientations,
        epsilon: eps,
        mode: FamilyMode::Exhaustive,
    })
}

/// `count` distinct orientations drawn uniformly without replacement.
pub fn sample_family(
    coll: &Arc<Collection>,
    dec: &CycleDecomposition,
    eps: f64,
    count: usize,
    seed: u64,
) -> Result<PerturbationFamily> {
    family_base(coll, dec, eps)?;
    let s = dec.cycles.len();
    if count == 0 {
        return Err(Error::InvalidParameter("a family needs at least one orientation".into()));
    }
    if s < 63 && count as u64 > 1u64 << s {
        return Err(Error::InvalidParameter(format!(
            "requested {count} orientations but only 2^{s} = {} exist",
            1u64 << s
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut orientations = Vec::with_capacity(count);
    while orientations.len() < count {
        let a: Vec<i8> = (0..s).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        if seen.insert(a.clone()) {
            orientations.push(orient(dec, &a)?);
        }
    }
    Ok(PerturbationFamily {
        collection: Arc::clone(coll),
        cycle_lengths: dec.cycle_lengths(),
        orientations,
        epsilon: eps,
        mode: FamilyMode::Sampled,
    })
}

/// `bᵀb'`, checked against `Σ |σ_i| a_i a'_i`.
pub fn inner_product(b: &Orientation, other: &Orientation, cycle_lengths: &[usize]) -> Result<i64> {
    if b.d() != other.d() || b.a.len() != other.a.len() || b.a.len() != cycle_lengths.len() {
        return Err(Error::DecompositionMismatch(format!(
            "lengths differ (d {} vs {}, cycles {} vs {})",
            b.d(),
            other.d(),
            b.a.len(),
            other.a.len()
        )));
    }
    let direct: i64 = b.b.iter().zip(&other.b).map(|(&x, &y)| (x as i64) * (y as i64)).sum();
    let by_cycle: i64 = cycle_lengths
        .iter()
        .zip(b.a.iter().zip(&other.a))
        .map(|(&k, (&x, &y))| k as i64 * x as i64 * y as i64)
        .sum();
    if direct != by_cycle {
        return Err(Error::DecompositionMismatch(format!(
            "entrywise product {direct} differs from cycle-weighted product {by_cycle}"
        )));
    }
    Ok(direct)
}

/// Uniform mixture over a family, with dataset samplers.
#[derive(Debug, Clone)]
pub struct Mixture {
    family: PerturbationFamily,
    samplers: Vec<Sampler>,
}

impl Mixture {
    pub fn new(family: PerturbationFamily) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidParameter("mixture of an empty family".into()));
        }
        let samplers = family
            .orientations
            .iter()
            .map(|o| Sampler::new(&perturbed_probs(&o.b, family.epsilon)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { family, samplers })
    }

    pub fn family(&self) -> &PerturbationFamily {
        &self.family
    }

    /// Entrywise average of the family members.
    pub fn marginal(&self) -> Result<ChoiceSystem> {
        let d = self.family.d();
        let m = self.family.len() as f64;
        let mut probs = vec![0.0; d];
        for o in &self.family.orientations {
            for (p, v) in probs.iter_mut().zip(perturbed_probs(&o.b, self.family.epsilon)) {
                *p += v;
            }
        }
        probs.iter_mut().for_each(|p| *p /= m);
        ChoiceSystem::new(Arc::clone(&self.family.collection), probs)
    }

    /// Picks one hidden member uniformly, then draws all `n` records from it.
    pub fn hidden_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.samplers.len())
    }

    pub fn sampler(&self, k: usize) -> &Sampler {
        &self.samplers[k]
    }

    /// A dataset under the alternative: one hidden orientation for the whole
    /// dataset. Returns the dataset and the hidden family index.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<(Dataset, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.hidden_index(&mut rng);
        let records = self.draw_records(&mut rng, n, |_| k);
        Ok((Dataset::new(&self.family.collection, records, Some(seed))?, k))
    }

    /// Per-record mixing: every record uses a freshly drawn orientation. The
    /// records are then i.i.d. from the marginal, which is not the
    /// alternative used by the lower bound.
    pub fn sample_dataset_per_record(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let mut pick = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
        let m = self.samplers.len();
        let records = self.draw_records(&mut rng, n, |_| pick.random_range(0..m));
        Dataset::new(&self.family.collection, records, Some(seed))
    }

    fn draw_records<R: Rng>(&self, rng: &mut R, n: usize, mut member: impl FnMut(usize) -> usize) -> Vec<(usize, usize)> {
        let coll = &self.family.collection;
        (0..n)
            .map(|j| {
                let (x, c) = coll.pair(self.samplers[member(j)].draw(rng));
                (c, x)
            })
            .collect()
    }
}

/// Header fields of an orientation file.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationFile {
    pub decomposition: String,
    pub epsilon: f64,
    pub certified_floor: f64,
    pub orientation: Orientation,
}

impl OrientationFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# decomposition {}", self.decomposition);
        let _ = writeln!(out, "# epsilon {}", self.epsilon);
        let _ = writeln!(out, "# certified_floor {}", self.certified_floor);
        let a: Vec<String> = self.orientation.a.iter().map(i8::to_string).collect();
        let _ = writeln!(out, "# directions {}", a.join(" "));
        let b: Vec<String> = self.orientation.b.iter().map(i8::to_string).collect();
        let _ = writeln!(out, "{}", b.join(" "));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut decomposition = String::new();
        let mut epsilon = None;
        let mut floor = 0.0;
        let mut a = Vec::new();
        let mut b = None;
        let signs = |s: &str, line: usize| -> Result<Vec<i8>> {
            s.split_whitespace()
                .map(|t| match t {
                    "1" | "+1" => Ok(1),
                    "-1" => Ok(-1),
                    other => Err(Error::Parse { line, message: format!("expected +1 or -1, found {other:?}") }),
                })
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(h) = raw.strip_prefix('#') {
                let h = h.trim();
                let (key, value) = h.split_once(char::is_whitespace).unwrap_or((h, ""));
                let value = value.trim();
                let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("bad {key}: {e}") });
                match key {
                    "decomposition" => decomposition = value.to_string(),
                    "epsilon" => epsilon = Some(num(value)?),
                    "certified_floor" => floor = num(value)?,
                    "directions" => a = signs(value, line)?,
                    _ => {}
                }
            } else if b.is_some() {
                return Err(Error::Parse { line, message: "more than one sign line".into() });
            } else {
                b = Some(signs(raw, line)?);
            }
        }
        let b = b.ok_or_else(|| Error::Parse { line: 0, message: "no sign line".into() })?;
        let epsilon = epsilon.ok_or_else(|| Error::Parse { line: 0, message: "missing '# epsilon' header".into() })?;
        Ok(Self { decomposition, epsilon, certified_floor: floor, orientation: Orientation { b, a } })
    }
}
