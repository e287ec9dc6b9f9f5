//! Total variation distance from a choice system to the IIA family.
//!
//! For fixed qualities the best set weights solve a separable convex
//! piecewise-linear problem exactly, so the search only moves the qualities:
//! pairwise mass transfers with a bracketing line search, swept until a full
//! pass stops improving. The returned value is the best local optimum found,
//! which bounds the infimum from above.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::collection::Collection;
use crate::dataset::derive_seed;
use crate::error::{Error, Result};
use crate::system::{expand_iia, tv_distance, ChoiceSystem, IiaSystem};

/// Largest `n + m` accepted by the projection search.
pub const MAX_PROJECTION_NODES: usize = 24;
/// Largest item count for the grid method.
pub const MAX_GRID_ITEMS: usize = 4;
pub const DEFAULT_STARTS: usize = 64;

const GAMMA_FLOOR: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-300;
const LINE_POINTS: usize = 16;
const GOLDEN_STEPS: usize = 48;
const ALTERNATIONS: usize = 50;
const LOG_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMethod {
    Grid,
    MultistartDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionConfig {
    /// Random starts in addition to the uniform start.
    pub starts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// A sweep improving the objective by less than this ends a run.
    pub tol: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { starts: DEFAULT_STARTS, seed: 0, max_sweeps: 500, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    /// Index of the winning run; 0 is the uniform (or grid) start.
    pub best_start: usize,
    pub best_sweeps: usize,
    pub best_converged: bool,
    pub runs_converged: usize,
    /// Worst local optimum among the runs.
    pub worst_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub distance: f64,
    pub witness: IiaSystem,
    pub method: ProjectionMethod,
    pub starts: usize,
    pub convergence: Convergence,
}

fn check_guard(coll: &Collection) -> Result<()> {
    let nodes = coll.n_items() + coll.n_sets();
    if nodes > MAX_PROJECTION_NODES {
        return Err(Error::Guard(format!(
            "projection search needs n + m <= {MAX_PROJECTION_NODES}, got {nodes}"
        )));
    }
    Ok(())
}

/// `Σ |q − w·P(γ)|` minimized over set weights for fixed qualities.
struct Profile<'a> {
    coll: &'a Collection,
    q: &'a [f64],
    /// Canonical indices of each item's entries, with their sets.
    by_item: Vec<Vec<(usize, usize)>>,
}

/// Working storage for [`Scratch::allocate`]: minimizing
/// `Σ_g Σ_k c_k |t_k − v_g|` over `v ≥ 0`, `Σ v_g = 1`, which is separable
/// and convex, so spending the unit budget on the cheapest slopes first is exact.
#[derive(Default)]
struct Scratch {
    terms: Vec<(f64, f64)>,
    segments: Vec<(f64, f64, usize)>,
}

impl Scratch {
    /// Turns the pending terms into the slope segments of group `g`. Returns
    /// the group's value at `v = 0`.
    fn close_group(&mut self, g: usize) -> f64 {
        self.terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = self.terms.iter().map(|t| t.1).sum();
        let at_zero: f64 = self.terms.iter().map(|t| t.0 * t.1).sum();
        if total > 0.0 {
            let mut prev = 0.0;
            let mut cum = 0.0;
            for &(t, c) in &self.terms {
                if t > prev {
                    self.segments.push((2.0 * cum - total, t - prev, g));
                    prev = t;
                }
                cum += c;
            }
            self.segments.push((2.0 * cum - total, f64::INFINITY, g));
        }
        self.terms.clear();
        at_zero
    }

    fn allocate(&mut self, base: f64, mut out: Option<&mut [f64]>) -> f64 {
        self.segments.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(v) = out.as_deref_mut() {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        let mut value = base;
        let mut budget = 1.0;
        for &(slope, len, g) in &self.segments {
            let take = len.min(budget);
            value += slope * take;
            if let Some(v) = out.as_deref_mut() {
                v[g] += take;
            }
            budget -= take;
            if budget <= 0.0 {
                break;
            }
        }
        self.segments.clear();
        value.max(0.0)
    }
}

impl<'a> Profile<'a> {
    fn new(q: &'a ChoiceSystem) -> Self {
        let coll = q.collection();
        let mut by_item = vec![Vec::new(); coll.n_items()];
        for (i, &(x, c)) in coll.pairs().iter().enumerate() {
            by_item[x].push((i, c));
        }
        Self { coll, q: q.probs(), by_item }
    }

    /// Returns the objective and fills `w` when given.
    fn eval(&self, gamma: &[f64], s: &mut Scratch, w: Option<&mut [f64]>) -> f64 {
        let mut base = 0.0;
        for (c, set) in self.coll.sets().iter().enumerate() {
            let range = self.coll.set_range(c);
            let total: f64 = set.iter().map(|&z| gamma[z]).sum();
            for (&x, &qx) in set.iter().zip(&self.q[range]) {
                let p = gamma[x] / total;
                s.terms.push((qx / p, p));
            }
            base += s.close_group(c);
        }
        s.allocate(base, w)
    }

    /// Best qualities for the set weights `w` chosen at `gamma`, keeping
    /// `w_C / Σ_{k∈C} γ_k` fixed.
    fn gamma_step(&self, gamma: &[f64], w: &[f64], s: &mut Scratch, out: &mut [f64]) {
        let u: Vec<f64> = self
            .coll
            .sets()
            .iter()
            .zip(w)
            .map(|(set, &wc)| wc / set.iter().map(|&z| gamma[z]).sum::<f64>())
            .collect();
        let scale: Vec<f64> = self.by_item.iter().map(|es| es.iter().map(|&(_, c)| u[c]).sum()).collect();
        for (x, entries) in self.by_item.iter().enumerate() {
            for &(i, c) in entries {
                if u[c] > 0.0 {
                    s.terms.push((self.q[i] * scale[x] / u[c], u[c] / scale[x]));
                }
            }
            s.close_group(x);
        }
        s.allocate(0.0, Some(out));
        for (g, &sx) in out.iter_mut().zip(&scale) {
            *g = if sx > 0.0 { (*g / sx).max(GAMMA_FLOOR) } else { GAMMA_FLOOR };
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|g| *g /= total);
    }

    /// Alternates exact weight and quality steps while they improve.
    fn alternate(&self, gamma: &mut Vec<f64>, mut f: f64, s: &mut Scratch) -> f64 {
        let mut w = vec![0.0; self.coll.n_sets()];
        let mut next = vec![0.0; gamma.len()];
        for _ in 0..ALTERNATIONS {
            self.eval(gamma, s, Some(&mut w));
            self.gamma_step(gamma, &w, s, &mut next);
            let g = self.eval(&next, s, None);
            if g < f {
                f = g;
                std::mem::swap(gamma, &mut next);
            } else {
                break;
            }
        }
        f
    }
}

struct Run {
    value: f64,
    gamma: Vec<f64>,
    sweeps: usize,
    converged: bool,
}

fn from_log(theta: &[f64], gamma: &mut [f64]) {
    let top = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (g, t) in gamma.iter_mut().zip(theta) {
        *g = (t - top).exp().max(GAMMA_FLOOR);
    }
    let total: f64 = gamma.iter().sum();
    gamma.iter_mut().for_each(|g| *g /= total);
}

/// Log-space search directions: every item, every proper set, and the
/// complement of every proper set.
fn fixed_directions(coll: &Collection) -> Vec<Vec<f64>> {
    let n = coll.n_items();
    let mut dirs: Vec<Vec<f64>> = (0..n).map(|x| (0..n).map(|z| f64::from(u8::from(z == x))).collect()).collect();
    for set in coll.sets() {
        if set.len() > 1 && set.len() < n {
            let mut v = vec![0.0; n];
            set.iter().for_each(|&x| v[x] = 1.0);
            if !dirs.contains(&v) {
                dirs.push(v.clone());
            }
            let comp: Vec<f64> = v.iter().map(|x| 1.0 - x).collect();
            if !dirs.contains(&comp) {
                dirs.push(comp);
            }
        }
    }
    dirs
}

fn descend(profile: &Profile, start: Vec<f64>, cfg: &ProjectionConfig, seed: u64) -> Run {
    let mut s = Scratch::default();
    let n = start.len();
    let fixed = fixed_directions(profile.coll);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta: Vec<f64> = start.iter().map(|g| g.max(GAMMA_FLOOR).ln()).collect();
    let mut gamma = vec![0.0; n];
    from_log(&theta, &mut gamma);
    let mut f = profile.eval(&gamma, &mut s, None);
    for sweep in 1..=cfg.max_sweeps {
        let before = f;
        f = profile.alternate(&mut gamma, f, &mut s);
        theta.iter_mut().zip(&gamma).for_each(|(t, g)| *t = g.ln());
        let random: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        for dir in fixed.iter().chain(&random) {
            f = line_search(profile, &mut theta, dir, f, &mut s);
        }
        from_log(&theta, &mut gamma);
        if before - f <= cfg.tol {
            return Run { value: f, gamma, sweeps: sweep, converged: true };
        }
    }
    Run { value: f, gamma, sweeps: cfg.max_sweeps, converged: false }
}

/// Moves `theta` to the best point found along `dir`.
fn line_search(profile: &Profile, theta: &mut [f64], dir: &[f64], f0: f64, s: &mut Scratch) -> f64 {
    let base = theta.to_vec();
    let mut gamma = vec![0.0; theta.len()];
    let mut at = |t: f64| {
        for ((th, b), d) in theta.iter_mut().zip(&base).zip(dir) {
            *th = b + t * d;
        }
        from_log(theta, &mut gamma);
        profile.eval(&gamma, s, None)
    };
    let step = 2.0 * LOG_SPAN / (LINE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..LINE_POINTS).map(|k| -LOG_SPAN + step * k as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| at(t)).collect();
    let (k, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty grid");
    let mut best = (0.0, f0);
    let brackets = [(grid[k.saturating_sub(1)], grid[(k + 1).min(LINE_POINTS - 1)]), (-step, step)];
    for cand in std::iter::once((grid[k], values[k])).chain(brackets.map(|(a, b)| golden(&mut at, a, b))) {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    for ((th, b), d) in theta.iter_mut().zip(&base).zip(dir) {
        *th = b + best.0 * d;
    }
    best.1
}

fn golden(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

fn dirichlet_start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln() + GAMMA_FLOOR).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

fn finish(
    q: &ChoiceSystem,
    profile: &Profile,
    runs: Vec<Run>,
    method: ProjectionMethod,
) -> Result<ProjectionResult> {
    let (best_idx, best) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .expect("at least one run");
    let convergence = Convergence {
        best_start: best_idx,
        best_sweeps: best.sweeps,
        best_converged: best.converged,
        runs_converged: runs.iter().filter(|r| r.converged).count(),
        worst_value: 0.5 * runs.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max),
    };
    let coll = q.collection();
    let mut w = vec![0.0; coll.n_sets()];
    profile.eval(&best.gamma, &mut Scratch::default(), Some(&mut w));
    w.iter_mut().for_each(|v| *v = v.max(WEIGHT_FLOOR));
    let wsum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= wsum);
    let gsum: f64 = best.gamma.iter().sum();
    let gamma = best.gamma.iter().map(|g| g / gsum).collect();
    let witness = IiaSystem::new(gamma, w)?;
    let distance = tv_distance(q, &expand_iia(&witness, coll)?)?;
    Ok(ProjectionResult { distance, witness, method, starts: runs.len(), convergence })
}

/// Multistart descent from the uniform qualities and `cfg.starts` Dirichlet draws.
pub fn tv_projection(q: &ChoiceSystem, cfg: &ProjectionConfig) -> Result<ProjectionResult> {
    let coll: &Arc<Collection> = q.collection();
    check_guard(coll)?;
    let n = coll.n_items();
    let profile = Profile::new(q);
    let runs: Vec<Run> = (0..=cfg.starts)
        .into_par_iter()
        .map(|s| {
            let start =
                if s == 0 { vec![1.0 / n as f64; n] } else { dirichlet_start(n, derive_seed(cfg.seed, s as u64)) };
            descend(&profile, start, cfg, derive_seed(cfg.seed ^ 0x5eed, s as u64))
        })
        .collect();
    finish(q, &profile, runs, ProjectionMethod::MultistartDescent)
}

/// Exhaustive grid over the quality simplex at step `1/steps`, then descent
/// from the best grid point. Only for `n <= 4`.
pub fn tv_projection_grid(q: &ChoiceSystem, steps: usize, cfg: &ProjectionConfig) -> Result<ProjectionResult> {
    let coll = q.collection();
    check_guard(coll)?;
    let n = coll.n_items();
    if n > MAX_GRID_ITEMS {
        return Err(Error::Guard(format!("grid projection needs n <= {MAX_GRID_ITEMS}, got {n}")));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("grid needs at least one step".into()));
    }
    let profile = Profile::new(q);
    let mut s = Scratch::default();
    let mut best = (f64::INFINITY, vec![1.0 / n as f64; n]);
    let mut parts = vec![0usize; n];
    let mut gamma = vec![0.0; n];
    grid_walk(&mut parts, 0, steps, &mut |parts| {
        for (g, &k) in gamma.iter_mut().zip(parts.iter()) {
            *g = (k as f64 / steps as f64).max(GAMMA_FLOOR);
        }
        let v = profile.eval(&gamma, &mut s, None);
        if v < best.0 {
            best = (v, gamma.clone());
        }
    });
    let run = descend(&profile, best.1, cfg, cfg.seed);
    finish(q, &profile, vec![run], ProjectionMethod::Grid)
}

fn grid_walk(parts: &mut [usize], pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == parts.len() {
        parts[pos] = left;
        visit(parts);
        return;
    }
    for k in 0..=left {
        parts[pos] = k;
        grid_walk(parts, pos + 1, left - k, visit);
    }
}
