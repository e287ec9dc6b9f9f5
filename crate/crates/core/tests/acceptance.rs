//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iia_core::bounds::{risk_lower_bound, table_bounds, BoundInput, Structure, ALL_PAIRS_CONSTANT, BIG_CYCLE_CONSTANT};
use iia_core::graph::{decompose_bfs_peel, decompose_combined, decompose_kirkman, max_short_cycle, IncidenceGraph};
use iia_core::oracle::{
    exact_chi2_mixture, kl_projection, simulate_risk, tv_projection, verify_lemma_chain, ProjectionConfig,
    TestProcedure,
};
use iia_core::perturbation::{enumerate_family, validate, PerturbationFamily, DEFAULT_FAMILY_LIMIT};
use iia_core::{expand_iia, perturb, presets, uniform_system, Collection, CycleDecomposition, Mixture};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn family(coll: &Arc<Collection>, dec: &CycleDecomposition, eps: f64) -> PerturbationFamily {
    enumerate_family(coll, dec, eps, DEFAULT_FAMILY_LIMIT).expect("family within limit")
}

fn combined(coll: &Collection) -> CycleDecomposition {
    decompose_combined(&IncidenceGraph::build(coll)).expect("even-degree collection")
}

struct Instance {
    name: &'static str,
    coll: Arc<Collection>,
    dec: CycleDecomposition,
}

fn instances(kirkman: bool) -> Vec<Instance> {
    let mut out = Vec::new();
    for (name, coll) in [("triangle", presets::triangle()), ("twin-pairs", presets::twin_pairs())] {
        let dec = combined(&coll);
        out.push(Instance { name, coll: Arc::new(coll), dec });
    }
    if kirkman {
        let coll = presets::all_pairs(7).unwrap();
        let dec = decompose_kirkman(&coll, 0).unwrap();
        out.push(Instance { name: "all-pairs-7", coll: Arc::new(coll), dec });
    }
    out
}

fn twin_pairs_structure() -> Outcome {
    let coll = Arc::new(presets::twin_pairs());
    ensure(coll.d() == 8, || format!("d = {}", coll.d()))?;
    let dec = combined(&coll);
    let mut lengths = dec.cycle_lengths();
    lengths.sort_unstable();
    ensure(lengths == [4, 4], || format!("cycle lengths {lengths:?}"))?;
    let m = dec.metrics().map_err(|e| e.to_string())?;
    ensure(m.mu == 4.0 && m.alpha == 4.0, || format!("mu {} alpha {}", m.mu, m.alpha))?;
    let fam = family(&coll, &dec, 0.5);
    let distinct: HashSet<_> = fam.orientations().iter().map(|o| o.b.clone()).collect();
    ensure(fam.len() == 4 && distinct.len() == 4, || format!("{} orientations", fam.len()))?;
    for o in fam.orientations() {
        let check = validate(&o.b, &dec, &coll).map_err(|e| e.to_string())?;
        ensure(check.valid, || format!("invalid orientation {:?}", o.b))?;
    }
    Ok("d=8, cycles (4,4), 4 valid orientations, mu=4, alpha=4".into())
}

fn kirkman_decompositions() -> Outcome {
    for n in [7usize, 9, 13, 15] {
        let coll = presets::all_pairs(n).unwrap();
        let dec = decompose_kirkman(&coll, 0).map_err(|e| e.to_string())?;
        dec.validate(&IncidenceGraph::build(&coll)).map_err(|e| e.to_string())?;
        let covered: usize = dec.cycle_lengths().iter().sum();
        ensure(covered == n * (n - 1), || format!("n={n}: covered {covered}"))?;
        ensure(dec.cycle_lengths().iter().all(|&l| l == 6), || format!("n={n}: non-six cycle"))?;
        let m = dec.metrics().map_err(|e| e.to_string())?;
        ensure(m.mu == 6.0 && m.alpha == 6.0, || format!("n={n}: mu {} alpha {}", m.mu, m.alpha))?;
    }
    let coll = presets::all_pairs(11).unwrap();
    let dec = decompose_kirkman(&coll, 0).map_err(|e| e.to_string())?;
    dec.validate(&IncidenceGraph::build(&coll)).map_err(|e| e.to_string())?;
    let alpha = dec.metrics().map_err(|e| e.to_string())?.alpha;
    let want = 6.0 + 16.0 / 110.0;
    ensure((alpha - want).abs() < 1e-12, || format!("n=11: alpha {alpha}, want {want}"))?;
    Ok(format!("n in {{7,9,13,15}}: mu=alpha=6; n=11: alpha={alpha:.6}"))
}

fn short_cycle_guarantees() -> Outcome {
    let mut cycles = 0usize;
    for seed in 0..1000u64 {
        let n = 3 + (seed % 10) as usize;
        let coll = presets::random_eulerian(n, seed).map_err(|e| e.to_string())?;
        let g = IncidenceGraph::build(&coll);
        let dec = decompose_bfs_peel(&g).map_err(|e| format!("seed {seed}: {e}"))?;
        dec.validate(&g).map_err(|e| format!("seed {seed}: {e}"))?;
        let cap = max_short_cycle(n);
        let longest = dec.max_cycle();
        ensure(longest <= cap, || format!("seed {seed}, n={n}: cycle {longest} > {cap}"))?;
        let rem_cap = (2 * n + coll.n_sets()).min(4 * n);
        ensure(dec.remainder.len() <= rem_cap, || {
            format!("seed {seed}, n={n}: remainder {} > {rem_cap}", dec.remainder.len())
        })?;
        cycles += dec.n_cycles();
    }
    Ok(format!("1000 collections, {cycles} peeled cycles, no violations"))
}

fn separation_floor() -> Outcome {
    let mut worst_gap = f64::INFINITY;
    let mut checked = 0;
    for inst in instances(false) {
        let m = inst.dec.metrics().map_err(|e| e.to_string())?;
        for eps in [0.1, 0.3, 0.6] {
            let fam = family(&inst.coll, &inst.dec, eps);
            let floor = eps * m.cycles as f64 / (2.0 * m.d as f64);
            for (k, q) in fam.systems().map_err(|e| e.to_string())?.iter().enumerate() {
                let cfg = ProjectionConfig { seed: k as u64, ..Default::default() };
                let r = tv_projection(q, &cfg).map_err(|e| e.to_string())?;
                ensure(r.distance >= floor - 1e-9 && r.distance <= eps / 2.0 + 1e-9, || {
                    format!("{} eps={eps} b#{k}: {} outside [{floor}, {}]", inst.name, r.distance, eps / 2.0)
                })?;
                worst_gap = worst_gap.min(r.distance - floor);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} projections within [floor, eps/2]; smallest margin over floor {worst_gap:.4}"))
}

fn chi2_chain() -> Outcome {
    let tri = Arc::new(presets::triangle());
    let fam = family(&tri, &combined(&tri), 0.5);
    let chi = exact_chi2_mixture(&fam, 2).map_err(|e| e.to_string())?.chi2;
    ensure((chi - 0.0625).abs() < 1e-15, || format!("triangle chi2 {chi}"))?;
    let mut worst = f64::INFINITY;
    for inst in instances(false) {
        for eps in [0.1, 0.25, 0.5] {
            let fam = family(&inst.coll, &inst.dec, eps);
            for n in 1..=6u64 {
                let r = verify_lemma_chain(&fam, n).map_err(|e| e.to_string())?;
                ensure(r.tv.is_some(), || format!("{} N={n}: TV skipped", inst.name))?;
                for link in &r.links {
                    ensure(link.pass, || format!("{} eps={eps} N={n}: {} slack {}", inst.name, link.name, link.slack))?;
                    worst = worst.min(link.slack);
                }
            }
        }
    }
    Ok(format!("chi2 = {chi}; all links hold, smallest slack {worst:.3e}"))
}

fn minimax_consistency() -> Outcome {
    let tests = TestProcedure::registered();
    let mut checks = 0;
    let mut tightest = f64::INFINITY;
    for (i, inst) in instances(true).iter().enumerate() {
        let m = inst.dec.metrics().map_err(|e| e.to_string())?;
        let max_delta = 1.0 / (2.0 * m.mu);
        for (j, delta) in [max_delta / 4.0, max_delta / 2.0, max_delta].into_iter().enumerate() {
            let eps = (2.0 * m.mu * delta).min(1.0);
            let mixture = Mixture::new(family(&inst.coll, &inst.dec, eps)).map_err(|e| e.to_string())?;
            for n in [5u64, 20, 80] {
                let bound = risk_lower_bound(&BoundInput::new(n, delta, m.d, m.mu, m.alpha).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?
                    .risk_lower;
                for (k, test) in tests.iter().enumerate() {
                    let seed = ((i * 3 + j) * 3 + n as usize) as u64 * 16 + k as u64;
                    let est = simulate_risk(test, &mixture, n, 2000, seed).map_err(|e| e.to_string())?;
                    let margin = est.risk - (bound - 3.0 * est.se);
                    ensure(margin >= 0.0, || {
                        format!(
                            "{} delta={delta:.4} N={n} {}: risk {:.4} < bound {bound:.4} - 3*{:.4}",
                            inst.name, est.test, est.risk, est.se
                        )
                    })?;
                    tightest = tightest.min(margin);
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} (instance, delta, N, test) points; smallest margin {tightest:.4}"))
}

fn kl_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for inst in instances(true) {
        let p0 = uniform_system(&inst.coll);
        let base = expand_iia(&kl_projection(&p0).map_err(|e| e.to_string())?, &inst.coll).map_err(|e| e.to_string())?;
        let fam = family(&inst.coll, &inst.dec, 1.0);
        for _ in 0..200 {
            let b = &fam.orientations()[rng.random_range(0..fam.len())];
            let eps: f64 = rng.random_range(0.0..=1.0);
            let q = perturb(&p0, b, eps).map_err(|e| e.to_string())?;
            let fit = expand_iia(&kl_projection(&q).map_err(|e| e.to_string())?, &inst.coll).map_err(|e| e.to_string())?;
            for (a, c) in fit.probs().iter().zip(base.probs()) {
                worst = worst.max((a - c).abs());
            }
        }
        ensure(worst <= 1e-6, || format!("{}: max entry gap {worst}", inst.name))?;
    }
    Ok(format!("600 perturbed systems; max entry gap {worst:.2e}"))
}

fn table_scaling() -> Outcome {
    let (samples, delta) = (10u64, 0.01);
    let mut pair_ratios = Vec::new();
    for n in [7usize, 13, 19, 25] {
        let r = table_bounds(Structure::AllPairs, n, samples, delta).map_err(|e| e.to_string())?;
        let d = (n * (n - 1)) as f64;
        let constant = r.exponent * d / (samples as f64).powi(2) / delta.powi(4);
        ensure((constant / ALL_PAIRS_CONSTANT - 1.0).abs() < 1e-12, || format!("all_pairs n={n}: constant {constant}"))?;
        let scale = r.sample_scale.ok_or("missing sample scale")?;
        // exactly proportional to sqrt(n(n-1))/δ², hence to n/δ² up to sqrt(1 - 1/n)
        let exact = scale * delta * delta / d.sqrt();
        ensure((exact * 7776f64.sqrt() - 1.0).abs() < 1e-12, || format!("all_pairs n={n}: scale {scale}"))?;
        pair_ratios.push(scale / (n as f64 / (delta * delta)));
    }
    let spread = pair_ratios.iter().cloned().fold(0.0, f64::max) / pair_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(spread < 1.07, || format!("all_pairs ratio spread {spread}"))?;
    let mut cycle_ratios = Vec::new();
    for n in [7usize, 13, 19, 25] {
        let r = table_bounds(Structure::BigCycle, n, samples, delta).map_err(|e| e.to_string())?;
        let constant = r.exponent / ((n as f64).powi(4) * (samples as f64).powi(2) * delta.powi(4));
        ensure((constant / BIG_CYCLE_CONSTANT - 1.0).abs() < 1e-12, || format!("big_cycle n={n}: constant {constant}"))?;
        let scale = r.sample_scale.ok_or("missing sample scale")?;
        cycle_ratios.push(scale / (1.0 / ((n * n) as f64 * delta * delta)));
    }
    ensure(cycle_ratios.iter().all(|r| (r - 0.25).abs() < 1e-12), || format!("big_cycle ratios {cycle_ratios:?}"))?;
    ensure(ALL_PAIRS_CONSTANT == 62208.0 && BIG_CYCLE_CONSTANT == 128.0, || "constants".into())?;
    Ok(format!(
        "all_pairs ratio to n/delta^2 within factor {spread:.4} (sqrt(1-1/n)); big_cycle ratio 1/4; constants 62208, 128"
    ))
}

fn even_subset_caps() -> Outcome {
    let mut notes = Vec::new();
    for n in [6usize, 8] {
        let coll = presets::all_even_subsets(n).unwrap();
        let appearances = coll.item_appearances();
        ensure(appearances.iter().all(|&a| a == 1 << (n - 2)), || format!("n={n}: appearances {appearances:?}"))?;
        let g = IncidenceGraph::build(&coll);
        let dec = decompose_combined(&g).map_err(|e| e.to_string())?;
        dec.validate(&g).map_err(|e| e.to_string())?;
        let m = dec.metrics().map_err(|e| e.to_string())?;
        let cap = 5.0 * (n as f64).log2();
        ensure(m.mu <= cap && m.alpha <= cap, || format!("n={n}: mu {} alpha {} cap {cap}", m.mu, m.alpha))?;
        notes.push(format!("n={n}: mu={:.3} alpha={:.3} cap={cap:.3}", m.mu, m.alpha));
    }
    Ok(notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("1 twin-pairs structure", twin_pairs_structure, Duration::from_secs(1)),
        ("2 kirkman decompositions", kirkman_decompositions, Duration::from_secs(5)),
        ("3 short-cycle peeling", short_cycle_guarantees, Duration::from_secs(60)),
        ("4 separation floor", separation_floor, Duration::from_secs(120)),
        ("5 exact chi2 chain", chi2_chain, Duration::from_secs(30)),
        ("6 minimax consistency", minimax_consistency, Duration::from_secs(600)),
        ("7 kl-projection invariance", kl_invariance, Duration::from_secs(60)),
        ("8 table scaling", table_scaling, Duration::from_secs(1)),
        ("9 even-subset caps", even_subset_caps, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > budget => Err(format!("{msg}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS [{name}] {msg} ({took:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{name}] {msg} ({took:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
