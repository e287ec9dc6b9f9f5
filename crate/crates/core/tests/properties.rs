use std::sync::Arc;

use proptest::prelude::*;

use iia_core::bounds::{risk_lower_bound, BoundInput};
use iia_core::graph::{
    decompose_bfs_peel, decompose_combined, decompose_pigeonhole, max_short_cycle, IncidenceGraph,
};
use iia_core::oracle::{exact_chi2_mixture, tv_projection, ProjectionConfig};
use iia_core::perturbation::{directions_from_index, enumerate_family, orient, validate, DEFAULT_FAMILY_LIMIT};
use iia_core::{
    chi_squared, expand_iia, presets, sample_dataset, tv_distance, ChoiceSystem, Collection, Dataset, IiaSystem,
};

fn positive_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|v| {
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    })
}

fn system_on(coll: Arc<Collection>) -> impl Strategy<Value = ChoiceSystem> {
    positive_vec(coll.d()).prop_map(move |p| ChoiceSystem::new(coll.clone(), p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expand_keeps_set_weights(gamma in positive_vec(4), w in positive_vec(3)) {
        let coll = Arc::new(presets::twin_pairs());
        let q = expand_iia(&IiaSystem::new(gamma.clone(), w.clone()).unwrap(), &coll).unwrap();
        prop_assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in q.set_marginals().iter().zip(&w) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // within {a,b,c,d} the odds of a over c are γ_a / γ_c
        let big = coll.find_set(&[0, 1, 2, 3]).unwrap();
        let r = coll.set_range(big);
        prop_assert!((q.probs()[r.start] / q.probs()[r.start + 2] - gamma[0] / gamma[2]).abs() < 1e-9);
    }

    #[test]
    fn divergence_relations(
        p in system_on(Arc::new(presets::triangle())),
        q in system_on(Arc::new(presets::triangle())),
    ) {
        let tv = tv_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&tv));
        prop_assert_eq!(tv, tv_distance(&q, &p).unwrap());
        prop_assert!(tv * tv <= chi_squared(&p, &q).unwrap() / 4.0 + 1e-15);
    }

    #[test]
    fn random_eulerian_decompositions(n in 3usize..=12, seed in any::<u64>()) {
        let coll = presets::random_eulerian(n, seed).unwrap();
        let g = IncidenceGraph::build(&coll);
        prop_assert!(g.is_eulerian());
        for dec in [decompose_pigeonhole(&g).unwrap(), decompose_combined(&g).unwrap()] {
            prop_assert!(dec.is_complete());
            dec.validate(&g).unwrap();
        }
        let peel = decompose_bfs_peel(&g).unwrap();
        peel.validate(&g).unwrap();
        prop_assert!(peel.cycles.iter().all(|c| c.len() <= max_short_cycle(n)));
        prop_assert!(peel.remainder.len() <= (2 * n + coll.n_sets()).min(4 * n));
    }

    #[test]
    fn orientations_have_zero_sums(n in 3usize..=9, seed in any::<u64>(), k in any::<u64>()) {
        let coll = presets::random_eulerian(n, seed).unwrap();
        let dec = decompose_combined(&IncidenceGraph::build(&coll)).unwrap();
        let s = dec.cycles.len();
        let b = orient(&dec, &directions_from_index(k % (1u64 << s.min(62)), s)).unwrap();
        prop_assert!(validate(&b.b, &dec, &coll).unwrap().valid);
        for c in 0..coll.n_sets() {
            prop_assert_eq!(coll.set_range(c).map(|i| b.b[i] as i32).sum::<i32>(), 0);
        }
        let mut items = vec![0i32; coll.n_items()];
        for (i, &(x, _)) in coll.pairs().iter().enumerate() {
            items[x] += b.b[i] as i32;
        }
        prop_assert!(items.iter().all(|&v| v == 0));
    }

    #[test]
    fn bound_is_monotone(
        n in 0u64..10_000,
        extra in 1u64..1000,
        delta in 0.0f64..0.1,
        bump in 0.0f64..0.05,
        mu in 4.0f64..20.0,
        alpha in 4.0f64..40.0,
        d in 4usize..500,
    ) {
        let at = |n, delta| risk_lower_bound(&BoundInput::new(n, delta, d, mu, alpha).unwrap()).unwrap().risk_lower;
        let base = at(n, delta);
        prop_assert!((0.0..=0.5).contains(&base));
        prop_assert!(at(n + extra, delta) <= base);
        prop_assert!(at(n, delta + bump) <= base);
    }

    #[test]
    fn exact_chi2_dominates_bound(eps in 0.0f64..=1.0, n in 0u64..12, twin in any::<bool>()) {
        let coll = Arc::new(if twin { presets::twin_pairs() } else { presets::triangle() });
        let dec = decompose_combined(&IncidenceGraph::build(&coll)).unwrap();
        let fam = enumerate_family(&coll, &dec, eps, DEFAULT_FAMILY_LIMIT).unwrap();
        let chi = exact_chi2_mixture(&fam, n).unwrap();
        let input = BoundInput::new(n, eps / (2.0 * fam.mu()), fam.d(), fam.mu(), fam.alpha()).unwrap();
        let report = risk_lower_bound(&input).unwrap();
        let le_cam = 0.5 - 0.25 * chi.chi2.sqrt();
        prop_assert!(le_cam.max(0.0) >= report.risk_lower - 1e-10);
        if let Some(raw) = report.raw {
            prop_assert!(le_cam >= raw - 1e-10);
        }
        prop_assert!(chi.by_cycles <= chi.exp_pairwise * (1.0 + 1e-12));
        prop_assert!(chi.exp_pairwise <= chi.exp_alpha * (1.0 + 1e-12));
    }

    #[test]
    fn dataset_text_round_trip(p in system_on(Arc::new(presets::twin_pairs())), n in 1usize..200, seed in any::<u64>()) {
        let data = sample_dataset(&p, n, seed).unwrap();
        let coll = p.collection();
        let back = Dataset::parse(&data.to_text(coll), coll).unwrap();
        prop_assert_eq!(back.records(), data.records());
        prop_assert_eq!(data.counts(coll).iter().sum::<u64>(), n as u64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn members_project_near_zero(gamma in positive_vec(4), w in positive_vec(3)) {
        let coll = Arc::new(presets::twin_pairs());
        let q = expand_iia(&IiaSystem::new(gamma, w).unwrap(), &coll).unwrap();
        let r = tv_projection(&q, &ProjectionConfig { starts: 4, ..Default::default() }).unwrap();
        prop_assert!(r.distance <= 1e-6, "{}", r.distance);
    }
}
