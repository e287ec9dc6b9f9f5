//! Fixtures shared by the benches.

use std::sync::Arc;

use iia_core::graph::decompose_combined;
use iia_core::perturbation::DEFAULT_FAMILY_LIMIT;
use iia_core::{enumerate_family, presets, Collection, CycleDecomposition, IncidenceGraph, PerturbationFamily};

/// Even-degree collections of increasing size, labelled for benchmark ids.
pub fn even_collections() -> Vec<(String, Collection)> {
    let mut out = Vec::new();
    for n in [13, 25, 49] {
        out.push((format!("all-pairs:{n}"), presets::all_pairs(n).unwrap()));
    }
    for n in [8, 10] {
        out.push((format!("all-even-subsets:{n}"), presets::all_even_subsets(n).unwrap()));
    }
    for n in [12, 24] {
        out.push((format!("random-eulerian:{n}"), presets::random_eulerian(n, 7).unwrap()));
    }
    out
}

pub fn combined(coll: &Collection) -> CycleDecomposition {
    decompose_combined(&IncidenceGraph::build(coll)).expect("even degrees")
}

/// Every orientation of `dec` at perturbation size `eps`.
pub fn family(coll: &Arc<Collection>, dec: &CycleDecomposition, eps: f64) -> PerturbationFamily {
    enumerate_family(coll, dec, eps, DEFAULT_FAMILY_LIMIT).expect("family within limit")
}
