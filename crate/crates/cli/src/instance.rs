//! Loading collections and decompositions from command-line flags.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use iia_core::graph::decompose;
use iia_core::perturbation::Calibration;
use iia_core::{epsilon_for_delta, presets, Collection, CycleDecomposition, IncidenceGraph, Strategy};

use crate::report::{read, Failure};

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Collection file: one choice set per line, comma-separated item names, `#` comments.
    #[arg(value_name = "COLLECTION")]
    pub collection: Option<PathBuf>,
    /// Built-in collection: twin-pairs, triangle, all-pairs:N, all-even-subsets:N, big-cycle:N.
    #[arg(long, conflicts_with = "collection")]
    pub preset: Option<String>,
}

impl InstanceArgs {
    pub fn given(&self) -> bool {
        self.collection.is_some() || self.preset.is_some()
    }

    pub fn load(&self) -> Result<Arc<Collection>, Failure> {
        let coll = match (&self.collection, &self.preset) {
            (Some(path), _) => Collection::parse(&read(path)?).map_err(|e| Failure::from(e).at(path))?,
            (None, Some(name)) => presets::by_name(name)?,
            (None, None) => return Err(Failure::input("no instance: give a collection file or --preset")),
        };
        for w in coll.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(Arc::new(coll))
    }
}

#[derive(Args, Debug, Clone)]
pub struct DecompArgs {
    /// Decomposition file written by `iia decompose --out`.
    #[arg(long, conflicts_with_all = ["strategy", "eulerianize"])]
    pub decomposition: Option<PathBuf>,
    /// pigeonhole, bfs-peel, combined or kirkman.
    #[arg(long, value_name = "NAME")]
    pub strategy: Option<Strategy>,
    /// Remove shortest paths between odd-degree nodes before decomposing.
    #[arg(long)]
    pub eulerianize: bool,
}

/// A collection and a decomposition of its (possibly repaired) incidence graph.
pub struct Instance {
    pub coll: Arc<Collection>,
    pub dec: CycleDecomposition,
    /// Edges dropped to make every degree even.
    pub removed: Vec<usize>,
}

pub fn node_name(coll: &Collection, node: usize) -> String {
    let n = coll.n_items();
    if node < n {
        coll.item_name(node).to_string()
    } else {
        let names: Vec<&str> = coll.set(node - n).iter().map(|&x| coll.item_name(x)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// The graph to decompose: the full incidence graph, or its parity repair.
pub fn even_graph(coll: &Collection, eulerianize: bool) -> Result<(IncidenceGraph, Vec<usize>), Failure> {
    let full = IncidenceGraph::build(coll);
    if full.all_degrees_even() {
        return Ok((full, Vec::new()));
    }
    if eulerianize {
        let repair = full.eulerianize()?;
        let removed = repair.removed();
        return Ok((repair.graph, removed));
    }
    let report = full.euler_report();
    let odd: Vec<String> =
        report.odd_items.iter().chain(&report.odd_sets).map(|&v| node_name(coll, v)).collect();
    Err(Failure::guard(format!(
        "graph is not Eulerian: odd-degree nodes {}; pass --eulerianize to remove paths between them",
        odd.join(", ")
    )))
}

pub fn resolve(coll: Arc<Collection>, args: &DecompArgs, seed: u64) -> Result<Instance, Failure> {
    if let Some(path) = &args.decomposition {
        let dec = CycleDecomposition::parse(&read(path)?).map_err(|e| Failure::from(e).at(path))?;
        let d = coll.d();
        let mut used = vec![false; d];
        for &e in dec.cycles.iter().flatten().chain(&dec.remainder) {
            if e >= d {
                return Err(Failure::input(format!("edge {e} out of range for d = {d}")).at(path));
            }
            used[e] = true;
        }
        let removed: Vec<usize> = (0..d).filter(|&e| !used[e]).collect();
        let full = IncidenceGraph::build(&coll);
        let graph = if removed.is_empty() { full } else { full.without(&removed) };
        dec.validate(&graph)
            .map_err(|e| Failure::input(format!("does not fit the collection: {e}")).at(path))?;
        return Ok(Instance { coll, dec, removed });
    }
    let (graph, removed) = even_graph(&coll, args.eulerianize)?;
    let dec = decompose(&graph, &coll, args.strategy.unwrap_or(Strategy::Combined), seed)?;
    for w in &dec.warnings {
        eprintln!("warning: {w}");
    }
    Ok(Instance { coll, dec, removed })
}

/// Perturbation size from either `--epsilon` or `--delta`.
pub fn calibrate(inst: &Instance, epsilon: Option<f64>, delta: Option<f64>) -> Result<Calibration, Failure> {
    let delta = match (epsilon, delta) {
        (_, Some(delta)) => delta,
        (Some(eps), None) => {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Failure::input(format!("epsilon must lie in [0, 1], got {eps}")));
            }
            eps / (2.0 * inst.dec.metrics()?.mu)
        }
        (None, None) => return Err(Failure::input("give --epsilon or --delta")),
    };
    Ok(epsilon_for_delta(&inst.dec, inst.coll.n_items(), delta)?)
}
