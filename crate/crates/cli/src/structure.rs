//! `graph` and `decompose`.

use std::fmt::Write as _;
use std::path::Path;

use clap::Args;
use iia_core::graph::max_short_cycle;
use iia_core::IncidenceGraph;
use serde_json::json;

use crate::instance::{node_name, resolve, DecompArgs, InstanceArgs};
use crate::report::{opt, write, Csv, Failure, Report};

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}

pub fn graph(args: &GraphArgs) -> Result<Report, Failure> {
    let coll = args.instance.load()?;
    let g = IncidenceGraph::build(&coll);
    let r = g.euler_report();
    let odd: Vec<String> = r.odd_items.iter().chain(&r.odd_sets).map(|&v| node_name(&coll, v)).collect();
    let (n, m, d) = (coll.n_items(), coll.n_sets(), coll.d());

    let mut text = format!("n={n} m={m} d={d} eulerian={}\n", r.eulerian);
    let _ = writeln!(text, "connected={} components={} even_degrees={}", r.connected, r.components, r.even_degrees);
    if odd.is_empty() {
        text.push_str("odd-degree nodes: none\n");
    } else {
        let _ = writeln!(text, "odd-degree nodes ({}): {}", odd.len(), odd.join(" "));
    }

    let json = json!({
        "n": n, "m": m, "d": d,
        "eulerian": r.eulerian,
        "connected": r.connected,
        "components": r.components,
        "even_degrees": r.even_degrees,
        "acyclic": r.acyclic,
        "odd_nodes": odd,
    });
    let mut csv = Csv::new(&["n", "m", "d", "eulerian", "connected", "components", "odd_nodes"]);
    csv.row(vec![
        n.to_string(),
        m.to_string(),
        d.to_string(),
        r.eulerian.to_string(),
        r.connected.to_string(),
        r.components.to_string(),
        odd.join(" "),
    ]);
    Ok(Report { text, json, csv, passed: true })
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub decomp: DecompArgs,
}

pub fn decompose(args: &DecomposeArgs, seed: u64, out: Option<&Path>) -> Result<Report, Failure> {
    let inst = resolve(args.instance.load()?, &args.decomp, seed)?;
    if let Some(path) = out {
        write(path, &inst.dec.to_text())?;
    }
    let dec = &inst.dec;
    let metrics = dec.metrics().ok();
    let hist: Vec<String> = dec.histogram().iter().map(|(len, count)| format!("{len}x{count}")).collect();
    let n = inst.coll.n_items();

    let mut text = format!("strategy={} edges={} removed={}\n", dec.strategy, dec.edges, inst.removed.len());
    match &metrics {
        Some(m) => {
            let _ = writeln!(text, "|σ|={} μ={} α={}", m.cycles, m.mu, m.alpha);
        }
        None => {
            let _ = writeln!(text, "|σ|={} remainder={} (μ and α need a complete decomposition)", dec.n_cycles(), dec.remainder.len());
        }
    }
    let _ = writeln!(text, "cycle lengths: {}", if hist.is_empty() { "none".into() } else { hist.join(" ") });
    let _ = writeln!(text, "max cycle={} short-cycle cap={}", dec.max_cycle(), max_short_cycle(n));

    let json = json!({
        "strategy": dec.strategy,
        "edges": dec.edges,
        "cycles": dec.n_cycles(),
        "remainder": dec.remainder.len(),
        "removed": inst.removed,
        "mu": metrics.as_ref().map(|m| m.mu),
        "alpha": metrics.as_ref().map(|m| m.alpha),
        "max_cycle": dec.max_cycle(),
        "histogram": dec.histogram(),
    });
    let mut csv = Csv::new(&["strategy", "edges", "cycles", "remainder", "mu", "alpha", "max_cycle"]);
    csv.row(vec![
        dec.strategy.to_string(),
        dec.edges.to_string(),
        dec.n_cycles().to_string(),
        dec.remainder.len().to_string(),
        opt(metrics.as_ref().map(|m| m.mu)),
        opt(metrics.as_ref().map(|m| m.alpha)),
        dec.max_cycle().to_string(),
    ]);
    Ok(Report { text, json, csv, passed: true })
}
