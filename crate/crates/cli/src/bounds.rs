//! `bounds`: closed-form risk floors for a structure, an instance or explicit parameters.

use std::fmt::Write as _;

use clap::Args;
use iia_core::bounds::{best_over_strategies, level_alpha_bound, table_bounds, Structure};
use iia_core::{risk_lower_bound, BoundInput, BoundReport, Error};
use serde_json::{json, Value};

use crate::instance::{even_graph, resolve, DecompArgs, InstanceArgs};
use crate::report::{opt, Csv, Failure, Report};

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub decomp: DecompArgs,
    /// Named structure: all_pairs, all_subsets_even or big_cycle (needs --n).
    #[arg(long, value_name = "NAME", conflicts_with_all = ["collection", "preset"])]
    pub structure: Option<Structure>,
    /// Number of items for --structure.
    #[arg(long = "n", value_name = "ITEMS", requires = "structure")]
    pub items: Option<usize>,
    /// Explicit edge count, with --mu and --alpha.
    #[arg(long, requires_all = ["mu", "alpha"], conflicts_with_all = ["structure", "collection", "preset"])]
    pub d: Option<usize>,
    #[arg(long, requires = "d")]
    pub mu: Option<f64>,
    #[arg(long, requires = "d")]
    pub alpha: Option<f64>,
    /// Number of samples.
    #[arg(long = "N", value_name = "SAMPLES")]
    pub samples: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also report the risk floor over tests of this level.
    #[arg(long = "alpha-level", value_name = "LEVEL")]
    pub alpha_level: Option<f64>,
    /// `N=a..b[:step]` or `delta=a..b:count`; emits one CSV row per point.
    #[arg(long, value_name = "RANGE")]
    pub sweep: Option<String>,
}

/// Inclusive integer range `a..b[:step]`, or a single value.
pub fn parse_samples(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = |why: &str| Failure::input(format!("bad sample range {spec:?}: {why}"));
    let (range, step) = match spec.split_once(':') {
        Some((r, s)) => (r, s.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?),
        None => (spec, 1),
    };
    if step == 0 {
        return Err(bad("step must be positive"));
    }
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?,
            b.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?,
        ),
        None => {
            let v = range.trim().parse::<u64>().map_err(|e| bad(&e.to_string()))?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad("empty range"));
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

/// `a..b:count` evenly spaced values, endpoints included.
fn parse_deltas(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = |why: &str| Failure::input(format!("bad delta range {spec:?}: {why}"));
    let (range, count) = spec.split_once(':').ok_or_else(|| bad("expected a..b:count"))?;
    let count: usize = count.trim().parse().map_err(|e: std::num::ParseIntError| bad(&e.to_string()))?;
    let (a, b) = range.split_once("..").ok_or_else(|| bad("expected a..b:count"))?;
    let a: f64 = a.trim().parse().map_err(|e: std::num::ParseFloatError| bad(&e.to_string()))?;
    let b: f64 = b.trim().parse().map_err(|e: std::num::ParseFloatError| bad(&e.to_string()))?;
    if count == 0 || a > b {
        return Err(bad("empty range"));
    }
    if count == 1 {
        return Ok(vec![a]);
    }
    Ok((0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect())
}

enum Source {
    Table(Structure, usize),
    Params { d: usize, mu: f64, alpha: f64 },
}

impl Source {
    fn evaluate(&self, n: u64, delta: f64) -> Result<BoundReport, Failure> {
        let report = match *self {
            Source::Table(s, items) => table_bounds(s, items, n, delta)?,
            Source::Params { d, mu, alpha } => risk_lower_bound(&BoundInput::new(n, delta, d, mu, alpha)?)?,
        };
        let max = report.inputs.max_delta();
        if delta > max * (1.0 + 1e-12) {
            return Err(Error::DeltaTooLarge { delta, max }.into());
        }
        Ok(report)
    }
}

pub fn bounds(args: &BoundsArgs, seed: u64) -> Result<Report, Failure> {
    let mut grid: Vec<(u64, f64)> = Vec::new();
    match args.sweep.as_deref().map(|s| s.split_once('=')) {
        Some(Some((key, range))) if key.trim() == "N" => {
            let delta = args.delta.ok_or_else(|| Failure::input("an N sweep needs --delta"))?;
            grid.extend(parse_samples(range)?.into_iter().map(|n| (n, delta)));
        }
        Some(Some((key, range))) if key.trim() == "delta" => {
            let n = args.samples.ok_or_else(|| Failure::input("a delta sweep needs --N"))?;
            grid.extend(parse_deltas(range)?.into_iter().map(|d| (n, d)));
        }
        Some(_) => return Err(Failure::input("--sweep expects N=a..b[:step] or delta=a..b:count")),
        None => {
            let n = args.samples.ok_or_else(|| Failure::input("missing --N"))?;
            let delta = args.delta.ok_or_else(|| Failure::input("missing --delta"))?;
            grid.push((n, delta));
        }
    }

    let mut meta = serde_json::Map::new();
    let source = if let Some(s) = args.structure {
        let items = args.items.ok_or_else(|| Failure::input("--structure needs --n"))?;
        meta.insert("structure".into(), json!(s));
        meta.insert("n".into(), json!(items));
        Source::Table(s, items)
    } else if let (Some(d), Some(mu), Some(alpha)) = (args.d, args.mu, args.alpha) {
        Source::Params { d, mu, alpha }
    } else if args.instance.given() {
        let coll = args.instance.load()?;
        let dec = if args.decomp.decomposition.is_some() || args.decomp.strategy.is_some() {
            resolve(coll, &args.decomp, seed)?.dec
        } else {
            // the winner only depends on mu^4 alpha / d, except at a zero exponent
            let (graph, _) = even_graph(&coll, args.decomp.eulerianize)?;
            let &(n, delta) = grid.iter().max_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap()).unwrap();
            let best = best_over_strategies(&coll, &graph, n, delta, seed)?;
            meta.insert("candidates".into(), serde_json::to_value(&best.candidates).expect("serializable"));
            best.decomposition
        };
        let m = dec.metrics()?;
        meta.insert("strategy".into(), json!(dec.strategy));
        Source::Params { d: m.d, mu: m.mu, alpha: m.alpha }
    } else {
        return Err(Failure::input("give --structure, an instance, or --d/--mu/--alpha"));
    };

    let mut reports = Vec::with_capacity(grid.len());
    for &(n, delta) in &grid {
        let r = source.evaluate(n, delta)?;
        let level = args.alpha_level.map(|l| level_alpha_bound(&r.inputs, l)).transpose()?;
        reports.push((r, level));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (r, _) in &reports {
        for w in &r.warnings {
            if seen.insert(w.clone()) {
                eprintln!("warning: {w}");
            }
        }
    }

    let mut header = vec!["N", "delta", "d", "mu", "alpha", "exponent", "risk_lower"];
    if args.alpha_level.is_some() {
        header.push("level_bound");
    }
    let mut csv = Csv::new(&header);
    for (r, level) in &reports {
        let i = &r.inputs;
        let mut row = vec![
            i.n_samples.to_string(),
            i.delta.to_string(),
            i.d.to_string(),
            i.mu.to_string(),
            i.alpha.to_string(),
            r.exponent.to_string(),
            r.risk_lower.to_string(),
        ];
        if args.alpha_level.is_some() {
            row.push(opt(*level));
        }
        csv.row(row);
    }
    let json_report = |(r, level): &(BoundReport, Option<f64>)| -> Value {
        let mut v = serde_json::to_value(r).expect("serializable");
        if let Some(l) = level {
            v["level_bound"] = json!(l);
        }
        v
    };

    let (text, json) = if args.sweep.is_some() {
        meta.insert("rows".into(), Value::Array(reports.iter().map(json_report).collect()));
        (csv.to_string(), Value::Object(meta))
    } else {
        let (r, level) = &reports[0];
        let i = &r.inputs;
        let mut text = format!("formula: {}\n", r.formula);
        if let Some(s) = meta.get("strategy") {
            let _ = writeln!(text, "strategy: {}", s.as_str().unwrap_or_default());
        }
        if let Some(b) = &r.branch {
            let _ = writeln!(text, "branch: {b}");
        }
        let _ = writeln!(text, "N={} delta={} d={} mu={} alpha={}", i.n_samples, i.delta, i.d, i.mu, i.alpha);
        let _ = writeln!(text, "exponent={}", r.exponent);
        let _ = writeln!(text, "risk_lower={}{}", r.risk_lower, if r.vacuous { " (vacuous)" } else { "" });
        if let Some(l) = level {
            let _ = writeln!(text, "level_bound={l}");
        }
        let _ = writeln!(text, "radius_scale={} sample_scale={}", opt(r.radius_scale), opt(r.sample_scale));
        meta.insert("report".into(), json_report(&reports[0]));
        (text, Value::Object(meta))
    };
    Ok(Report { text, json, csv, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_samples("3").unwrap(), vec![3]);
        assert_eq!(parse_samples("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_samples("0..10:5").unwrap(), vec![0, 5, 10]);
        assert!(parse_samples("5..1").is_err());
        assert!(parse_samples("1..5:0").is_err());
        assert_eq!(parse_deltas("0.0..0.5:3").unwrap(), vec![0.0, 0.25, 0.5]);
        assert_eq!(parse_deltas("0.1..0.2:1").unwrap(), vec![0.1]);
        assert!(parse_deltas("0.1..0.2").is_err());
    }
}
