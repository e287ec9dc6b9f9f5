//! `adversary`: certified perturbations of the uniform system.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::Args;
use iia_core::perturbation::DEFAULT_FAMILY_LIMIT;
use iia_core::{enumerate_family, sample_family, Error, Orientation};
use serde_json::json;

use crate::instance::{calibrate, resolve, DecompArgs, InstanceArgs};
use crate::report::{write, Csv, Failure, Report};

#[derive(Args, Debug)]
pub struct AdversaryArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub decomp: DecompArgs,
    #[arg(long)]
    pub delta: f64,
    /// Number of orientations; defaults to all of them when there are at most 1024.
    #[arg(long)]
    pub count: Option<usize>,
}

/// Bit `i` set means cycle `i` is traversed against its listed direction.
fn family_index(o: &Orientation) -> u64 {
    o.a.iter().enumerate().filter(|(_, &s)| s < 0).map(|(i, _)| 1u64 << i).sum()
}

fn signs(v: &[i8]) -> String {
    v.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn adversary(args: &AdversaryArgs, seed: u64, out: Option<&Path>) -> Result<Report, Failure> {
    let inst = resolve(args.instance.load()?, &args.decomp, seed)?;
    let cal = calibrate(&inst, None, Some(args.delta))?;
    let m = inst.dec.metrics()?;
    let s = m.cycles;
    let available = (s < 63).then(|| 1u64 << s);
    let count = match (args.count, available) {
        (Some(c), Some(total)) if c as u64 > total => {
            return Err(Failure::guard(format!("requested {c} orientations but only 2^{s} = {total} exist")));
        }
        (Some(c), _) => c,
        (None, Some(total)) if total <= 1024 => total as usize,
        (None, _) => return Err(Failure::input(format!("2^{s} orientations exist; choose a subset with --count"))),
    };
    let family = if available == Some(count as u64) {
        enumerate_family(&inst.coll, &inst.dec, cal.epsilon, DEFAULT_FAMILY_LIMIT)?
    } else {
        sample_family(&inst.coll, &inst.dec, cal.epsilon, count, seed)?
    };
    let mut members: Vec<(u64, &Orientation)> = family.orientations().iter().map(|o| (family_index(o), o)).collect();
    members.sort_by_key(|&(k, _)| k);

    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io(e)).at(dir))?;
        let coll = &inst.coll;
        for &(k, o) in &members {
            let mut file = String::new();
            let _ = writeln!(file, "# family_index {k}");
            let _ = writeln!(file, "# directions {}", signs(&o.a));
            let _ = writeln!(file, "# delta {}", cal.delta);
            let _ = writeln!(file, "# epsilon {}", cal.epsilon);
            let _ = writeln!(file, "# certified_floor {}", cal.certified_floor);
            file.push_str("set,item,b,q\n");
            let d = o.b.len() as f64;
            for (i, &(x, c)) in coll.pairs().iter().enumerate() {
                let q = (1.0 + cal.epsilon * o.b[i] as f64) / d;
                let _ = writeln!(file, "{c},{},{},{q}", coll.item_name(x), o.b[i]);
            }
            write(&dir.join(format!("orientation-{k}.csv")), &file)?;
        }
    }

    let mut text = format!("strategy={} |σ|={} d={} μ={} α={}\n", inst.dec.strategy, s, m.d, m.mu, m.alpha);
    let _ = writeln!(
        text,
        "delta={} epsilon={} certified_floor={} orientations={}",
        cal.delta,
        cal.epsilon,
        cal.certified_floor,
        members.len()
    );
    for &(k, o) in &members {
        let _ = writeln!(text, "orientation {k}: directions {} b {}", signs(&o.a), signs(&o.b));
    }
    let mut csv = Csv::new(&["family_index", "directions", "epsilon", "certified_floor", "b"]);
    for &(k, o) in &members {
        csv.row(vec![
            k.to_string(),
            signs(&o.a),
            cal.epsilon.to_string(),
            cal.certified_floor.to_string(),
            signs(&o.b),
        ]);
    }
    let json = json!({
        "strategy": inst.dec.strategy,
        "calibration": cal,
        "orientations": members.iter().map(|&(k, o)| json!({"family_index": k, "a": o.a, "b": o.b})).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, csv, passed: true })
}
