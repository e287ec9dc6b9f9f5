//! `verify` and `simulate`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use iia_core::oracle::{
    exact_chi2_mixture, simulate_risk, tv_projection, verify_lemma_chain, ProjectionConfig, TestProcedure,
    DEFAULT_STARTS,
};
use iia_core::perturbation::{Calibration, DEFAULT_FAMILY_LIMIT};
use iia_core::{derive_seed, enumerate_family, risk_lower_bound, BoundInput, Mixture, PerturbationFamily};
use serde::Serialize;
use serde_json::json;

use crate::bounds::parse_samples;
use crate::instance::{calibrate, resolve, DecompArgs, Instance, InstanceArgs};
use crate::report::{write, Csv, Failure, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Separation,
    Chi2,
    LemmaChain,
    Risk,
}

#[derive(Args, Debug, Clone)]
pub struct Perturbation {
    /// Perturbation size in [0, 1].
    #[arg(long, conflicts_with = "delta")]
    pub epsilon: Option<f64>,
    /// Separation; the perturbation size is 2 mu delta.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub decomp: DecompArgs,
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub perturbation: Perturbation,
    /// Sample sizes: a value or `a..b[:step]`.
    #[arg(long = "N", value_name = "SAMPLES")]
    pub samples: Option<String>,
    /// Monte-Carlo trials per hypothesis for the risk suite.
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Random starts for the projection search.
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    observed: f64,
    required: String,
    pass: bool,
}

fn exhaustive(inst: &Instance, cal: &Calibration) -> Result<PerturbationFamily, Failure> {
    Ok(enumerate_family(&inst.coll, &inst.dec, cal.epsilon, DEFAULT_FAMILY_LIMIT)?)
}

fn sample_sizes(spec: Option<&str>) -> Result<Vec<u64>, Failure> {
    parse_samples(spec.ok_or_else(|| Failure::input("this suite needs --N"))?)
}

fn bound_at(inst: &Instance, cal: &Calibration, n: u64) -> Result<f64, Failure> {
    let m = inst.dec.metrics()?;
    Ok(risk_lower_bound(&BoundInput::new(n, cal.delta, m.d, m.mu, m.alpha)?)?.risk_lower)
}

pub fn verify(args: &VerifyArgs, seed: u64) -> Result<Report, Failure> {
    let inst = resolve(args.instance.load()?, &args.decomp, seed)?;
    let cal = calibrate(&inst, args.perturbation.epsilon, args.perturbation.delta)?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    match args.suite {
        Suite::Separation => {
            let fam = exhaustive(&inst, &cal)?;
            let upper = cal.epsilon / 2.0;
            for k in 0..fam.len() {
                let cfg = ProjectionConfig { starts: args.starts, seed: derive_seed(seed, k as u64), ..Default::default() };
                let r = tv_projection(&fam.system(k)?, &cfg)?;
                checks.push(Check {
                    name: format!("orientation {k}: tv to IIA"),
                    observed: r.distance,
                    required: format!("in [{}, {upper}]", cal.certified_floor),
                    pass: r.distance >= cal.certified_floor - 1e-9 && r.distance <= upper + 1e-9,
                });
            }
        }
        Suite::Chi2 => {
            let fam = exhaustive(&inst, &cal)?;
            for n in sample_sizes(args.samples.as_deref())? {
                let r = exact_chi2_mixture(&fam, n)?;
                notes.push(format!("N={n}: chi2={} chi2+1={}", r.chi2, r.pairwise));
                checks.push(Check {
                    name: format!("N={n}: chi2 + 1 <= mean exp(N eps^2 b.b'/d)"),
                    observed: r.by_cycles,
                    required: format!("<= {}", r.exp_pairwise),
                    pass: r.by_cycles <= r.exp_pairwise * (1.0 + 1e-12),
                });
                checks.push(Check {
                    name: format!("N={n}: mean exp <= exp(N^2 eps^4 alpha/(2d))"),
                    observed: r.exp_pairwise,
                    required: format!("<= {}", r.exp_alpha),
                    pass: r.exp_pairwise <= r.exp_alpha * (1.0 + 1e-12),
                });
            }
        }
        Suite::LemmaChain => {
            let fam = exhaustive(&inst, &cal)?;
            for n in sample_sizes(args.samples.as_deref())? {
                let r = verify_lemma_chain(&fam, n)?;
                notes.extend(r.notices.iter().map(|s| format!("N={n}: {s}")));
                for link in &r.links {
                    checks.push(Check {
                        name: format!("N={n}: {}", link.name),
                        observed: link.lhs,
                        required: format!("<= {}", link.rhs),
                        pass: link.pass,
                    });
                }
            }
        }
        Suite::Risk => {
            let mixture = Mixture::new(exhaustive(&inst, &cal)?)?;
            for n in sample_sizes(args.samples.as_deref())? {
                let bound = bound_at(&inst, &cal, n)?;
                for (t, test) in TestProcedure::registered().iter().enumerate() {
                    let est = simulate_risk(test, &mixture, n, args.trials, derive_seed(seed, n * 8 + t as u64))?;
                    let floor = bound - 3.0 * est.se;
                    checks.push(Check {
                        name: format!("N={n}: {} risk", est.test),
                        observed: est.risk,
                        required: format!(">= {floor} (bound {bound} - 3 se)"),
                        pass: est.risk >= floor,
                    });
                }
            }
        }
    }

    let passed = checks.iter().all(|c| c.pass);
    let mut text = format!(
        "suite={} epsilon={} delta={} certified_floor={}\n",
        args.suite.to_possible_value().expect("named").get_name(),
        cal.epsilon,
        cal.delta,
        cal.certified_floor
    );
    for note in &notes {
        let _ = writeln!(text, "{note}");
    }
    for c in &checks {
        let _ = writeln!(text, "{} {}: observed {} required {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed, c.required);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(text, "{} of {} checks passed", checks.len() - failed, checks.len());
    let mut csv = Csv::new(&["check", "observed", "required", "pass"]);
    for c in &checks {
        csv.row(vec![c.name.clone(), c.observed.to_string(), c.required.clone(), c.pass.to_string()]);
    }
    let json = json!({
        "suite": args.suite,
        "calibration": cal,
        "notes": notes,
        "checks": checks,
        "passed": passed,
    });
    Ok(Report { text, json, csv, passed })
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub decomp: DecompArgs,
    #[command(flatten)]
    pub perturbation: Perturbation,
    /// Sample sizes: a value or `a..b[:step]`.
    #[arg(long = "N", value_name = "SAMPLES")]
    pub samples: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Test procedure to run; repeat for several. Defaults to every registered test.
    #[arg(long = "test", value_name = "NAME")]
    pub tests: Vec<TestProcedure>,
    /// Also write one dataset drawn from the mixture alternative (single N only).
    #[arg(long, value_name = "PATH")]
    pub dataset: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs, seed: u64) -> Result<Report, Failure> {
    let inst = resolve(args.instance.load()?, &args.decomp, seed)?;
    let cal = calibrate(&inst, args.perturbation.epsilon, args.perturbation.delta)?;
    let sizes = parse_samples(&args.samples)?;
    let tests = if args.tests.is_empty() { TestProcedure::registered() } else { args.tests.clone() };
    let mixture = Mixture::new(exhaustive(&inst, &cal)?)?;

    let mut dataset_note = None;
    if let Some(path) = &args.dataset {
        let [n] = sizes[..] else {
            return Err(Failure::input("--dataset needs a single --N"));
        };
        let (data, hidden) = mixture.sample_dataset(n as usize, seed)?;
        write(path, &data.to_text(&inst.coll))?;
        dataset_note = Some(hidden);
    }

    let mut csv = Csv::new(&["test", "N", "trials", "type1", "type2", "risk", "se", "bound"]);
    let mut rows = Vec::new();
    for &n in &sizes {
        let bound = bound_at(&inst, &cal, n)?;
        for (t, test) in tests.iter().enumerate() {
            let est = simulate_risk(test, &mixture, n, args.trials, derive_seed(seed, n * 8 + t as u64))?;
            csv.row(vec![
                est.test.clone(),
                n.to_string(),
                est.trials.to_string(),
                est.type1.to_string(),
                est.type2.to_string(),
                est.risk.to_string(),
                est.se.to_string(),
                bound.to_string(),
            ]);
            rows.push(json!({"estimate": est, "bound": bound}));
        }
    }
    let mut text = format!("epsilon={} delta={} orientations={}\n", cal.epsilon, cal.delta, mixture.family().len());
    if let Some(k) = dataset_note {
        let _ = writeln!(text, "dataset drawn under orientation {k}");
    }
    text.push_str(&csv.to_string());
    let json = json!({"calibration": cal, "dataset_orientation": dataset_note, "rows": rows});
    Ok(Report { text, json, csv, passed: true })
}
