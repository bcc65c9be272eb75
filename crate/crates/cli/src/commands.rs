use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use plugin_fdr::discrete::{adjust_randomized, apply_adjustment, AdjustmentKind, RandomizedOptions};
use plugin_fdr::estimators::{Estimator, EstimatorSpec};
use plugin_fdr::fisher::{fisher_exact, Alternative};
use plugin_fdr::io::{self as fio, fmt_f64};
use plugin_fdr::par::Execution;
use plugin_fdr::procedures::bh_stepup;
use plugin_fdr::pvalues::PValueVector;
use plugin_fdr::simulation::{run_experiment, ExperimentEntry, ExperimentOptions, ReportRow, Setting};
use plugin_fdr::verification::{self, SuiteSizes, VerifyRow};
use plugin_fdr::DiscreteNullDistribution;

use crate::{
    AdjustArg, AdjustOpts, AlternativeArg, BhArgs, EstimateArgs, FetArgs, SimKind, SimulateArgs, VerifyArgs, VerifyKind,
};

pub enum Outcome {
    Success,
    VerificationFailed,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn adjustment(arg: AdjustArg) -> AdjustmentKind {
    match arg {
        AdjustArg::None => AdjustmentKind::None,
        AdjustArg::Du => AdjustmentKind::Du,
        AdjustArg::Mid => AdjustmentKind::Mid,
        AdjustArg::Rand => AdjustmentKind::Rand,
    }
}

/// JSON text, a JSON file, or a shorthand such as `storey:0.5` or `poly:2:0.5`.
pub fn parse_estimator(s: &str) -> Result<EstimatorSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).with_context(|| format!("malformed estimator spec {s}"));
    }
    let path = Path::new(s);
    if path.is_file() {
        return serde_json::from_reader(open(path)?).with_context(|| format!("malformed estimator spec in {s}"));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize, default: Option<f64>| -> Result<f64> {
        match parts.get(i) {
            Some(v) => v
                .parse::<f64>()
                .with_context(|| format!("bad number '{v}' in estimator '{s}'")),
            None => default.ok_or_else(|| anyhow!("estimator '{s}' is missing parameter {i}")),
        }
    };
    let spec = match parts[0] {
        "storey" => EstimatorSpec::storey(num(1, Some(0.5))?),
        "pc_new" | "pc" => EstimatorSpec::PcNew,
        "pc_legacy" => EstimatorSpec::PcLegacy,
        "pc_zzd" => EstimatorSpec::pc_zzd_500(),
        "poly" => EstimatorSpec::poly(num(1, None)?, num(2, Some(0.5))?),
        other => bail!("unknown estimator '{other}'"),
    };
    Estimator::new(spec.clone())?;
    Ok(spec)
}

fn load_pvalues(input: &Path, opts: &AdjustOpts) -> Result<PValueVector> {
    let file = fio::read_pvalues(open(input)?).with_context(|| format!("reading {}", input.display()))?;
    let supports = match &opts.supports {
        Some(p) => Some(fio::read_supports(open(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    if opts.adjust != AdjustArg::None && supports.is_none() {
        bail!("--adjust {:?} requires --supports", opts.adjust);
    }
    Ok(fio::assemble(file, supports)?)
}

fn rand_options(opts: &AdjustOpts) -> Result<Option<RandomizedOptions>> {
    if opts.adjust != AdjustArg::Rand {
        return Ok(None);
    }
    let seed = opts.seed.ok_or_else(|| anyhow!("--adjust rand requires --seed"))?;
    Ok(Some(RandomizedOptions {
        reps: opts.rand_reps,
        seed,
        allow_unguaranteed: opts.allow_no_guarantee,
        execution: Execution::from_env(),
    }))
}

/// `(m0_hat, pi0_raw, pi0_clamped, mc_se)` for one estimator.
fn estimate_one(spec: &EstimatorSpec, pv: &PValueVector, opts: &AdjustOpts) -> Result<(f64, f64, f64, Option<f64>)> {
    let kind = adjustment(opts.adjust);
    if let Some(ro) = rand_options(opts)? {
        let r = adjust_randomized(&Estimator::new(spec.clone())?, pv, &ro)?;
        for w in &r.result.warnings {
            eprintln!("warning: {}: {w}", spec.id());
        }
        return Ok((
            r.result.m0_hat,
            r.result.pi0_hat_raw,
            r.result.pi0_hat,
            Some(r.estimate_se),
        ));
    }
    let r = apply_adjustment(spec, kind, pv, None)?;
    for w in &r.warnings {
        eprintln!("warning: {}: {w}", spec.id());
    }
    Ok((r.m0_hat, r.pi0_hat_raw, r.pi0_hat, None))
}

pub fn estimate(args: EstimateArgs) -> Result<Outcome> {
    let pv = load_pvalues(&args.input, &args.adjust)?;
    let specs = if args.estimators.is_empty() {
        vec![EstimatorSpec::storey(0.5), EstimatorSpec::PcNew]
    } else {
        args.estimators
            .iter()
            .map(|s| parse_estimator(s))
            .collect::<Result<Vec<_>>>()?
    };
    let rows = specs
        .iter()
        .map(|spec| estimate_one(spec, &pv, &args.adjust).map(|r| (spec.id(), r)))
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record([
        "estimator",
        "adjustment",
        "m0_hat",
        "pi0_hat_raw",
        "pi0_hat",
        "mc_se",
        "seed",
    ])?;
    let seed = args.adjust.seed.map(|s| s.to_string()).unwrap_or_default();
    for (id, (m0, raw, clamped, se)) in rows {
        w.write_record([
            id,
            adjustment(args.adjust.adjust).as_str().to_string(),
            fmt_f64(m0),
            fmt_f64(raw),
            fmt_f64(clamped),
            se.map(fmt_f64).unwrap_or_default(),
            seed.clone(),
        ])?;
    }
    w.flush()?;
    Ok(Outcome::Success)
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::Writer::from_writer(output(path)?))
}

pub fn bh(args: BhArgs) -> Result<Outcome> {
    let pv = load_pvalues(&args.input, &args.adjust)?;
    let m = pv.len() as f64;
    let m0_hat = match &args.estimator {
        None => {
            if args.adjust.adjust != AdjustArg::None {
                bail!("--adjust needs an --estimator");
            }
            m
        }
        Some(s) => estimate_one(&parse_estimator(s)?, &pv, &args.adjust)?.0,
    };
    let r = bh_stepup(pv.values(), args.alpha, m0_hat)?;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["index", "p", "rejected", "threshold", "m0_hat", "pi0_hat"])?;
    for (i, (&p, &rej)) in pv.values().iter().zip(&r.rejected).enumerate() {
        w.write_record([
            i.to_string(),
            fmt_f64(p),
            rej.to_string(),
            fmt_f64(r.threshold),
            fmt_f64(m0_hat),
            fmt_f64(m0_hat / m),
        ])?;
    }
    w.flush()?;
    Ok(Outcome::Success)
}

pub fn fet(args: FetArgs) -> Result<Outcome> {
    let tables = fio::read_tables(open(&args.input)?).with_context(|| format!("reading {}", args.input.display()))?;
    let alternative = match args.alternative {
        AlternativeArg::Greater => Alternative::Greater,
        AlternativeArg::TwoSided => Alternative::TwoSided,
    };
    let mut distinct: Vec<Arc<DiscreteNullDistribution>> = Vec::new();
    let mut index_of: HashMap<*const DiscreteNullDistribution, usize> = HashMap::new();
    let mut rows = Vec::with_capacity(tables.len());
    for t in &tables {
        let r = fisher_exact(t, alternative)?;
        let j = *index_of.entry(Arc::as_ptr(&r.support)).or_insert_with(|| {
            distinct.push(r.support.clone());
            distinct.len() - 1
        });
        rows.push((t, r.p, j));
    }
    if let Some(path) = &args.emit_supports {
        let mut w = output(Some(path))?;
        fio::write_supports(&mut w, &distinct)?;
        w.flush()?;
    }
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["a", "b", "c", "d", "p", "support_index"])?;
    for (t, p, j) in rows {
        w.write_record([
            t.a.to_string(),
            t.b.to_string(),
            t.c.to_string(),
            t.d.to_string(),
            fmt_f64(p),
            j.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(Outcome::Success)
}

#[derive(Deserialize)]
struct PointExtras {
    #[serde(default)]
    estimators: Option<Vec<EstimatorSpec>>,
    #[serde(default)]
    adjustments: Option<Vec<AdjustmentKind>>,
    #[serde(default)]
    entries: Option<Vec<ExperimentEntry>>,
}

fn default_entries(kind: SimKind) -> Vec<ExperimentEntry> {
    let specs = [
        EstimatorSpec::storey(0.5),
        EstimatorSpec::PcNew,
        EstimatorSpec::poly(1.0, 0.5),
        EstimatorSpec::poly(2.0, 0.5),
    ];
    let adjustments: &[AdjustmentKind] = match kind {
        SimKind::Fet => &[AdjustmentKind::None, AdjustmentKind::Du, AdjustmentKind::Mid],
        _ => &[AdjustmentKind::None],
    };
    specs
        .iter()
        .flat_map(|s| adjustments.iter().map(|a| ExperimentEntry::adjusted(s.clone(), *a)))
        .collect()
}

fn parse_point(kind: SimKind, mut value: Value, seed: Option<u64>) -> Result<(Setting, Vec<ExperimentEntry>)> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow!("config points must be JSON objects"))?;
    match seed {
        Some(s) => {
            obj.insert("seed".into(), Value::from(s));
        }
        None if !obj.contains_key("seed") => bail!("a seed is required: pass --seed or set \"seed\" in the config"),
        None => {}
    }
    let extras: PointExtras = serde_json::from_value(value.clone()).context("reading estimator list")?;
    let setting = match kind {
        SimKind::Gaussian => Setting::Gaussian(serde_json::from_value(value).context("gaussian config")?),
        SimKind::Fet => Setting::Fet(serde_json::from_value(value).context("fet config")?),
        SimKind::Dirac => Setting::Dirac(serde_json::from_value(value).context("dirac config")?),
    };
    let entries = match (extras.entries, extras.estimators, extras.adjustments) {
        (Some(e), None, None) => e,
        (Some(_), _, _) => bail!("use either `entries` or `estimators`/`adjustments`, not both"),
        (None, None, None) => default_entries(kind),
        (None, specs, adjustments) => {
            let specs =
                specs.unwrap_or_else(|| default_entries(SimKind::Gaussian).into_iter().map(|e| e.spec).collect());
            let adjustments = adjustments.unwrap_or_else(|| vec![AdjustmentKind::None]);
            specs
                .iter()
                .flat_map(|s| adjustments.iter().map(|a| ExperimentEntry::adjusted(s.clone(), *a)))
                .collect()
        }
    };
    Ok((setting, entries))
}

pub fn simulate(args: SimulateArgs) -> Result<Outcome> {
    let raw: Value =
        serde_json::from_reader(open(&args.config)?).with_context(|| format!("reading {}", args.config.display()))?;
    let points = match raw {
        Value::Array(v) => v,
        v => vec![v],
    };
    if points.is_empty() {
        bail!("config contains no points");
    }
    let opts = ExperimentOptions {
        rand_reps: args.rand_reps,
        allow_unguaranteed: args.allow_no_guarantee,
        include_reference: true,
        execution: Execution::from_env(),
    };
    let mut rows: Vec<ReportRow> = Vec::new();
    for p in points {
        let (setting, entries) = parse_point(args.kind, p, args.seed)?;
        let report =
            run_experiment(&setting, &entries, &opts).with_context(|| format!("running {}", setting.label()))?;
        rows.extend(report.rows);
    }
    let mut w = output(args.out.as_deref())?;
    fio::write_report(&mut w, &rows)?;
    w.flush()?;
    Ok(Outcome::Success)
}

pub fn verify(args: VerifyArgs) -> Result<Outcome> {
    let seed = args.seed.ok_or_else(|| anyhow!("verify requires --seed"))?;
    let sizes = SuiteSizes {
        imc_replications: args.imc_replications,
        irwin_hall_samples: args.irwin_hall_samples,
        pc_samples: args.pc_samples,
    };
    let exec = Execution::from_env();
    let rows: Vec<VerifyRow> = match args.kind {
        VerifyKind::Imc => verification::imc_suite(seed, sizes, exec)?,
        VerifyKind::Orders => verification::orders_suite(seed)?,
        VerifyKind::Bounds => verification::bounds_suite(seed, sizes, exec)?,
        VerifyKind::PcCompare => verification::pc_compare_suite(seed, sizes, exec)?,
    };
    let mut w = output(args.out.as_deref())?;
    fio::write_verify(&mut w, &rows)?;
    w.flush()?;
    Ok(if verification::all_pass(&rows) {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_shorthands() {
        assert_eq!(parse_estimator("storey").unwrap(), EstimatorSpec::storey(0.5));
        assert_eq!(parse_estimator("storey:0.2").unwrap(), EstimatorSpec::storey(0.2));
        assert_eq!(parse_estimator("poly:2:0.5").unwrap(), EstimatorSpec::poly(2.0, 0.5));
        assert_eq!(parse_estimator(r#"{"kind":"pc_new"}"#).unwrap(), EstimatorSpec::PcNew);
        assert!(parse_estimator("poly").is_err());
        assert!(parse_estimator("storey:1.5").is_err());
        assert!(parse_estimator("nope").is_err());
    }
}
