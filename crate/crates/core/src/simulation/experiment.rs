//! Replicated plug-in BH experiments.

use serde::{Deserialize, Serialize};

use super::Setting;
use crate::discrete::{adjust_du, adjust_mid, adjust_randomized, AdjustmentKind, RandomizedOptions, DEFAULT_RAND_REPS};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorSpec};
use crate::par::Execution;
use crate::procedures::{bh_stepup, evaluate};
use crate::pvalues::PValueVector;
use crate::rng::derive_seed;
use crate::special::{compensated_sum, NeumaierSum};
use crate::transform::TransformFn;

const RAND_SEED_TAG: u64 = 0x7261_6e64_7365_6564;

/// One estimator with the adjustment applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub spec: EstimatorSpec,
    #[serde(default = "ExperimentEntry::no_adjustment")]
    pub adjustment: AdjustmentKind,
}

impl ExperimentEntry {
    fn no_adjustment() -> AdjustmentKind {
        AdjustmentKind::None
    }

    pub fn plain(spec: EstimatorSpec) -> Self {
        ExperimentEntry {
            spec,
            adjustment: AdjustmentKind::None,
        }
    }

    pub fn adjusted(spec: EstimatorSpec, adjustment: AdjustmentKind) -> Self {
        ExperimentEntry { spec, adjustment }
    }

    pub fn id(&self) -> String {
        match self.adjustment {
            AdjustmentKind::None => self.spec.id(),
            a => format!("{}:{}", a.as_str(), self.spec.id()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentOptions {
    /// Monte Carlo size of randomized adjustments.
    pub rand_reps: usize,
    pub allow_unguaranteed: bool,
    /// Append plain BH (`m̂0 = m`) and oracle (`m̂0 = m0`) rows.
    pub include_reference: bool,
    pub execution: Execution,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            rand_reps: DEFAULT_RAND_REPS,
            allow_unguaranteed: false,
            include_reference: true,
            execution: Execution::from_env(),
        }
    }
}

/// Outcome of one entry on one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryOutcome {
    pub m0_hat: f64,
    /// `m0_hat / m`, unclamped.
    pub pi0_hat: f64,
    pub rejections: usize,
    pub fdp: f64,
    pub power: f64,
}

/// Aggregate over replications for one entry. `bias` and `mse` are on the
/// proportion scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub config: String,
    pub estimator: String,
    pub mean_pi0_hat: f64,
    pub pi0_se: f64,
    pub bias: f64,
    pub mse: f64,
    pub fdr_hat: f64,
    pub fdr_se: f64,
    pub power: f64,
    pub power_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: String,
    pub m: usize,
    pub m0: usize,
    pub entry_ids: Vec<String>,
    pub rows: Vec<ReportRow>,
    /// `records[rep][entry]`, entries in `entry_ids` order.
    pub records: Vec<Vec<EntryOutcome>>,
}

impl ExperimentReport {
    pub fn row(&self, id: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == id)
    }

    pub fn entry_index(&self, id: &str) -> Option<usize> {
        self.entry_ids.iter().position(|e| e == id)
    }

    /// Per-replication outcomes of one entry.
    pub fn outcomes(&self, id: &str) -> Option<Vec<EntryOutcome>> {
        let j = self.entry_index(id)?;
        Some(self.records.iter().map(|r| r[j]).collect())
    }
}

enum Compiled {
    Plain(Estimator),
    Du(TransformFn),
    Mid(TransformFn),
    Rand(Estimator),
    Constant(f64),
}

fn compile(entry: &ExperimentEntry, opts: &ExperimentOptions) -> Result<Compiled> {
    Ok(match entry.adjustment {
        AdjustmentKind::None => Compiled::Plain(Estimator::new(entry.spec.clone())?),
        AdjustmentKind::Du => Compiled::Du(entry.spec.homogeneous_transform()?),
        AdjustmentKind::Mid => Compiled::Mid(entry.spec.homogeneous_transform()?),
        AdjustmentKind::Rand => {
            if !entry.spec.is_guaranteed() && !opts.allow_unguaranteed {
                return Err(Error::InvalidSpec(format!(
                    "{} has no plug-in guarantee; randomizing it needs the no-guarantee flag",
                    entry.spec.id()
                )));
            }
            Compiled::Rand(Estimator::new(entry.spec.clone())?)
        }
    })
}

fn m0_hat(c: &Compiled, pv: &PValueVector, rand_seed: u64, opts: &ExperimentOptions) -> Result<f64> {
    match c {
        Compiled::Plain(e) => e.m0_hat(pv.values()),
        Compiled::Du(g) => adjust_du(g, pv).map(|r| r.m0_hat),
        Compiled::Mid(g) => adjust_mid(g, pv).map(|r| r.m0_hat),
        Compiled::Rand(e) => {
            let ro = RandomizedOptions {
                reps: opts.rand_reps,
                seed: rand_seed,
                allow_unguaranteed: opts.allow_unguaranteed,
                execution: Execution::Sequential,
            };
            adjust_randomized(e, pv, &ro).map(|r| r.result.m0_hat)
        }
        Compiled::Constant(v) => Ok(*v),
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = compensated_sum(values.clone()) / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = compensated_sum(values.map(|v| (v - mean).powi(2))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `setting.replications()` replications of plug-in BH with every entry.
pub fn run_experiment(
    setting: &Setting,
    entries: &[ExperimentEntry],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    setting.validate()?;
    let reps = setting.replications();
    if reps == 0 {
        return Err(Error::InvalidConfig("zero replications".into()));
    }
    if entries.is_empty() && !opts.include_reference {
        return Err(Error::InvalidConfig("no estimators to evaluate".into()));
    }
    let m = setting.m();
    let m0 = setting.true_m0()?;
    let alpha = setting.alpha();
    let seed = setting.seed();

    let mut ids: Vec<String> = entries.iter().map(ExperimentEntry::id).collect();
    let mut compiled = entries.iter().map(|e| compile(e, opts)).collect::<Result<Vec<_>>>()?;
    if opts.include_reference {
        ids.push("bh".into());
        compiled.push(Compiled::Constant(m as f64));
        ids.push("oracle".into());
        compiled.push(Compiled::Constant(m0.max(1) as f64));
    }

    let per_rep: Vec<Result<Vec<EntryOutcome>>> = opts.execution.map_indexed(reps, |rep| {
        let pv = setting.generate(rep)?;
        let labels = pv
            .labels()
            .ok_or_else(|| Error::InvalidPValues("simulated data lacks labels".into()))?;
        let rand_seed = derive_seed(seed, RAND_SEED_TAG, rep as u64);
        compiled
            .iter()
            .map(|c| {
                let est = m0_hat(c, &pv, rand_seed, opts)?;
                let bh = bh_stepup(pv.values(), alpha, est)?;
                let metrics = evaluate(&bh.rejected, labels)?;
                Ok(EntryOutcome {
                    m0_hat: est,
                    pi0_hat: est / m as f64,
                    rejections: bh.k_hat,
                    fdp: metrics.fdp,
                    power: metrics.power,
                })
            })
            .collect()
    });
    let records = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

    let config = setting.label();
    let pi0 = m0 as f64 / m as f64;
    let rows = ids
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let col = || records.iter().map(move |r| r[j]);
            let (mean_pi0, pi0_se) = mean_and_se(col().map(|o| o.pi0_hat));
            let (fdr, fdr_se) = mean_and_se(col().map(|o| o.fdp));
            let (power, power_se) = mean_and_se(col().map(|o| o.power));
            let mut sq = NeumaierSum::default();
            for o in col() {
                sq.add((o.pi0_hat - pi0).powi(2));
            }
            ReportRow {
                config: config.clone(),
                estimator: id.clone(),
                mean_pi0_hat: mean_pi0,
                pi0_se,
                bias: mean_pi0 - pi0,
                mse: sq.value() / reps as f64,
                fdr_hat: fdr,
                fdr_se,
                power,
                power_se,
            }
        })
        .collect();

    Ok(ExperimentReport {
        config,
        m,
        m0,
        entry_ids: ids,
        rows,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{FetConfig, GaussianConfig};

    fn gaussian(pi0: f64, reps: usize) -> Setting {
        let mut c = GaussianConfig::new(100, pi0, 2.0);
        c.replications = reps;
        c.seed = 21;
        Setting::Gaussian(c)
    }

    #[test]
    fn zero_replications_is_an_error() {
        let opts = ExperimentOptions::default();
        assert!(run_experiment(
            &gaussian(0.5, 0),
            &[ExperimentEntry::plain(EstimatorSpec::PcNew)],
            &opts
        )
        .is_err());
    }

    #[test]
    fn oracle_dominates_plain_bh() {
        let opts = ExperimentOptions::default();
        let r = run_experiment(&gaussian(0.6, 200), &[], &opts).unwrap();
        let bh = r.outcomes("bh").unwrap();
        let oracle = r.outcomes("oracle").unwrap();
        for (b, o) in bh.iter().zip(&oracle) {
            assert!(o.power >= b.power);
            assert!(o.rejections >= b.rejections);
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let entries = [
            ExperimentEntry::plain(EstimatorSpec::storey(0.5)),
            ExperimentEntry::plain(EstimatorSpec::PcNew),
        ];
        let a = ExperimentOptions {
            execution: Execution::Sequential,
            ..Default::default()
        };
        let b = ExperimentOptions {
            execution: Execution::Threads(4),
            ..a
        };
        let ra = run_experiment(&gaussian(0.8, 50), &entries, &a).unwrap();
        let rb = run_experiment(&gaussian(0.8, 50), &entries, &b).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn adjustments_need_supports() {
        let opts = ExperimentOptions::default();
        let du = [ExperimentEntry::adjusted(
            EstimatorSpec::storey(0.5),
            AdjustmentKind::Du,
        )];
        assert!(run_experiment(&gaussian(0.8, 3), &du, &opts).is_err());
        let mut f = FetConfig::with_pi0(40, 0.5);
        f.replications = 5;
        let r = run_experiment(&Setting::Fet(f), &du, &opts).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[0].estimator, "du:storey(0.5)");
    }

    #[test]
    fn full_null_fet_estimates_near_one() {
        let mut f = FetConfig::with_pi0(100, 1.0);
        f.replications = 20;
        let entries = [
            ExperimentEntry::plain(EstimatorSpec::storey(0.5)),
            ExperimentEntry::adjusted(EstimatorSpec::storey(0.5), AdjustmentKind::Du),
        ];
        let r = run_experiment(&Setting::Fet(f), &entries, &ExperimentOptions::default()).unwrap();
        for row in &r.rows[..2] {
            assert!(row.mean_pi0_hat > 0.9, "{row:?}");
        }
    }
}
