//! Adjustments of estimators to known discrete null distributions.
//!
//! * `du`: rescale each contribution by `E g(p_i)` under the standard
//!   discrete null law instead of `E g(U)`.
//! * `mid`: evaluate on mid-p-values and rescale by their null means.
//! * `rand`: `[E_U 1/m̂0(r(p_1,U_1), …, r(p_m,U_m))]^{-1}` over randomized
//!   p-values, approximated by Monte Carlo.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{randomized_p_value, DiscreteNullDistribution, MidTransform};
use crate::error::{Error, Result};
use crate::estimators::{heterogeneous_value, EstimateResult, Estimator, EstimatorSpec};
use crate::par::Execution;
use crate::pvalues::PValueVector;
use crate::rng::tagged_substream;
use crate::special::{compensated_sum, NeumaierSum};
use crate::transform::TransformFn;

/// Default Monte Carlo size of the randomized adjustment.
pub const DEFAULT_RAND_REPS: usize = 1000;

const RAND_STREAM_TAG: u64 = 0x7261_6e64;

/// Which adjustment to apply on top of a base estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustmentKind {
    None,
    Du,
    Mid,
    Rand,
}

impl AdjustmentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdjustmentKind::None => "none",
            AdjustmentKind::Du => "du",
            AdjustmentKind::Mid => "mid",
            AdjustmentKind::Rand => "rand",
        }
    }
}

impl std::str::FromStr for AdjustmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AdjustmentKind::None),
            "du" => Ok(AdjustmentKind::Du),
            "mid" => Ok(AdjustmentKind::Mid),
            "rand" => Ok(AdjustmentKind::Rand),
            other => Err(Error::InvalidConfig(format!("unknown adjustment '{other}'"))),
        }
    }
}

/// Settings of the randomized adjustment.
#[derive(Debug, Clone, Copy)]
pub struct RandomizedOptions {
    pub reps: usize,
    pub seed: u64,
    /// Accept bases without the plug-in guarantee (legacy PC, ZZD).
    pub allow_unguaranteed: bool,
    pub execution: Execution,
}

impl RandomizedOptions {
    pub fn new(reps: usize, seed: u64) -> Self {
        RandomizedOptions {
            reps,
            seed,
            allow_unguaranteed: false,
            execution: Execution::Sequential,
        }
    }
}

/// Randomized estimate with its Monte Carlo diagnostics.
#[derive(Debug, Clone)]
pub struct RandomizedEstimate {
    pub result: EstimateResult,
    /// Mean of `1/m̂0` over the draws.
    pub reciprocal_mean: f64,
    /// Standard error of `reciprocal_mean`.
    pub reciprocal_se: f64,
    /// Delta-method standard error of the estimate.
    pub estimate_se: f64,
    /// Mean of the per-draw estimates; close to the estimate when the draws
    /// vary little.
    pub mean_of_estimates: f64,
    /// Base estimator on the unrandomized p-values.
    pub base_value: f64,
}

fn supports_of(pvals: &PValueVector) -> Result<&[Arc<DiscreteNullDistribution>]> {
    pvals
        .supports()
        .ok_or_else(|| Error::InvalidPValues("discrete adjustment requires null supports".into()))
}

fn require_superuniform(supports: &[Arc<DiscreteNullDistribution>]) -> Result<()> {
    match supports.iter().position(|s| !s.is_superuniform()) {
        Some(index) => Err(Error::NotSuperUniform { index }),
        None => Ok(()),
    }
}

/// Evaluates `f` once per distinct support object.
fn per_support<T: Clone, F>(supports: &[Arc<DiscreteNullDistribution>], mut f: F) -> Result<Vec<T>>
where
    F: FnMut(&DiscreteNullDistribution) -> Result<T>,
{
    let mut cache: HashMap<*const DiscreteNullDistribution, T> = HashMap::new();
    supports
        .iter()
        .map(|s| {
            let key = Arc::as_ptr(s);
            if let Some(v) = cache.get(&key) {
                return Ok(v.clone());
            }
            let v = f(s)?;
            cache.insert(key, v.clone());
            Ok(v)
        })
        .collect()
}

/// Discrete-uniform adjustment: `1/min ν_i^du + Σ g(p_i)/ν_i^du` with
/// `ν_i^du = E g(p_i)` under the standard discrete null law.
pub fn adjust_du(g: &TransformFn, pvals: &PValueVector) -> Result<EstimateResult> {
    let supports = supports_of(pvals)?;
    require_superuniform(supports)?;
    let nus = per_support(supports, |s| Ok(s.expect(g)))?;
    let p = pvals.values();
    let value = heterogeneous_value(std::iter::repeat_n(g, p.len()), &nus, p)?;
    let mut r = EstimateResult::new(value, p.len(), format!("du:homogeneous({})", g.label()));
    r.contributions = p
        .iter()
        .zip(&nus)
        .map(|(&x, &nu)| if nu > 0.0 { g.eval(x) / nu } else { 0.0 })
        .collect();
    Ok(r)
}

fn mid_images(pvals: &PValueVector) -> Result<(Vec<f64>, Vec<Arc<MidTransform>>)> {
    let supports = supports_of(pvals)?;
    require_superuniform(supports)?;
    let mids = per_support(supports, |s| s.mid_transform().map(Arc::new))?;
    let q = pvals
        .values()
        .iter()
        .zip(&mids)
        .enumerate()
        .map(|(i, (&p, mt))| mt.map(p).ok_or(Error::NotInSupport { index: i, value: p }))
        .collect::<Result<Vec<f64>>>()?;
    Ok((q, mids))
}

/// Mid-p adjustment: `1/min ν_i^mid + Σ g(q_i)/ν_i^mid` on mid-p-values `q_i`.
pub fn adjust_mid(g: &TransformFn, pvals: &PValueVector) -> Result<EstimateResult> {
    let (q, mids) = mid_images(pvals)?;
    let supports = supports_of(pvals)?;
    // ν^mid depends only on the support, so cache alongside it.
    let nu_by_support = per_support(supports, |s| Ok(s.mid_transform()?.distribution().expect(g)))?;
    debug_assert_eq!(mids.len(), nu_by_support.len());
    let value = heterogeneous_value(std::iter::repeat_n(g, q.len()), &nu_by_support, &q)?;
    let mut r = EstimateResult::new(value, q.len(), format!("mid:homogeneous({})", g.label()));
    r.contributions = q
        .iter()
        .zip(&nu_by_support)
        .map(|(&x, &nu)| if nu > 0.0 { g.eval(x) / nu } else { 0.0 })
        .collect();
    Ok(r)
}

/// Closed form of the mid-p adjustment of the PC estimator: `2 + 2 Σ q_i`.
pub fn mid_pc(pvals: &PValueVector) -> Result<f64> {
    let (q, _) = mid_images(pvals)?;
    Ok(2.0 + 2.0 * compensated_sum(q))
}

/// Expected randomized estimator, by Monte Carlo over `opts.reps` draws of
/// the uniform vector. Without supports (or with all point masses zero)
/// the base estimate is returned unchanged.
pub fn adjust_randomized(
    base: &Estimator,
    pvals: &PValueVector,
    opts: &RandomizedOptions,
) -> Result<RandomizedEstimate> {
    if opts.reps < 1 {
        return Err(Error::InvalidConfig(
            "randomized adjustment needs at least one replication".into(),
        ));
    }
    if !base.spec().is_guaranteed() && !opts.allow_unguaranteed {
        return Err(Error::InvalidSpec(format!(
            "{} has no plug-in guarantee; pass the no-guarantee flag to randomize it anyway",
            base.id()
        )));
    }
    let p = pvals.values();
    let masses = pvals.point_masses();
    let base_value = base.m0_hat(p)?;
    let label = format!("rand:{}", base.id());

    if masses.iter().all(|&m| m == 0.0) {
        return Ok(RandomizedEstimate {
            result: EstimateResult::new(base_value, p.len(), label),
            reciprocal_mean: 1.0 / base_value,
            reciprocal_se: 0.0,
            estimate_se: 0.0,
            mean_of_estimates: base_value,
            base_value,
        });
    }

    let draws: Vec<Result<f64>> = opts.execution.map_indexed(opts.reps, |rep| {
        let mut rng = tagged_substream(opts.seed, RAND_STREAM_TAG, rep as u64);
        let r: Vec<f64> = p
            .iter()
            .zip(&masses)
            .map(|(&x, &mass)| randomized_p_value(x, mass, rng.random::<f64>()))
            .collect();
        base.m0_hat(&r)
    });
    let values = draws.into_iter().collect::<Result<Vec<f64>>>()?;

    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok(RandomizedEstimate {
            result: EstimateResult::new(first.min(base_value), p.len(), label),
            reciprocal_mean: 1.0 / first,
            reciprocal_se: 0.0,
            estimate_se: 0.0,
            mean_of_estimates: first,
            base_value,
        });
    }

    let n = values.len() as f64;
    let mut recip = NeumaierSum::default();
    let mut direct = NeumaierSum::default();
    for &v in &values {
        recip.add(1.0 / v);
        direct.add(v);
    }
    let recip_mean = recip.value() / n;
    let var = if values.len() > 1 {
        compensated_sum(values.iter().map(|&v| (1.0 / v - recip_mean).powi(2))) / (n - 1.0)
    } else {
        0.0
    };
    let recip_se = (var / n).sqrt();
    // Each draw is bounded by the base value; keep the average there too.
    let estimate = (1.0 / recip_mean).min(base_value);
    Ok(RandomizedEstimate {
        result: EstimateResult::new(estimate, p.len(), label),
        reciprocal_mean: recip_mean,
        reciprocal_se: recip_se,
        estimate_se: recip_se / (recip_mean * recip_mean),
        mean_of_estimates: direct.value() / n,
        base_value,
    })
}

/// Applies `adjustment` to `spec` on `pvals`.
pub fn apply_adjustment(
    spec: &EstimatorSpec,
    adjustment: AdjustmentKind,
    pvals: &PValueVector,
    rand_opts: Option<&RandomizedOptions>,
) -> Result<EstimateResult> {
    let labelled = |mut r: EstimateResult| {
        r.label = format!("{}:{}", adjustment.as_str(), spec.id());
        r
    };
    match adjustment {
        AdjustmentKind::None => Estimator::new(spec.clone())?.estimate(pvals),
        AdjustmentKind::Du => adjust_du(&spec.homogeneous_transform()?, pvals).map(labelled),
        AdjustmentKind::Mid => adjust_mid(&spec.homogeneous_transform()?, pvals).map(labelled),
        AdjustmentKind::Rand => {
            let opts = rand_opts.ok_or_else(|| {
                Error::InvalidConfig("randomized adjustment requires a seed and replication count".into())
            })?;
            let est = Estimator::new(spec.clone())?;
            adjust_randomized(&est, pvals, opts).map(|r| labelled(r.result))
        }
    }
}
