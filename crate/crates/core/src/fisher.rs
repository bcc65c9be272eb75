//! Fisher's exact test for 2×2 tables, with the full null law of the
//! attainable p-values.
//!
//! Outcomes are enumerated over all tables sharing the observed margins.
//! When `C(N, c1)` fits in a `u128` the weights are exact integers, so
//! p-values are ratios of integers rounded once; otherwise the
//! hypergeometric masses come from log-gamma in log-space.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::distribution::DiscreteNullDistribution;
use crate::error::{Error, Result};
use crate::special::{ln_choose, NeumaierSum};

/// Relative slack when comparing point probabilities in the two-sided rule.
pub const TWO_SIDED_SLACK: f64 = 1e-7;

/// `[[a, b], [c, d]]`: rows are groups, first column counts successes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b + c + d == 0 {
            return Err(Error::InvalidConfig("contingency table has no observations".into()));
        }
        Ok(ContingencyTable { a, b, c, d })
    }

    /// `(r1, r2, c1)`: first-row, second-row and first-column totals.
    pub fn margins(&self) -> (u64, u64, u64) {
        (self.a + self.b, self.c + self.d, self.a + self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Large `a` is extreme: `p = P(A ≥ a)`.
    Greater,
    /// Outcomes no more likely than the observed one are extreme.
    TwoSided,
}

impl std::str::FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" => Ok(Alternative::Greater),
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            other => Err(Error::InvalidConfig(format!("unknown alternative '{other}'"))),
        }
    }
}

/// p-value of one table and the null law of the p-value for its margins.
#[derive(Debug, Clone)]
pub struct FetResult {
    pub p: f64,
    pub support: Arc<DiscreteNullDistribution>,
}

/// Null law for one margin triple: the p-value of every outcome `a = lo..=hi`.
#[derive(Debug)]
pub struct MarginLaw {
    lo: u64,
    p_by_outcome: Vec<f64>,
    support: Arc<DiscreteNullDistribution>,
}

impl MarginLaw {
    pub fn p_value(&self, a: u64) -> f64 {
        self.p_by_outcome[(a - self.lo) as usize]
    }

    pub fn support(&self) -> &Arc<DiscreteNullDistribution> {
        &self.support
    }
}

fn choose_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(c)
}

enum Weights {
    Exact(Vec<u128>),
    Float(Vec<f64>),
}

impl Weights {
    fn exact(r1: u64, r2: u64, c1: u64, lo: u64, hi: u64) -> Option<Weights> {
        choose_u128(r1 + r2, c1)?;
        (lo..=hi)
            .map(|k| choose_u128(r1, k)?.checked_mul(choose_u128(r2, c1 - k)?))
            .collect::<Option<Vec<u128>>>()
            .map(Weights::Exact)
    }

    /// Hypergeometric masses scaled by the largest one.
    fn float(r1: u64, r2: u64, c1: u64, lo: u64, hi: u64) -> Weights {
        let logs: Vec<f64> = (lo..=hi).map(|k| ln_choose(r1, k) + ln_choose(r2, c1 - k)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Weights::Float(logs.iter().map(|l| (l - top).exp()).collect())
    }

    fn as_f64(&self, i: usize) -> f64 {
        match self {
            Weights::Exact(w) => w[i] as f64,
            Weights::Float(w) => w[i],
        }
    }

    fn len(&self) -> usize {
        match self {
            Weights::Exact(w) => w.len(),
            Weights::Float(w) => w.len(),
        }
    }

    /// Cumulative sums along `order`, each divided by the total.
    fn prefix_ratios(&self, order: &[usize]) -> Vec<f64> {
        match self {
            Weights::Exact(w) => {
                let total: u128 = w.iter().sum();
                let mut acc: u128 = 0;
                order
                    .iter()
                    .map(|&i| {
                        acc += w[i];
                        acc as f64 / total as f64
                    })
                    .collect()
            }
            Weights::Float(w) => {
                let mut acc = NeumaierSum::default();
                let prefix: Vec<f64> = order
                    .iter()
                    .map(|&i| {
                        acc.add(w[i]);
                        acc.value()
                    })
                    .collect();
                let total = *prefix.last().unwrap();
                prefix.iter().map(|s| s / total).collect()
            }
        }
    }
}

fn build_law(r1: u64, r2: u64, c1: u64, alternative: Alternative, force_float: bool) -> Result<MarginLaw> {
    let n = r1 + r2;
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let weights = match force_float {
        false => Weights::exact(r1, r2, c1, lo, hi),
        true => None,
    }
    .unwrap_or_else(|| Weights::float(r1, r2, c1, lo, hi));
    debug_assert!(c1 <= n);
    let len = weights.len();

    // Outcomes sorted from most to least extreme; `reach[i]` is the last
    // sorted position counted as at least as extreme as position `i`.
    let (order, reach): (Vec<usize>, Vec<usize>) = match alternative {
        Alternative::Greater => ((0..len).rev().collect(), (0..len).collect()),
        Alternative::TwoSided => {
            let mut order: Vec<usize> = (0..len).collect();
            order.sort_by(|&i, &j| weights.as_f64(i).total_cmp(&weights.as_f64(j)).then(i.cmp(&j)));
            let sorted: Vec<f64> = order.iter().map(|&i| weights.as_f64(i)).collect();
            let reach = sorted
                .iter()
                .map(|&w| {
                    let limit = w * (1.0 + TWO_SIDED_SLACK);
                    sorted.partition_point(|&x| x <= limit) - 1
                })
                .collect();
            (order, reach)
        }
    };
    let ratios = weights.prefix_ratios(&order);

    let mut p_by_outcome = vec![0.0; len];
    for (pos, &i) in order.iter().enumerate() {
        p_by_outcome[i] = ratios[reach[pos]];
    }

    // One atom per distinct reach; its CDF counts every position whose
    // reach does not exceed it.
    let mut atoms: Vec<f64> = Vec::new();
    let mut cdf: Vec<f64> = Vec::new();
    let mut last_covered = 0usize;
    let mut distinct: Vec<usize> = reach.clone();
    distinct.dedup();
    for &j in &distinct {
        while last_covered + 1 < len && reach[last_covered + 1] <= j {
            last_covered += 1;
        }
        let a = ratios[j];
        let c = ratios[last_covered];
        match atoms.last() {
            Some(&prev) if prev == a => *cdf.last_mut().unwrap() = c,
            _ => {
                atoms.push(a);
                cdf.push(c);
            }
        }
    }
    let support = DiscreteNullDistribution::new(atoms, cdf)
        .map_err(|e| Error::InvalidDistribution(format!("exact test support for margins ({r1}, {r2}, {c1}): {e}")))?;
    Ok(MarginLaw {
        lo,
        p_by_outcome,
        support: Arc::new(support),
    })
}

/// Row sums, first column sum and the alternative.
type MarginKey = (u64, u64, u64, Alternative);

/// Memoized margin laws, shared by concurrent readers.
#[derive(Debug, Default)]
pub struct FetCache {
    laws: RwLock<HashMap<MarginKey, Arc<MarginLaw>>>,
}

impl FetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn law(&self, r1: u64, r2: u64, c1: u64, alternative: Alternative) -> Result<Arc<MarginLaw>> {
        let key = (r1, r2, c1, alternative);
        if let Some(law) = self.laws.read().expect("cache lock poisoned").get(&key) {
            return Ok(law.clone());
        }
        let law = Arc::new(build_law(r1, r2, c1, alternative, false)?);
        let mut guard = self.laws.write().expect("cache lock poisoned");
        Ok(guard.entry(key).or_insert(law).clone())
    }

    pub fn test(&self, table: &ContingencyTable, alternative: Alternative) -> Result<FetResult> {
        let (r1, r2, c1) = table.margins();
        let law = self.law(r1, r2, c1, alternative)?;
        Ok(FetResult {
            p: law.p_value(table.a),
            support: law.support.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.laws.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

static GLOBAL_CACHE: LazyLock<FetCache> = LazyLock::new(FetCache::new);

/// Fisher's exact test using the process-wide cache.
pub fn fisher_exact(table: &ContingencyTable, alternative: Alternative) -> Result<FetResult> {
    GLOBAL_CACHE.test(table, alternative)
}

/// Hypergeometric point probability `P(A = k)` for margins `(r1, r2, c1)`.
pub fn hypergeometric_pmf(r1: u64, r2: u64, c1: u64, k: u64) -> f64 {
    if k > r1 || k > c1 || c1 - k > r2 {
        return 0.0;
    }
    (ln_choose(r1, k) + ln_choose(r2, c1 - k) - ln_choose(r1 + r2, c1)).exp()
}
