//! Brute-force and closed-form checks of the ordering and moment facts the
//! estimator class relies on.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorSpec, ZZD_S_500};
use crate::par::Execution;
use crate::rng::{tagged_substream, StreamRng};
use crate::special::{compensated_sum, ln_choose, norm_sf, NeumaierSum};
use crate::transform::TransformFn;

const IRWIN_HALL_TAG: u64 = 0x0069_7277_696e;
const PC_COMPARE_TAG: u64 = 0x7063_6370;
const STRATA_PER_BLOCK: usize = 4096;
const SAMPLES_PER_BLOCK: usize = 8192;

/// Law with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Sorts the atoms and merges repeats; probabilities must be positive
    /// and sum to one within `1e-12`.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if pairs.iter().any(|&(a, p)| !a.is_finite() || !(p > 0.0)) {
            return Err(Error::InvalidDistribution(
                "atoms must be finite with positive probability".into(),
            ));
        }
        let total = compensated_sum(pairs.iter().map(|p| p.1));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let mut pairs = pairs;
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, p) in pairs {
            if atoms.last() == Some(&a) {
                *probs.last_mut().unwrap() += p;
            } else {
                atoms.push(a);
                probs.push(p);
            }
        }
        Ok(FiniteDistribution { atoms, probs })
    }

    pub fn point(a: f64) -> Self {
        FiniteDistribution {
            atoms: vec![a],
            probs: vec![1.0],
        }
    }

    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidDistribution(format!("Bernoulli parameter {q}")));
        }
        if q == 0.0 {
            return Ok(Self::point(0.0));
        }
        if q == 1.0 {
            return Ok(Self::point(1.0));
        }
        Self::new(vec![(0.0, 1.0 - q), (1.0, q)])
    }

    /// Law of `g(U)` for a transform taking finitely many values.
    pub fn of_transform(g: &TransformFn) -> Result<Self> {
        let law = g
            .uniform_law()
            .ok_or_else(|| Error::InvalidTransform(format!("{} does not take finitely many values", g.label())))?;
        Self::new(law)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p))
    }

    /// `E (X − t)₊`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .zip(&self.probs)
                .filter(|(a, _)| **a > t)
                .map(|(a, p)| (a - t) * p),
        )
    }
}

/// `X ≤cx Y`: equal means and `E(X − t)₊ ≤ E(Y − t)₊` at every atom of
/// either law, each within `tol`. Both stop-loss transforms are piecewise
/// linear with kinks at atoms, so the atom grid is exhaustive.
pub fn convex_order_leq(x: &FiniteDistribution, y: &FiniteDistribution, tol: f64) -> bool {
    if (x.mean() - y.mean()).abs() > tol {
        return false;
    }
    x.atoms
        .iter()
        .chain(&y.atoms)
        .all(|&t| x.stop_loss(t) <= y.stop_loss(t) + tol)
}

/// `g(U) ≤cx Bernoulli(ν)` for a transform with finitely many values.
pub fn verify_bernoulli_domination(g: &TransformFn, tol: f64) -> Result<bool> {
    let law = FiniteDistribution::of_transform(g)?;
    let bern = FiniteDistribution::bernoulli(g.nu())?;
    Ok(convex_order_leq(&law, &bern, tol))
}

/// Random non-decreasing step transform with 1 to 8 steps and a positive
/// top value.
pub fn random_step_transform(rng: &mut StreamRng) -> Result<TransformFn> {
    let steps = rng.random_range(1..=8usize);
    let mut breaks: Vec<f64> = (1..steps).map(|_| rng.random::<f64>()).collect();
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut values: Vec<f64> = (0..breaks.len()).map(|_| rng.random::<f64>()).collect();
    values.sort_by(f64::total_cmp);
    if rng.random_bool(0.3) {
        values[0] = 0.0;
    }
    if rng.random_bool(0.3) {
        *values.last_mut().unwrap() = 1.0;
    }
    if *values.last().unwrap() == 0.0 {
        *values.last_mut().unwrap() = 1.0;
    }
    TransformFn::table(breaks, values)
}

/// Exact and bounding values of `E[1/(1 + Bin(k, q))]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialInverseMoment {
    /// `Σ_j C(k,j) q^j (1−q)^{k−j} / (1 + j)`.
    pub enumerated: f64,
    /// `(1 − (1−q)^{k+1}) / ((k+1) q)`.
    pub closed_form: f64,
    /// `1 / ((k+1) q)`.
    pub bound: f64,
}

impl BinomialInverseMoment {
    pub fn holds(&self, tol: f64) -> bool {
        self.enumerated <= self.bound + tol && (self.enumerated - self.closed_form).abs() <= tol
    }
}

pub fn binom_inverse_moment(k: u64, q: f64) -> Result<BinomialInverseMoment> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidConfig(format!("binomial probability {q} outside (0, 1]")));
    }
    let pmf = |j: u64| -> f64 {
        if q == 1.0 {
            return if j == k { 1.0 } else { 0.0 };
        }
        (ln_choose(k, j) + j as f64 * q.ln() + (k - j) as f64 * (-q).ln_1p()).exp()
    };
    let enumerated = compensated_sum((0..=k).map(|j| pmf(j) / (1 + j) as f64));
    let k1 = (k + 1) as f64;
    // 1 − (1−q)^{k+1} without cancellation for small q
    let tail = -(k1 * (-q).ln_1p()).exp_m1();
    Ok(BinomialInverseMoment {
        enumerated,
        closed_form: tail / (k1 * q),
        bound: 1.0 / (k1 * q),
    })
}

/// Monte Carlo value of `E[1 / (U_1 + … + U_k)]` with its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrwinHallInverse {
    pub k: usize,
    pub estimate: f64,
    pub se: f64,
    /// `2 / k`.
    pub lower: f64,
    /// `2 / (k − 1)`.
    pub upper: f64,
}

impl IrwinHallInverse {
    pub fn within_bounds(&self) -> bool {
        self.lower - 3.0 * self.se <= self.estimate && self.estimate <= self.upper + 3.0 * self.se
    }
}

/// Stratified conditional estimator: `U_1` is stratified into
/// `samples / 2` cells with two draws each, `U_2..U_{k−1}` are plain draws
/// and `U_k` is integrated out, `E[1/(s + U)] = ln(1 + 1/s)`. Plain
/// `1/(U_1 + U_2)` has infinite variance, this estimator does not.
pub fn irwin_hall_inverse_moment(
    k: usize,
    samples: usize,
    seed: u64,
    execution: Execution,
) -> Result<IrwinHallInverse> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "Irwin-Hall inverse moment needs k >= 2, got {k}"
        )));
    }
    let strata = samples / 2;
    if strata < 2 {
        return Err(Error::InvalidConfig("need at least four samples".into()));
    }
    let width = 1.0 / strata as f64;
    let blocks = strata.div_ceil(STRATA_PER_BLOCK);
    let partial: Vec<(f64, f64)> = execution.map_indexed(blocks, |b| {
        let mut rng = tagged_substream(seed, IRWIN_HALL_TAG, b as u64);
        let (mut sum, mut spread) = (NeumaierSum::default(), NeumaierSum::default());
        let first = b * STRATA_PER_BLOCK;
        for h in first..(first + STRATA_PER_BLOCK).min(strata) {
            let mut draw = || {
                let mut s = (h as f64 + rng.random::<f64>()) * width;
                for _ in 2..k {
                    s += rng.random::<f64>();
                }
                (1.0 + 1.0 / s).ln()
            };
            let (y1, y2) = (draw(), draw());
            sum.add(y1 + y2);
            spread.add((y1 - y2).powi(2));
        }
        (sum.value(), spread.value())
    });
    let (mut sum, mut spread) = (NeumaierSum::default(), NeumaierSum::default());
    for (s, d) in partial {
        sum.add(s);
        spread.add(d);
    }
    let h = strata as f64;
    let estimate = sum.value() / (2.0 * h);
    // within-stratum variance s²_h = (y1 − y2)² / 2, two draws per stratum
    let se = (spread.value() / 4.0).sqrt() / h;
    Ok(IrwinHallInverse {
        k,
        estimate,
        se,
        lower: 2.0 / k as f64,
        upper: 2.0 / (k - 1) as f64,
    })
}

/// CLT approximation and Monte Carlo estimates for the event that PC-new
/// exceeds the capped estimator `C · min(m, max(s, 2 Σ p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcComparison {
    pub m: usize,
    pub m0: usize,
    pub c: f64,
    /// `Φ̄(√(3/m0) · (m·C − (m0 + 2)))`.
    pub clt: f64,
    /// Monte Carlo `P(2 Σ_{H0} p_i > m·C − 2)`.
    pub mc_tail: f64,
    pub mc_tail_se: f64,
    /// Monte Carlo `P(PC-new > PC-ZZD)` with alternatives at 0.
    pub mc_event: f64,
    pub mc_event_se: f64,
    pub samples: usize,
}

impl PcComparison {
    /// Agreement of the tail estimate with the CLT value within three
    /// standard errors; the binomial SE at the CLT value is used as a floor
    /// so that an empty tail does not yield a zero-width interval.
    pub fn agrees(&self) -> bool {
        let floor = (self.clt * (1.0 - self.clt) / self.samples as f64).sqrt();
        (self.mc_tail - self.clt).abs() <= 3.0 * self.mc_tail_se.max(floor)
    }
}

pub fn pc_clt_probability(m: usize, m0: usize, c: f64) -> f64 {
    norm_sf((3.0 / m0 as f64).sqrt() * (m as f64 * c - (m0 as f64 + 2.0)))
}

pub fn pc_comparison_prob(
    m: usize,
    m0: usize,
    c: f64,
    samples: usize,
    seed: u64,
    execution: Execution,
) -> Result<PcComparison> {
    if m0 == 0 || m0 > m {
        return Err(Error::InvalidConfig(format!(
            "need 0 < m0 <= m, got m0 = {m0}, m = {m}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidConfig("need at least two samples".into()));
    }
    let s = if m == 500 { ZZD_S_500 } else { 0.0 };
    let pc_new = Estimator::new(EstimatorSpec::PcNew)?;
    let zzd = Estimator::new(EstimatorSpec::PcZzd { c, s, m_ref: None })?;
    let threshold = m as f64 * c - 2.0;
    let blocks = samples.div_ceil(SAMPLES_PER_BLOCK);
    let partial: Vec<Result<(u64, u64)>> = execution.map_indexed(blocks, |b| {
        let mut rng = tagged_substream(seed, PC_COMPARE_TAG, b as u64);
        let first = b * SAMPLES_PER_BLOCK;
        let mut p = vec![0.0; m];
        let (mut tail, mut event) = (0u64, 0u64);
        for _ in first..(first + SAMPLES_PER_BLOCK).min(samples) {
            for x in p.iter_mut().take(m0) {
                *x = rng.random();
            }
            let two_sum = 2.0 * compensated_sum(p[..m0].iter().copied());
            tail += (two_sum > threshold) as u64;
            event += (pc_new.m0_hat(&p)? > zzd.m0_hat(&p)?) as u64;
        }
        Ok((tail, event))
    });
    let (mut tail, mut event) = (0u64, 0u64);
    for r in partial {
        let (t, e) = r?;
        tail += t;
        event += e;
    }
    let n = samples as f64;
    let prop = |k: u64| {
        let q = k as f64 / n;
        (q, (q * (1.0 - q) / (n - 1.0)).sqrt())
    };
    let (mc_tail, mc_tail_se) = prop(tail);
    let (mc_event, mc_event_se) = prop(event);
    Ok(PcComparison {
        m,
        m0,
        c,
        clt: pc_clt_probability(m, m0, c),
        mc_tail,
        mc_tail_se,
        mc_event,
        mc_event_se,
        samples,
    })
}
