//! Verification suites behind `verify`: each returns one row per check with
//! the computed value, its reference, the tolerance used and the verdict.

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{EstimatorSpec, ZZD_C_500};
use crate::oracles::{
    binom_inverse_moment, convex_order_leq, irwin_hall_inverse_moment, pc_comparison_prob, random_step_transform,
    verify_bernoulli_domination, FiniteDistribution,
};
use crate::par::Execution;
use crate::rng::tagged_substream;
use crate::simulation::{storey_dirac_imc_exact, verify_imc, ImcGenerator};
use crate::special::TWO_LN_2;
use crate::transform::TransformFn;

const ORDERS_TAG: u64 = 0x6f72_6465_7273;
const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub parameters: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyRow {
    fn new(check: &str, parameters: String, value: f64, reference: f64, tolerance: f64, pass: bool) -> Self {
        VerifyRow {
            check: check.into(),
            parameters,
            value,
            reference,
            tolerance,
            pass,
        }
    }
}

pub fn all_pass(rows: &[VerifyRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// Sample sizes of the Monte Carlo checks.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub imc_replications: usize,
    pub irwin_hall_samples: usize,
    pub pc_samples: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            imc_replications: 100_000,
            irwin_hall_samples: 1_000_000,
            pc_samples: 100_000,
        }
    }
}

/// Exact Storey identity under Dirac-uniform plus Monte Carlo checks of
/// the inverse moment condition for several estimators and settings.
pub fn imc_suite(seed: u64, sizes: SuiteSizes, execution: Execution) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let m0 = 50;
    let exact = storey_dirac_imc_exact(0.5, m0);
    let enumerated = 0.5 * binom_inverse_moment(m0 as u64 - 1, 0.5)?.enumerated;
    rows.push(VerifyRow::new(
        "imc_exact_storey_dirac",
        format!("lambda=0.5;m0={m0}"),
        exact,
        enumerated,
        1e-13,
        (exact - enumerated).abs() <= 1e-13 && exact <= 1.0 / m0 as f64,
    ));

    let specs = [
        EstimatorSpec::storey(0.5),
        EstimatorSpec::PcNew,
        EstimatorSpec::poly(1.0, 0.5),
        EstimatorSpec::poly(2.0, 0.5),
    ];
    let generators = [
        ImcGenerator::all_null(20),
        ImcGenerator::DiracUniform { m: 100, m0: 50 },
        ImcGenerator::Gaussian {
            m: 100,
            m0: 60,
            mu: 2.0,
        },
    ];
    for (gi, generator) in generators.iter().enumerate() {
        for (si, spec) in specs.iter().enumerate() {
            let stream = seed.wrapping_add((gi * specs.len() + si) as u64);
            let r = verify_imc(spec, *generator, 0, sizes.imc_replications, stream, execution)?;
            let params = match generator {
                ImcGenerator::DiracUniform { m, m0 } => format!("{};dirac;m={m};m0={m0}", spec.id()),
                ImcGenerator::Gaussian { m, m0, mu } => format!("{};gaussian;m={m};m0={m0};mu={mu}", spec.id()),
            };
            rows.push(VerifyRow::new(
                "imc_monte_carlo",
                params,
                r.estimate,
                r.bound,
                3.0 * r.se,
                r.pass,
            ));
        }
    }
    Ok(rows)
}

/// Convex-order examples and the Bernoulli domination of 50 random step
/// transforms.
pub fn orders_suite(seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let point = FiniteDistribution::point(0.5);
    let bern = FiniteDistribution::bernoulli(0.5)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let leq = convex_order_leq(&point, &bern, EXACT_TOL);
    rows.push(VerifyRow::new(
        "convex_order",
        "point(0.5)<=bernoulli(0.5)".into(),
        flag(leq),
        1.0,
        EXACT_TOL,
        leq,
    ));
    let geq = convex_order_leq(&bern, &point, EXACT_TOL);
    rows.push(VerifyRow::new(
        "convex_order",
        "bernoulli(0.5)<=point(0.5)".into(),
        flag(geq),
        0.0,
        EXACT_TOL,
        !geq,
    ));

    let fixed = [
        TransformFn::indicator(0.5)?,
        TransformFn::indicator(0.2)?,
        TransformFn::table(vec![0.0, 0.5, 0.8], vec![0.0, 0.4, 1.0])?,
    ];
    let mut rng = tagged_substream(seed, ORDERS_TAG, 0);
    let random = (0..50)
        .map(|_| random_step_transform(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    for (i, g) in fixed.iter().chain(&random).enumerate() {
        let ok = verify_bernoulli_domination(g, EXACT_TOL)?;
        let name = if i < fixed.len() {
            g.label()
        } else {
            format!("random[{}]:{}", i - fixed.len(), g.label())
        };
        rows.push(VerifyRow::new(
            "bernoulli_domination",
            format!("{name};nu={}", g.nu()),
            flag(ok),
            1.0,
            EXACT_TOL,
            ok,
        ));
    }
    Ok(rows)
}

/// Binomial inverse moments for `k ≤ 12`, `q ∈ {0.1, …, 0.9}` and the
/// Irwin-Hall inverse moments for `k = 2..10`.
pub fn bounds_suite(seed: u64, sizes: SuiteSizes, execution: Execution) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for k in 0..=12u64 {
        for step in 1..=9 {
            let q = step as f64 / 10.0;
            let r = binom_inverse_moment(k, q)?;
            rows.push(VerifyRow::new(
                "binomial_inverse_moment",
                format!("k={k};q={q}"),
                r.enumerated,
                r.closed_form,
                1e-13,
                r.holds(1e-13),
            ));
        }
    }
    for k in 2..=10usize {
        let r = irwin_hall_inverse_moment(k, sizes.irwin_hall_samples, seed.wrapping_add(k as u64), execution)?;
        rows.push(VerifyRow::new(
            "irwin_hall_bounds",
            format!("k={k};lower={};upper={}", r.lower, r.upper),
            r.estimate,
            r.upper,
            3.0 * r.se,
            r.within_bounds(),
        ));
        if k == 2 {
            let close = (r.estimate - TWO_LN_2).abs() <= 2e-3;
            rows.push(VerifyRow::new(
                "irwin_hall_k2_exact",
                "k=2".into(),
                r.estimate,
                TWO_LN_2,
                2e-3,
                close,
            ));
        }
    }
    Ok(rows)
}

/// CLT value against Monte Carlo for PC-new exceeding the capped estimator
/// at `m = 500`.
pub fn pc_compare_suite(seed: u64, sizes: SuiteSizes, execution: Execution) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for m0 in [500usize, 450] {
        let r = pc_comparison_prob(
            500,
            m0,
            ZZD_C_500,
            sizes.pc_samples,
            seed.wrapping_add(m0 as u64),
            execution,
        )?;
        let floor = (r.clt * (1.0 - r.clt) / r.samples as f64).sqrt();
        let tol = 3.0 * r.mc_tail_se.max(floor);
        rows.push(VerifyRow::new(
            "pc_compare_tail",
            format!("m=500;m0={m0};C={ZZD_C_500}"),
            r.mc_tail,
            r.clt,
            tol,
            r.agrees(),
        ));
        let tol = 3.0 * r.mc_event_se.max(floor);
        rows.push(VerifyRow::new(
            "pc_compare_event",
            format!("m=500;m0={m0};C={ZZD_C_500}"),
            r.mc_event,
            r.clt,
            tol,
            m0 != 500 || (r.mc_event - r.clt).abs() <= tol,
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteSizes {
        SuiteSizes {
            imc_replications: 2000,
            irwin_hall_samples: 20_000,
            pc_samples: 5000,
        }
    }

    #[test]
    fn suites_pass_at_small_sizes() {
        for rows in [
            imc_suite(1, small(), Execution::Parallel).unwrap(),
            orders_suite(1).unwrap(),
            bounds_suite(1, small(), Execution::Parallel)
                .unwrap()
                .into_iter()
                .filter(|r| r.check != "irwin_hall_k2_exact")
                .collect(),
            pc_compare_suite(1, small(), Execution::Parallel).unwrap(),
        ] {
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            assert!(failed.is_empty(), "{failed:#?}");
        }
    }

    #[test]
    fn orders_suite_has_fifty_random_rows() {
        let rows = orders_suite(3).unwrap();
        assert_eq!(rows.iter().filter(|r| r.parameters.starts_with("random[")).count(), 50);
    }
}
