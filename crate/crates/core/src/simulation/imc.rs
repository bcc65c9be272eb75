//! Monte Carlo check of the inverse moment condition
//! `E[1/m̂0(p with p_h := 0)] ≤ 1/m0` for a null index `h`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorSpec};
use crate::par::Execution;
use crate::rng::tagged_substream;
use crate::special::{compensated_sum, norm_sf};

const IMC_TAG: u64 = 0x0069_6d63;

/// Data-generating law for the check. Nulls occupy the first `m0` indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImcGenerator {
    /// Uniform nulls, alternatives exactly 0.
    DiracUniform { m: usize, m0: usize },
    /// Uniform nulls, alternatives `1 − Φ(N(mu, 1))`.
    Gaussian { m: usize, m0: usize, mu: f64 },
}

impl ImcGenerator {
    pub fn all_null(m: usize) -> Self {
        ImcGenerator::DiracUniform { m, m0: m }
    }

    fn dims(&self) -> (usize, usize) {
        match *self {
            ImcGenerator::DiracUniform { m, m0 } | ImcGenerator::Gaussian { m, m0, .. } => (m, m0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImcReport {
    pub estimate: f64,
    pub se: f64,
    /// `1 / m0`.
    pub bound: f64,
    pub replications: usize,
    /// `estimate ≤ bound + 3·se`.
    pub pass: bool,
}

/// Averages `1/m̂0` over `replications` draws with `p_h` set to 0.
pub fn verify_imc(
    spec: &EstimatorSpec,
    generator: ImcGenerator,
    h: usize,
    replications: usize,
    seed: u64,
    execution: Execution,
) -> Result<ImcReport> {
    let (m, m0) = generator.dims();
    if m0 > m {
        return Err(Error::InvalidConfig(format!("m0 = {m0} exceeds m = {m}")));
    }
    if h >= m0 {
        return Err(Error::InvalidConfig(format!(
            "index {h} is not a null index (m0 = {m0})"
        )));
    }
    if replications < 2 {
        return Err(Error::InvalidConfig("need at least two replications".into()));
    }
    let est = Estimator::new(spec.clone())?;
    let draws: Vec<Result<f64>> = execution.map_indexed(replications, |rep| {
        let mut rng = tagged_substream(seed, IMC_TAG, rep as u64);
        let p: Vec<f64> = (0..m)
            .map(|i| {
                if i == h {
                    // keep the stream aligned with the unpinned vector
                    let _: f64 = rng.random();
                    0.0
                } else if i < m0 {
                    rng.random()
                } else {
                    match generator {
                        ImcGenerator::DiracUniform { .. } => 0.0,
                        ImcGenerator::Gaussian { mu, .. } => {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            norm_sf(z + mu)
                        }
                    }
                }
            })
            .collect();
        est.m0_hat(&p).map(|v| 1.0 / v)
    });
    let values = draws.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);
    let se = (var / n).sqrt();
    let bound = 1.0 / m0 as f64;
    Ok(ImcReport {
        estimate: mean,
        se,
        bound,
        replications,
        pass: mean <= bound + 3.0 * se,
    })
}

/// Exact `E[1/m̂0]` for Storey(λ) under Dirac-uniform with one null pinned
/// at 0: `(1 − λ^{m0}) / m0`.
pub fn storey_dirac_imc_exact(lambda: f64, m0: usize) -> f64 {
    (1.0 - lambda.powi(m0 as i32)) / m0 as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storey_dirac_matches_exact() {
        let spec = EstimatorSpec::storey(0.5);
        let r = verify_imc(
            &spec,
            ImcGenerator::DiracUniform { m: 80, m0: 50 },
            3,
            20_000,
            1,
            Execution::Parallel,
        )
        .unwrap();
        let exact = storey_dirac_imc_exact(0.5, 50);
        assert!((r.estimate - exact).abs() < 4.0 * r.se);
        assert!(r.pass);
    }

    #[test]
    fn pc_new_all_null() {
        let r = verify_imc(
            &EstimatorSpec::PcNew,
            ImcGenerator::all_null(20),
            0,
            100_000,
            2,
            Execution::Parallel,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn single_null_is_bounded_by_nu() {
        let spec = EstimatorSpec::poly(2.0, 0.5);
        let g = spec.homogeneous_transform().unwrap();
        let r = verify_imc(
            &spec,
            ImcGenerator::Gaussian { m: 10, m0: 1, mu: 1.0 },
            0,
            500,
            3,
            Execution::Sequential,
        )
        .unwrap();
        assert!(r.estimate <= g.nu() + 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn rejects_alternative_index() {
        let spec = EstimatorSpec::PcNew;
        assert!(verify_imc(
            &spec,
            ImcGenerator::DiracUniform { m: 5, m0: 2 },
            3,
            10,
            0,
            Execution::Sequential
        )
        .is_err());
    }

    #[test]
    fn worker_count_invariant() {
        let spec = EstimatorSpec::storey(0.5);
        let g = ImcGenerator::Gaussian { m: 30, m0: 20, mu: 2.0 };
        let a = verify_imc(&spec, g, 1, 3000, 8, Execution::Sequential).unwrap();
        let b = verify_imc(&spec, g, 1, 3000, 8, Execution::Threads(3)).unwrap();
        assert_eq!(a, b);
    }
}
