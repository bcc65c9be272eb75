//! Simulated p-value settings and the replicated experiment runner.
//!
//! Replication `r` of a configuration with seed `s` draws its data from the
//! stream `tagged_substream(s, DATA_TAG, r)`, so any replication can be
//! regenerated on its own and results never depend on scheduling.

mod closed_form;
mod experiment;
mod imc;

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{fisher_exact, Alternative, ContingencyTable};
use crate::pvalues::PValueVector;
use crate::rng::{tagged_substream, StreamRng};
use crate::special::norm_sf;

pub use closed_form::{alternative_density, closed_form_bias_var, expect_under_alternative, BiasVariance};
pub use experiment::{run_experiment, EntryOutcome, ExperimentEntry, ExperimentOptions, ExperimentReport, ReportRow};
pub use imc::{storey_dirac_imc_exact, verify_imc, ImcGenerator, ImcReport};

pub(crate) const DATA_TAG: u64 = 0x6461_7461;

fn default_replications() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

fn resolve_m0(m: usize, m0: Option<usize>, pi0: Option<f64>) -> Result<usize> {
    match (m0, pi0) {
        (Some(m0), None) => Ok(m0),
        (None, Some(pi0)) => {
            if !(0.0..=1.0).contains(&pi0) {
                return Err(Error::InvalidConfig(format!("pi0 = {pi0} outside [0, 1]")));
            }
            Ok((pi0 * m as f64).round() as usize)
        }
        (Some(m0), Some(pi0)) if (pi0 * m as f64).round() as usize == m0 => Ok(m0),
        (Some(_), Some(_)) => Err(Error::InvalidConfig("m0 and pi0 disagree".into())),
        (None, None) => Err(Error::InvalidConfig("one of m0 or pi0 is required".into())),
    }
    .and_then(|m0| {
        if m0 > m {
            Err(Error::InvalidConfig(format!("m0 = {m0} exceeds m = {m}")))
        } else {
            Ok(m0)
        }
    })
}

fn check_common(m: usize, alpha: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// One-sided Gaussian tests: nulls `N(0,1)`, alternatives `N(mu,1)`,
/// `p = 1 − Φ(x)`. Nulls occupy the first `m0` positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianConfig {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    pub mu: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl GaussianConfig {
    pub fn new(m: usize, pi0: f64, mu: f64) -> Self {
        GaussianConfig {
            m,
            pi0: Some(pi0),
            m0: None,
            mu,
            replications: default_replications(),
            seed: 0,
            alpha: default_alpha(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.m, self.alpha)?;
        resolve_m0(self.m, self.m0, self.pi0)?;
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mu = {} must be finite and >= 0",
                self.mu
            )));
        }
        Ok(())
    }

    pub fn true_m0(&self) -> Result<usize> {
        resolve_m0(self.m, self.m0, self.pi0)
    }
}

/// Two-group binary responses summarized by 2×2 tables and tested with
/// Fisher's exact test. Blocks of sizes `m1`, `m2`, `m3` have success
/// rates `(low, low)`, `(high, high)` and `(high, p3)`; `m1 = m2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetConfig {
    #[serde(default = "FetConfig::default_m")]
    pub m: usize,
    /// Subjects per group.
    #[serde(default = "FetConfig::default_n")]
    pub n: u64,
    #[serde(default = "FetConfig::default_p3")]
    pub p3: f64,
    /// Signal proportion `m3 / m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m3: Option<usize>,
    #[serde(default = "FetConfig::default_rate_low")]
    pub rate_low: f64,
    #[serde(default = "FetConfig::default_rate_high")]
    pub rate_high: f64,
    #[serde(default = "FetConfig::default_alternative")]
    pub alternative: Alternative,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl Default for FetConfig {
    fn default() -> Self {
        FetConfig {
            m: Self::default_m(),
            n: Self::default_n(),
            p3: Self::default_p3(),
            pi1: None,
            m3: Some(0),
            rate_low: Self::default_rate_low(),
            rate_high: Self::default_rate_high(),
            alternative: Self::default_alternative(),
            replications: default_replications(),
            seed: 0,
            alpha: default_alpha(),
        }
    }
}

impl FetConfig {
    fn default_m() -> usize {
        500
    }
    fn default_n() -> u64 {
        25
    }
    fn default_p3() -> f64 {
        0.4
    }
    fn default_rate_low() -> f64 {
        0.01
    }
    fn default_rate_high() -> f64 {
        0.10
    }
    fn default_alternative() -> Alternative {
        Alternative::TwoSided
    }

    /// Configuration with `m3 = m · (1 − pi0)`.
    pub fn with_pi0(m: usize, pi0: f64) -> Self {
        FetConfig {
            m,
            pi1: Some(1.0 - pi0),
            m3: None,
            ..Self::default()
        }
    }

    pub fn m3(&self) -> Result<usize> {
        let m3 = match (self.m3, self.pi1) {
            (Some(m3), _) => m3,
            (None, Some(pi1)) if (0.0..=1.0).contains(&pi1) => (pi1 * self.m as f64).round() as usize,
            (None, Some(pi1)) => return Err(Error::InvalidConfig(format!("pi1 = {pi1} outside [0, 1]"))),
            (None, None) => 0,
        };
        if m3 > self.m || !(self.m - m3).is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "m3 = {m3} must leave an even number of null positions out of m = {}",
                self.m
            )));
        }
        Ok(m3)
    }

    /// The third block is null when both of its groups share a rate.
    pub fn signal_block_is_null(&self) -> bool {
        self.p3 == self.rate_high
    }

    pub fn true_m0(&self) -> Result<usize> {
        let m3 = self.m3()?;
        Ok(if self.signal_block_is_null() {
            self.m
        } else {
            self.m - m3
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.m, self.alpha)?;
        self.m3()?;
        if self.n == 0 {
            return Err(Error::InvalidConfig("group size n must be positive".into()));
        }
        for (name, r) in [
            ("p3", self.p3),
            ("rate_low", self.rate_low),
            ("rate_high", self.rate_high),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} = {r} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Nulls exactly uniform, alternatives exactly 0. Nulls occupy the first
/// `m0` positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracConfig {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl DiracConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.m, self.alpha)?;
        resolve_m0(self.m, self.m0, self.pi0).map(|_| ())
    }

    pub fn true_m0(&self) -> Result<usize> {
        resolve_m0(self.m, self.m0, self.pi0)
    }
}

/// Any of the simulated settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case")]
pub enum Setting {
    Gaussian(GaussianConfig),
    Fet(FetConfig),
    Dirac(DiracConfig),
}

impl Setting {
    pub fn validate(&self) -> Result<()> {
        match self {
            Setting::Gaussian(c) => c.validate(),
            Setting::Fet(c) => c.validate(),
            Setting::Dirac(c) => c.validate(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Setting::Gaussian(c) => c.m,
            Setting::Fet(c) => c.m,
            Setting::Dirac(c) => c.m,
        }
    }

    pub fn true_m0(&self) -> Result<usize> {
        match self {
            Setting::Gaussian(c) => c.true_m0(),
            Setting::Fet(c) => c.true_m0(),
            Setting::Dirac(c) => c.true_m0(),
        }
    }

    pub fn replications(&self) -> usize {
        match self {
            Setting::Gaussian(c) => c.replications,
            Setting::Fet(c) => c.replications,
            Setting::Dirac(c) => c.replications,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Setting::Gaussian(c) => c.seed,
            Setting::Fet(c) => c.seed,
            Setting::Dirac(c) => c.seed,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Setting::Gaussian(c) => c.alpha,
            Setting::Fet(c) => c.alpha,
            Setting::Dirac(c) => c.alpha,
        }
    }

    /// Short description of the grid point, used as the report's config column.
    pub fn label(&self) -> String {
        let m0 = self.true_m0().unwrap_or(0);
        match self {
            Setting::Gaussian(c) => format!("gaussian(m={},m0={m0},mu={})", c.m, c.mu),
            Setting::Fet(c) => format!(
                "fet(m={},m0={m0},n={},p3={},{})",
                c.m,
                c.n,
                c.p3,
                match c.alternative {
                    Alternative::Greater => "greater",
                    Alternative::TwoSided => "two-sided",
                }
            ),
            Setting::Dirac(c) => format!("dirac(m={},m0={m0})", c.m),
        }
    }

    /// Data for replication `rep`.
    pub fn generate(&self, rep: usize) -> Result<PValueVector> {
        match self {
            Setting::Gaussian(c) => sim_gaussian(c, rep),
            Setting::Fet(c) => sim_fet(c, rep),
            Setting::Dirac(c) => {
                let mut rng = tagged_substream(c.seed, DATA_TAG, rep as u64);
                dirac_uniform_from(c.m, c.true_m0()?, &mut rng)
            }
        }
    }
}

/// Replication `rep` of the Gaussian setting.
pub fn sim_gaussian(config: &GaussianConfig, rep: usize) -> Result<PValueVector> {
    config.validate()?;
    let m0 = config.true_m0()?;
    let mut rng = tagged_substream(config.seed, DATA_TAG, rep as u64);
    let p = (0..config.m)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let shift = if i < m0 { 0.0 } else { config.mu };
            norm_sf(z + shift)
        })
        .collect();
    let labels = (0..config.m).map(|i| i < m0).collect();
    PValueVector::new(p)?.with_labels(labels)
}

/// Replication `rep` of the exact-test setting, with null supports attached.
pub fn sim_fet(config: &FetConfig, rep: usize) -> Result<PValueVector> {
    config.validate()?;
    let m3 = config.m3()?;
    let block = (config.m - m3) / 2;
    let mut rng = tagged_substream(config.seed, DATA_TAG, rep as u64);
    let draw = |rng: &mut StreamRng, rate: f64| -> Result<u64> {
        Binomial::new(config.n, rate)
            .map(|b| b.sample(rng))
            .map_err(|e| Error::InvalidConfig(format!("binomial rate {rate}: {e}")))
    };
    let mut p = Vec::with_capacity(config.m);
    let mut supports = Vec::with_capacity(config.m);
    let mut labels = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let (rate_a, rate_b, null) = if i < block {
            (config.rate_low, config.rate_low, true)
        } else if i < 2 * block {
            (config.rate_high, config.rate_high, true)
        } else {
            (config.rate_high, config.p3, config.signal_block_is_null())
        };
        let a = draw(&mut rng, rate_a)?;
        let c = draw(&mut rng, rate_b)?;
        let t = ContingencyTable::new(a, config.n - a, c, config.n - c)?;
        let r = fisher_exact(&t, config.alternative)?;
        p.push(r.p);
        supports.push(r.support);
        labels.push(null);
    }
    PValueVector::new(p)?.with_supports(supports)?.with_labels(labels)
}

fn dirac_uniform_from<R: Rng>(m: usize, m0: usize, rng: &mut R) -> Result<PValueVector> {
    if m0 > m {
        return Err(Error::InvalidConfig(format!("m0 = {m0} exceeds m = {m}")));
    }
    let p = (0..m).map(|i| if i < m0 { rng.random::<f64>() } else { 0.0 }).collect();
    PValueVector::new(p)?.with_labels((0..m).map(|i| i < m0).collect())
}

/// One Dirac-uniform vector: `m0` uniform nulls followed by `m − m0` zeros.
pub fn sim_dirac_uniform(m: usize, m0: usize, seed: u64) -> Result<PValueVector> {
    dirac_uniform_from(m, m0, &mut tagged_substream(seed, DATA_TAG, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{Estimator, EstimatorSpec};

    #[test]
    fn config_resolution() {
        assert_eq!(GaussianConfig::new(10_000, 0.6, 1.5).true_m0().unwrap(), 6000);
        let mut c = GaussianConfig::new(10, 0.5, 1.0);
        c.m0 = Some(4);
        assert!(c.validate().is_err());
        assert!(GaussianConfig::new(10, 0.5, -1.0).validate().is_err());
        let f = FetConfig::with_pi0(100, 0.7);
        assert_eq!(f.m3().unwrap(), 30);
        assert_eq!(f.true_m0().unwrap(), 70);
        assert!(FetConfig::with_pi0(100, 0.75).validate().is_err());
        let mut null_signal = FetConfig::with_pi0(100, 0.7);
        null_signal.p3 = 0.10;
        assert_eq!(null_signal.true_m0().unwrap(), 100);
    }

    #[test]
    fn gaussian_labels_and_determinism() {
        let mut c = GaussianConfig::new(200, 1.0, 2.0);
        c.seed = 3;
        let a = sim_gaussian(&c, 5).unwrap();
        assert!(a.labels().unwrap().iter().all(|&x| x));
        assert_eq!(a, sim_gaussian(&c, 5).unwrap());
        assert_ne!(a.values(), sim_gaussian(&c, 6).unwrap().values());
    }

    #[test]
    fn fet_full_null_and_supports() {
        let mut c = FetConfig::with_pi0(40, 1.0);
        c.seed = 9;
        let pv = sim_fet(&c, 0).unwrap();
        assert_eq!(pv.m0(), Some(40));
        assert!(pv.supports().unwrap().iter().all(|s| s.is_superuniform()));
        // rate 0.01 with n = 25 leaves most tables without successes
        assert!(pv.values().iter().filter(|&&p| p == 1.0).count() >= 10);
    }

    #[test]
    fn dirac_edge_cases() {
        let all_alt = sim_dirac_uniform(7, 0, 1).unwrap();
        assert!(all_alt.values().iter().all(|&p| p == 0.0));
        let storey = Estimator::new(EstimatorSpec::storey(0.5)).unwrap();
        assert_eq!(storey.m0_hat(all_alt.values()).unwrap(), 2.0);
        let all_null = sim_dirac_uniform(7, 7, 1).unwrap();
        assert!(all_null.values().iter().all(|&p| p > 0.0 && p < 1.0));
        assert!(sim_dirac_uniform(3, 4, 1).is_err());
    }

    #[test]
    fn storey_under_dirac_has_binomial_law() {
        // ν · m̂0 = 1 + Bin(m0, ν) with ν = 1/2, m0 = 50
        let storey = Estimator::new(EstimatorSpec::storey(0.5)).unwrap();
        let reps = 20_000;
        let mut counts = [0usize; 52];
        let c = DiracConfig {
            m: 50,
            pi0: None,
            m0: Some(50),
            replications: reps,
            seed: 17,
            alpha: 0.05,
        };
        let setting = Setting::Dirac(c);
        for r in 0..reps {
            let pv = setting.generate(r).unwrap();
            let k = (0.5 * storey.m0_hat(pv.values()).unwrap()).round() as usize;
            counts[k] += 1;
        }
        let pmf = |j: usize| (crate::special::ln_choose(50, j as u64) - 50.0 * std::f64::consts::LN_2).exp();
        // pool the sparse tails into the two outer cells
        let mut chi2 = 0.0;
        let (mut lo_obs, mut lo_exp, mut hi_obs, mut hi_exp) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..=50 {
            let obs = counts[j + 1] as f64;
            let exp = reps as f64 * pmf(j);
            if j <= 17 {
                lo_obs += obs;
                lo_exp += exp;
            } else if j >= 33 {
                hi_obs += obs;
                hi_exp += exp;
            } else {
                chi2 += (obs - exp).powi(2) / exp;
            }
        }
        chi2 += (lo_obs - lo_exp).powi(2) / lo_exp + (hi_obs - hi_exp).powi(2) / hi_exp;
        // 17 cells, 16 degrees of freedom; 99.9% quantile is 39.25
        assert!(chi2 < 39.25, "chi2 = {chi2}");
    }
}
