//! Finite-support null distributions of discrete p-values, and the mid-p and
//! randomized transforms built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::compensated_sum;
use crate::transform::TransformFn;

/// Absolute tolerance for matching an observed p-value to a support atom.
pub const ATOM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionRepr {
    atoms: Vec<f64>,
    cdf: Vec<f64>,
}

/// Step-function null CDF of one p-value: atoms `a_1 < ... < a_k` in
/// `(0, 1]` with cumulative probabilities ending at exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct DiscreteNullDistribution {
    atoms: Vec<f64>,
    cdf: Vec<f64>,
    masses: Vec<f64>,
}

impl TryFrom<DistributionRepr> for DiscreteNullDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        DiscreteNullDistribution::new(r.atoms, r.cdf)
    }
}

impl From<DiscreteNullDistribution> for DistributionRepr {
    fn from(d: DiscreteNullDistribution) -> Self {
        DistributionRepr {
            atoms: d.atoms,
            cdf: d.cdf,
        }
    }
}

impl DiscreteNullDistribution {
    /// Builds a distribution from atoms and the CDF evaluated at them.
    ///
    /// A final CDF value within `1e-12` of one is snapped to exactly one.
    pub fn new(atoms: Vec<f64>, mut cdf: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != cdf.len() {
            return Err(Error::InvalidDistribution(
                "atoms and cdf must be non-empty and of equal length".into(),
            ));
        }
        if atoms.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::InvalidDistribution("atoms must lie in (0, 1]".into()));
        }
        if atoms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDistribution("atoms must be strictly increasing".into()));
        }
        let last = cdf.len() - 1;
        if (cdf[last] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "last cdf value must be 1, got {}",
                cdf[last]
            )));
        }
        cdf[last] = 1.0;
        let mut masses = Vec::with_capacity(cdf.len());
        let mut prev = 0.0;
        for &c in &cdf {
            let m = c - prev;
            if !(m > 0.0) {
                return Err(Error::InvalidDistribution(
                    "cdf must be strictly increasing from 0 (zero-mass atoms are not allowed)".into(),
                ));
            }
            masses.push(m);
            prev = c;
        }
        Ok(DiscreteNullDistribution { atoms, cdf, masses })
    }

    /// Builds from atoms and point masses; masses must sum to one within `1e-12`.
    pub fn from_masses(atoms: Vec<f64>, masses: &[f64]) -> Result<Self> {
        let mut acc = crate::special::NeumaierSum::default();
        let cdf = masses
            .iter()
            .map(|&m| {
                acc.add(m);
                acc.value()
            })
            .collect();
        Self::new(atoms, cdf)
    }

    /// Point mass at 1: the law of a p-value that is identically one.
    pub fn degenerate() -> Self {
        DiscreteNullDistribution {
            atoms: vec![1.0],
            cdf: vec![1.0],
            masses: vec![1.0],
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Index of the atom within [`ATOM_TOLERANCE`] of `p`.
    pub fn atom_index(&self, p: f64) -> Option<usize> {
        let j = self.atoms.partition_point(|&a| a < p);
        let near = |k: usize| (self.atoms[k] - p).abs() <= ATOM_TOLERANCE;
        if j < self.atoms.len() && near(j) {
            Some(j)
        } else if j > 0 && near(j - 1) {
            Some(j - 1)
        } else {
            None
        }
    }

    /// Null point mass `P(p = value)`; zero at `value = 0`, error when `value`
    /// is not an atom.
    pub fn point_mass(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(0.0);
        }
        self.atom_index(p)
            .map(|j| self.masses[j])
            .ok_or(Error::NotInSupport { index: 0, value: p })
    }

    /// `F(t) = P(p <= t)`.
    pub fn cdf_at(&self, t: f64) -> f64 {
        let j = self.atoms.partition_point(|&a| a <= t);
        if j == 0 {
            0.0
        } else {
            self.cdf[j - 1]
        }
    }

    /// `F(a_j) <= a_j` at every atom.
    pub fn is_superuniform(&self) -> bool {
        self.cdf.iter().zip(&self.atoms).all(|(c, a)| c <= a)
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().zip(&self.masses).map(|(a, m)| a * m))
    }

    /// `E g(p)` under this distribution.
    pub fn expect(&self, g: &TransformFn) -> f64 {
        compensated_sum(self.atoms.iter().zip(&self.masses).map(|(&a, m)| g.eval(a) * m))
    }

    /// Mid-p image: every atom `a_j` moves to `a_j − mass_j / 2`.
    pub fn mid_transform(&self) -> Result<MidTransform> {
        let mid: Vec<f64> = self
            .atoms
            .iter()
            .zip(&self.masses)
            .map(|(a, m)| mid_p_value(*a, *m))
            .collect();
        let mut order: Vec<usize> = (0..mid.len()).collect();
        order.sort_by(|&i, &j| mid[i].total_cmp(&mid[j]).then(i.cmp(&j)));
        let mut atoms: Vec<f64> = Vec::with_capacity(mid.len());
        let mut masses: Vec<f64> = Vec::with_capacity(mid.len());
        for &i in &order {
            if atoms.last() == Some(&mid[i]) {
                *masses.last_mut().unwrap() += self.masses[i];
            } else {
                atoms.push(mid[i]);
                masses.push(self.masses[i]);
            }
        }
        let distribution = DiscreteNullDistribution::from_masses(atoms, &masses)?;
        Ok(MidTransform {
            source_atoms: self.atoms.clone(),
            mid_atoms: mid,
            distribution,
        })
    }
}

/// Atom association of the mid-p transform together with the law of the
/// mid-p-value.
#[derive(Debug, Clone)]
pub struct MidTransform {
    source_atoms: Vec<f64>,
    mid_atoms: Vec<f64>,
    distribution: DiscreteNullDistribution,
}

impl MidTransform {
    /// `(a_j, q_j)` pairs in source atom order.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.source_atoms.iter().copied().zip(self.mid_atoms.iter().copied())
    }

    pub fn mid_atoms(&self) -> &[f64] {
        &self.mid_atoms
    }

    pub fn distribution(&self) -> &DiscreteNullDistribution {
        &self.distribution
    }

    /// Mid image of an observed p-value; `0` maps to `0`.
    pub fn map(&self, p: f64) -> Option<f64> {
        if p == 0.0 {
            return Some(0.0);
        }
        let j = self.source_atoms.partition_point(|&a| a < p);
        let near = |k: usize| (self.source_atoms[k] - p).abs() <= ATOM_TOLERANCE;
        if j < self.source_atoms.len() && near(j) {
            Some(self.mid_atoms[j])
        } else if j > 0 && near(j - 1) {
            Some(self.mid_atoms[j - 1])
        } else {
            None
        }
    }
}

/// `p − mass / 2`.
#[inline]
pub fn mid_p_value(p: f64, mass: f64) -> f64 {
    p - 0.5 * mass
}

/// `p − u · mass`, the randomized p-value for a given uniform draw.
#[inline]
pub fn randomized_p_value(p: f64, mass: f64, u: f64) -> f64 {
    p - u * mass
}

/// Randomized p-value `p − u · P0(p)` where `p` must be an atom of `dist` or 0.
pub fn randomize(p: f64, dist: &DiscreteNullDistribution, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidPValues(format!("uniform draw {u} outside [0, 1]")));
    }
    Ok(randomized_p_value(p, dist.point_mass(p)?, u))
}

/// `E_{p ~ F}[g(p)]`, the rescaling constant adjusted to a known null law.
pub fn nu_adjusted(g: &TransformFn, dist: &DiscreteNullDistribution) -> f64 {
    dist.expect(g)
}

/// `F(a_j) <= a_j` for all atoms.
pub fn check_superuniform(dist: &DiscreteNullDistribution) -> bool {
    dist.is_superuniform()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DiscreteNullDistribution {
        DiscreteNullDistribution::new(vec![0.2, 1.0], vec![0.2, 1.0]).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(DiscreteNullDistribution::new(vec![0.2, 1.0], vec![0.2, 0.9]).is_err());
        assert!(DiscreteNullDistribution::new(vec![0.2, 1.0], vec![0.2, 0.2 + 0.0]).is_err());
        assert!(DiscreteNullDistribution::new(vec![0.5, 0.2], vec![0.2, 1.0]).is_err());
        assert!(DiscreteNullDistribution::new(vec![0.0, 1.0], vec![0.2, 1.0]).is_err());
        assert!(DiscreteNullDistribution::new(vec![0.2, 1.0], vec![0.0, 1.0]).is_err());
        let d = DiscreteNullDistribution::new(vec![0.3, 1.0], vec![0.3, 1.0 - 1e-13]).unwrap();
        assert_eq!(*d.cdf().last().unwrap(), 1.0);
    }

    #[test]
    fn adjusted_rescaling_constants() {
        let d = two_point();
        let ind = TransformFn::indicator(0.5).unwrap();
        assert!((nu_adjusted(&ind, &d) - 0.8).abs() < 1e-15);
        assert!((nu_adjusted(&TransformFn::identity(), &d) - 0.84).abs() < 1e-15);
        assert_eq!(nu_adjusted(&ind, &DiscreteNullDistribution::degenerate()), 1.0);
        // du-Storey closed form 1 − F(λ)
        assert!((1.0 - d.cdf_at(0.5) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn mid_transform_examples() {
        let mt = two_point().mid_transform().unwrap();
        assert_eq!(mt.mid_atoms(), &[0.1, 0.6]);
        assert!((mt.distribution().mean() - 0.5).abs() < 1e-15);
        let deg = DiscreteNullDistribution::degenerate().mid_transform().unwrap();
        assert_eq!(deg.mid_atoms(), &[0.5]);
        assert_eq!(mt.map(0.2), Some(0.1));
        assert_eq!(mt.map(0.0), Some(0.0));
        assert_eq!(mt.map(0.3), None);
    }

    #[test]
    fn mid_p_values_of_small_support() {
        // Support/mid-support pair read off the mid-p illustration; the masses
        // implied by the pair do not form a full distribution, so only the
        // pointwise map is checked.
        let atoms = [0.3, 0.55, 0.7, 0.9, 1.0];
        let mids = [0.15, 0.465, 0.625, 0.8, 0.95];
        let masses = [0.3, 0.17, 0.15, 0.2, 0.1];
        for ((a, q), m) in atoms.iter().zip(mids).zip(masses) {
            assert!((mid_p_value(*a, m) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn randomize_examples() {
        let d = two_point();
        assert!((randomize(0.2, &d, 0.5).unwrap() - 0.1).abs() < 1e-16);
        assert_eq!(randomize(0.2, &d, 0.0).unwrap(), 0.2);
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(randomize(0.0, &d, u).unwrap(), 0.0);
        }
        assert!(matches!(randomize(0.5, &d, 0.5), Err(Error::NotInSupport { .. })));
        assert!(randomize(0.2, &d, 1.5).is_err());
    }

    #[test]
    fn superuniformity() {
        assert!(check_superuniform(&two_point()));
        let bad = DiscreteNullDistribution::new(vec![0.2, 1.0], vec![0.5, 1.0]).unwrap();
        assert!(!check_superuniform(&bad));
    }

    #[test]
    fn json_shape() {
        let d: DiscreteNullDistribution = serde_json::from_str(r#"{"atoms":[0.2,1.0],"cdf":[0.2,1.0]}"#).unwrap();
        assert_eq!(d, two_point());
        assert!(serde_json::from_str::<DiscreteNullDistribution>(r#"{"atoms":[0.2],"cdf":[0.5]}"#).is_err());
    }
}
