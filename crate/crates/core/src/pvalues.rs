use std::sync::Arc;

use crate::distribution::DiscreteNullDistribution;
use crate::error::{Error, Result};

/// Observed p-values with optional per-hypothesis null supports and truth
/// labels (`true` = null hypothesis is true).
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector {
    values: Vec<f64>,
    supports: Option<Vec<Arc<DiscreteNullDistribution>>>,
    is_null: Option<Vec<bool>>,
}

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = values.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidPValues(format!(
                "p-value {p} at index {i} outside [0, 1]"
            )));
        }
        Ok(PValueVector {
            values,
            supports: None,
            is_null: None,
        })
    }

    /// Attaches null supports; each value must be an atom of its own support
    /// (or exactly 0).
    pub fn with_supports(mut self, supports: Vec<Arc<DiscreteNullDistribution>>) -> Result<Self> {
        if supports.len() != self.values.len() {
            return Err(Error::InvalidPValues(format!(
                "{} supports for {} p-values",
                supports.len(),
                self.values.len()
            )));
        }
        for (i, (p, s)) in self.values.iter().zip(&supports).enumerate() {
            if *p != 0.0 && s.atom_index(*p).is_none() {
                return Err(Error::NotInSupport { index: i, value: *p });
            }
        }
        self.supports = Some(supports);
        Ok(self)
    }

    pub fn with_labels(mut self, is_null: Vec<bool>) -> Result<Self> {
        if is_null.len() != self.values.len() {
            return Err(Error::InvalidPValues(format!(
                "{} labels for {} p-values",
                is_null.len(),
                self.values.len()
            )));
        }
        self.is_null = Some(is_null);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn supports(&self) -> Option<&[Arc<DiscreteNullDistribution>]> {
        self.supports.as_deref()
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.is_null.as_deref()
    }

    /// Number of true nulls, when labels are present.
    pub fn m0(&self) -> Option<usize> {
        self.is_null.as_ref().map(|l| l.iter().filter(|&&b| b).count())
    }

    /// Null point mass of each observed p-value (0 without supports or at p = 0).
    pub fn point_masses(&self) -> Vec<f64> {
        match &self.supports {
            None => vec![0.0; self.values.len()],
            Some(s) => self
                .values
                .iter()
                .zip(s)
                .map(|(&p, d)| d.point_mass(p).unwrap_or(0.0))
                .collect(),
        }
    }

    /// Copy with `values[index]` replaced by 0.
    pub fn with_zero_at(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.values[index] = 0.0;
        out
    }
}
