//! Monotone transformations `g: [0,1] -> [0,1]` and their uniform rescaling
//! constants `ν = E g(U)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::compensated_sum;

/// Declarative form of a transformation, as it appears in JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    /// `g(u) = 1{u > λ}`.
    Indicator { lambda: f64 },
    /// `g(u) = u^r · 1{u > λ}`.
    Power { r: f64, lambda: f64 },
    /// Right-continuous step function: `g(u) = values[j]` on
    /// `[breakpoints[j], breakpoints[j+1])`, the last piece closed at 1.
    Table { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `κ·first + (1−κ)·second`.
    Mixture {
        weight: f64,
        first: Box<TransformFn>,
        second: Box<TransformFn>,
    },
}

/// A validated member of the class of non-decreasing transformations with
/// positive uniform mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformKind", into = "TransformKind")]
pub struct TransformFn {
    kind: TransformKind,
    nu: f64,
}

impl TryFrom<TransformKind> for TransformFn {
    type Error = Error;

    fn try_from(kind: TransformKind) -> Result<Self> {
        validate(&kind)?;
        let nu = uniform_mean(&kind);
        if !(nu > 0.0) {
            return Err(Error::InvalidTransform(format!(
                "uniform mean is {nu}; transformation is not in the admissible class"
            )));
        }
        Ok(TransformFn { kind, nu })
    }
}

impl From<TransformFn> for TransformKind {
    fn from(g: TransformFn) -> Self {
        g.kind
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidTransform(format!(
            "threshold λ must lie in [0, 1), got {lambda}"
        )));
    }
    Ok(())
}

fn validate(kind: &TransformKind) -> Result<()> {
    match kind {
        TransformKind::Indicator { lambda } => check_lambda(*lambda),
        TransformKind::Power { r, lambda } => {
            if !(r.is_finite() && *r >= 0.0) {
                return Err(Error::InvalidTransform(format!(
                    "degree r must be a finite non-negative number, got {r}"
                )));
            }
            check_lambda(*lambda)
        }
        TransformKind::Table { breakpoints, values } => {
            if breakpoints.is_empty() || breakpoints.len() != values.len() {
                return Err(Error::InvalidTransform(
                    "table needs equally many breakpoints and values (at least one)".into(),
                ));
            }
            if breakpoints[0] != 0.0 {
                return Err(Error::InvalidTransform("first breakpoint must be 0".into()));
            }
            if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|&b| b > 1.0) {
                return Err(Error::InvalidTransform(
                    "breakpoints must be strictly increasing within [0, 1]".into(),
                ));
            }
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidTransform("table values must lie in [0, 1]".into()));
            }
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidTransform("table values must be non-decreasing".into()));
            }
            Ok(())
        }
        TransformKind::Mixture { weight, .. } => {
            if !(0.0..=1.0).contains(weight) {
                return Err(Error::InvalidTransform(format!(
                    "mixture weight must lie in [0, 1], got {weight}"
                )));
            }
            Ok(())
        }
    }
}

#[inline]
fn power(u: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if r.fract() == 0.0 && r <= 64.0 {
        u.powi(r as i32)
    } else {
        u.powf(r)
    }
}

fn uniform_mean(kind: &TransformKind) -> f64 {
    match kind {
        TransformKind::Indicator { lambda } => 1.0 - lambda,
        TransformKind::Power { r, lambda } => (1.0 - power(*lambda, r + 1.0)) / (r + 1.0),
        TransformKind::Table { breakpoints, values } => compensated_sum(
            breakpoints
                .iter()
                .zip(values)
                .enumerate()
                .map(|(j, (b, v))| v * (breakpoints.get(j + 1).copied().unwrap_or(1.0) - b)),
        ),
        TransformKind::Mixture { weight, first, second } => weight * first.nu() + (1.0 - weight) * second.nu(),
    }
}

impl TransformFn {
    pub fn indicator(lambda: f64) -> Result<Self> {
        TransformKind::Indicator { lambda }.try_into()
    }

    pub fn power(r: f64, lambda: f64) -> Result<Self> {
        TransformKind::Power { r, lambda }.try_into()
    }

    /// The identity `g(u) = u`.
    pub fn identity() -> Self {
        TransformFn::power(1.0, 0.0).expect("identity is admissible")
    }

    pub fn table(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        TransformKind::Table { breakpoints, values }.try_into()
    }

    pub fn mixture(weight: f64, first: TransformFn, second: TransformFn) -> Result<Self> {
        TransformKind::Mixture {
            weight,
            first: Box::new(first),
            second: Box::new(second),
        }
        .try_into()
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    /// `ν = E g(U)` for `U` uniform on `[0,1]`; always positive.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.kind {
            TransformKind::Indicator { lambda } => {
                if u > *lambda {
                    1.0
                } else {
                    0.0
                }
            }
            TransformKind::Power { r, lambda } => {
                if u > *lambda {
                    power(u, *r)
                } else {
                    0.0
                }
            }
            TransformKind::Table { breakpoints, values } => {
                let j = breakpoints.partition_point(|&b| b <= u);
                if j == 0 {
                    values[0]
                } else {
                    values[j - 1]
                }
            }
            TransformKind::Mixture { weight, first, second } => {
                weight * first.eval(u) + (1.0 - weight) * second.eval(u)
            }
        }
    }

    /// Points in `(0, 1)` where `g` may jump.
    pub fn jumps(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            TransformKind::Indicator { lambda } | TransformKind::Power { lambda, .. } => {
                if *lambda > 0.0 {
                    vec![*lambda]
                } else {
                    vec![]
                }
            }
            TransformKind::Table { breakpoints, .. } => {
                breakpoints.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect()
            }
            TransformKind::Mixture { first, second, .. } => {
                let mut v = first.jumps();
                v.extend(second.jumps());
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `E g(U)^2`, closed form where available.
    pub fn uniform_second_moment(&self) -> Result<f64> {
        match &self.kind {
            TransformKind::Indicator { lambda } => Ok(1.0 - lambda),
            TransformKind::Power { r, lambda } => {
                let s = 2.0 * r + 1.0;
                Ok((1.0 - power(*lambda, s)) / s)
            }
            TransformKind::Table { breakpoints, values } => {
                Ok(compensated_sum(breakpoints.iter().zip(values).enumerate().map(
                    |(j, (b, v))| v * v * (breakpoints.get(j + 1).copied().unwrap_or(1.0) - b),
                )))
            }
            TransformKind::Mixture { .. } => {
                let mut pts = vec![0.0];
                pts.extend(self.jumps());
                pts.push(1.0);
                quadrature::integrate_pieces(|u| self.eval(u).powi(2), &pts, 1e-12)
            }
        }
    }

    /// Exact law of `g(U)` as (value, probability) pairs, sorted by value,
    /// when `g` takes finitely many values.
    pub fn uniform_law(&self) -> Option<Vec<(f64, f64)>> {
        let pairs: Vec<(f64, f64)> = match &self.kind {
            TransformKind::Indicator { lambda } => vec![(0.0, *lambda), (1.0, 1.0 - lambda)],
            TransformKind::Power { r, lambda } if *r == 0.0 => {
                vec![(0.0, *lambda), (1.0, 1.0 - lambda)]
            }
            TransformKind::Table { breakpoints, values } => breakpoints
                .iter()
                .zip(values)
                .enumerate()
                .map(|(j, (b, v))| (*v, breakpoints.get(j + 1).copied().unwrap_or(1.0) - b))
                .collect(),
            _ => return None,
        };
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if p <= 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Some(merged)
    }

    /// Short human-readable label, e.g. `power(2,0.5)`.
    pub fn label(&self) -> String {
        match &self.kind {
            TransformKind::Indicator { lambda } => format!("indicator({lambda})"),
            TransformKind::Power { r, lambda } => format!("power({r},{lambda})"),
            TransformKind::Table { breakpoints, .. } => format!("table[{}]", breakpoints.len()),
            TransformKind::Mixture { weight, first, second } => {
                format!("mix({weight};{};{})", first.label(), second.label())
            }
        }
    }
}

/// `ν(g) = E g(U)`.
pub fn nu_uniform(g: &TransformFn) -> f64 {
    g.nu()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaling_constants() {
        assert_eq!(TransformFn::indicator(0.5).unwrap().nu(), 0.5);
        assert_eq!(TransformFn::power(1.0, 0.0).unwrap().nu(), 0.5);
        let poly = TransformFn::power(2.0, 0.5).unwrap();
        assert!((poly.nu() - 7.0 / 24.0).abs() < 1e-16);
        assert!((1.0 / poly.nu() - 24.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_equals_power_zero() {
        let a = TransformFn::indicator(0.3).unwrap();
        let b = TransformFn::power(0.0, 0.3).unwrap();
        assert_eq!(a.nu().to_bits(), b.nu().to_bits());
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert_eq!(a.eval(u), b.eval(u));
        }
    }

    #[test]
    fn rejects_outside_class() {
        assert!(TransformFn::indicator(1.0).is_err());
        assert!(TransformFn::indicator(-0.1).is_err());
        assert!(TransformFn::power(-1.0, 0.0).is_err());
        assert!(TransformFn::table(vec![0.0, 0.5], vec![0.0, 0.0]).is_err());
        assert!(TransformFn::table(vec![0.0, 0.5], vec![0.6, 0.2]).is_err());
        assert!(TransformFn::table(vec![0.1, 0.5], vec![0.0, 1.0]).is_err());
        assert!(TransformFn::table(vec![0.0, 0.5, 0.5], vec![0.0, 0.5, 1.0]).is_err());
    }

    #[test]
    fn table_is_right_continuous() {
        let g = TransformFn::table(vec![0.0, 0.5, 0.8], vec![0.0, 0.4, 1.0]).unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(0.4999), 0.0);
        assert_eq!(g.eval(0.5), 0.4);
        assert_eq!(g.eval(0.8), 1.0);
        assert_eq!(g.eval(1.0), 1.0);
        assert!((g.nu() - 0.32).abs() < 1e-15);
        let law = g.uniform_law().unwrap();
        assert_eq!(law.len(), 3);
    }

    #[test]
    fn second_moments() {
        let id = TransformFn::identity();
        assert!((id.uniform_second_moment().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let mix = TransformFn::mixture(0.5, TransformFn::indicator(0.5).unwrap(), id).unwrap();
        assert!((mix.nu() - 0.5).abs() < 1e-15);
        // ∫ (0.5·1{u>.5} + 0.5u)^2 = 0.25·0.5 + 0.5·∫_{.5}^1 u + 0.25/3
        let want = 0.125 + 0.5 * 0.375 + 0.25 / 3.0;
        assert!((mix.uniform_second_moment().unwrap() - want).abs() < 1e-11);
    }

    #[test]
    fn json_round_trip_validates() {
        let g: TransformFn = serde_json::from_str(r#"{"kind":"power","r":2,"lambda":0.5}"#).unwrap();
        assert_eq!(g, TransformFn::power(2.0, 0.5).unwrap());
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"kind\":\"power\""));
        assert!(serde_json::from_str::<TransformFn>(r#"{"kind":"indicator","lambda":1.5}"#).is_err());
    }
}
