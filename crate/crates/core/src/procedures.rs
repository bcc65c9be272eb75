//! Benjamini–Hochberg step-up with a plug-in denominator.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of one step-up pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhResult {
    pub rejected: Vec<bool>,
    /// Number of rejections.
    pub k_hat: usize,
    /// `k_hat · α / denominator`, or 0 when nothing is rejected.
    pub threshold: f64,
    pub denominator: f64,
    pub alpha: f64,
}

/// Step-up at levels `ℓα/d`: rejects the `k̂` smallest p-values where
/// `k̂ = max{ℓ : p_(ℓ) ≤ ℓα/d}`. `d = m` is plain BH; `d = m̂0` is the
/// plug-in procedure. Ties are ordered by index.
pub fn bh_stepup(p: &[f64], alpha: f64, denominator: f64) -> Result<BhResult> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} outside (0, 1]")));
    }
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step-up denominator {denominator} must be positive"
        )));
    }
    if let Some(i) = p.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidPValues(format!(
            "p-value {} at index {i} outside [0, 1]",
            p[i]
        )));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));

    let k_hat = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(l, &i)| p[i] <= (l + 1) as f64 * alpha / denominator)
        .map_or(0, |(l, _)| l + 1);

    let mut rejected = vec![false; p.len()];
    for &i in &order[..k_hat] {
        rejected[i] = true;
    }
    let threshold = if k_hat == 0 {
        0.0
    } else {
        k_hat as f64 * alpha / denominator
    };
    Ok(BhResult {
        rejected,
        k_hat,
        threshold,
        denominator,
        alpha,
    })
}

/// Plain BH at level `alpha`.
pub fn bh(p: &[f64], alpha: f64) -> Result<BhResult> {
    bh_stepup(p, alpha, p.len().max(1) as f64)
}

/// Error counts of one rejection set against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub rejections: usize,
    pub false_rejections: usize,
    pub true_rejections: usize,
    /// `V / max(1, R)`.
    pub fdp: f64,
    /// `TP / max(1, m1)`.
    pub power: f64,
}

pub fn evaluate(rejected: &[bool], is_null: &[bool]) -> Result<ErrorMetrics> {
    if rejected.len() != is_null.len() {
        return Err(Error::InvalidPValues(format!(
            "{} decisions for {} labels",
            rejected.len(),
            is_null.len()
        )));
    }
    let (mut r, mut v, mut m1) = (0usize, 0usize, 0usize);
    for (&rej, &null) in rejected.iter().zip(is_null) {
        r += rej as usize;
        v += (rej && null) as usize;
        m1 += (!null) as usize;
    }
    let tp = r - v;
    Ok(ErrorMetrics {
        rejections: r,
        false_rejections: v,
        true_rejections: tp,
        fdp: v as f64 / r.max(1) as f64,
        power: tp as f64 / m1.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_bh_example() {
        let r = bh_stepup(&[0.01, 0.02, 0.5], 0.05, 3.0).unwrap();
        assert_eq!(r.rejected, vec![true, true, false]);
        assert_eq!(r.k_hat, 2);
        assert!((r.threshold - 0.1 / 3.0).abs() < 1e-15);
        let r = bh(&[0.01, 0.04, 0.03, 0.20], 0.05).unwrap();
        assert_eq!(r.rejected, vec![true, false, false, false]);
        assert!(bh(&[1.0; 4], 0.05).unwrap().rejected.iter().all(|&x| !x));
    }

    #[test]
    fn plugin_denominator_rejects_more() {
        let p = [0.01, 0.04, 0.03, 0.20];
        let r = bh_stepup(&p, 0.05, 3.0).unwrap();
        assert_eq!(r.k_hat, 3);
        let r = bh_stepup(&p, 0.05, 1.0).unwrap();
        assert_eq!(r.k_hat, 4);
    }

    #[test]
    fn no_rejections() {
        let r = bh(&[0.5, 0.9], 0.05).unwrap();
        assert_eq!(r.k_hat, 0);
        assert_eq!(r.threshold, 0.0);
        assert!(bh(&[], 0.05).unwrap().rejected.is_empty());
    }

    #[test]
    fn ties_and_validation() {
        let r = bh(&[0.02, 0.02, 0.02], 0.05).unwrap();
        assert_eq!(r.k_hat, 3);
        assert!(bh_stepup(&[0.1], 0.0, 1.0).is_err());
        assert!(bh_stepup(&[0.1], 0.05, 0.0).is_err());
        assert!(bh_stepup(&[1.1], 0.05, 1.0).is_err());
    }

    #[test]
    fn metrics() {
        let m = evaluate(&[true, true, false, true], &[true, false, false, true]).unwrap();
        assert_eq!(m.rejections, 3);
        assert_eq!(m.false_rejections, 2);
        assert!((m.fdp - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.power - 0.5).abs() < 1e-15);
        let m = evaluate(
            &[true, true, true, true, false, false, false, false],
            &[true, false, false, false, false, false, false, true],
        )
        .unwrap();
        assert_eq!((m.fdp, m.power), (0.25, 0.5));
        let none = evaluate(&[false, false], &[true, true]).unwrap();
        assert_eq!(none.fdp, 0.0);
        assert_eq!(none.power, 0.0);
    }
}
