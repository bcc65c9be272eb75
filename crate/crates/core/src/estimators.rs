//! Estimators of the number of true null hypotheses `m0`.
//!
//! Homogeneous estimators have the form `(1 + Σ g(p_i)) / ν` for a single
//! transformation `g`; heterogeneous ones use `1/min ν_i + Σ g_i(p_i)/ν_i`.
//! Both families, and convex combinations of their members, can be plugged
//! into the BH procedure with FDR control under independence. The legacy
//! Pounds–Cheng estimator and its ZZD correction are provided for comparison
//! and are excluded from combinations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pvalues::PValueVector;
use crate::special::compensated_sum;
use crate::transform::TransformFn;

/// Published ZZD correction pair for `m = 500`.
pub const ZZD_C_500: f64 = 1.011709;
pub const ZZD_S_500: f64 = 98.0;

fn default_m_ref() -> Option<usize> {
    Some(500)
}

/// Declarative estimator description (the JSON config format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Homogeneous {
        g: TransformFn,
    },
    Heterogeneous {
        gs: Vec<TransformFn>,
    },
    Storey {
        lambda: f64,
    },
    PcNew,
    /// `min(m, 2 Σ p_i)`.
    PcLegacy,
    /// `C · min(m, max(s, 2 Σ p_i))`; `m_ref` is the `m` the constants were derived for.
    PcZzd {
        c: f64,
        s: f64,
        #[serde(default = "default_m_ref")]
        m_ref: Option<usize>,
    },
    Poly {
        r: f64,
        lambda: f64,
    },
    Combination {
        members: Vec<WeightedSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    pub w: f64,
    pub spec: EstimatorSpec,
}

impl EstimatorSpec {
    pub fn storey(lambda: f64) -> Self {
        EstimatorSpec::Storey { lambda }
    }

    pub fn poly(r: f64, lambda: f64) -> Self {
        EstimatorSpec::Poly { r, lambda }
    }

    /// ZZD estimator with the published `m = 500` constants.
    pub fn pc_zzd_500() -> Self {
        EstimatorSpec::PcZzd {
            c: ZZD_C_500,
            s: ZZD_S_500,
            m_ref: Some(500),
        }
    }

    /// Whether the estimator belongs to the guaranteed class (or is a
    /// convex combination of members).
    pub fn is_guaranteed(&self) -> bool {
        match self {
            EstimatorSpec::PcLegacy | EstimatorSpec::PcZzd { .. } => false,
            EstimatorSpec::Combination { members } => members.iter().all(|m| m.spec.is_guaranteed()),
            _ => true,
        }
    }

    /// The single transformation of a homogeneous estimator.
    pub fn homogeneous_transform(&self) -> Result<TransformFn> {
        match self {
            EstimatorSpec::Homogeneous { g } => Ok(g.clone()),
            EstimatorSpec::Storey { lambda } => TransformFn::indicator(*lambda),
            EstimatorSpec::PcNew => Ok(TransformFn::identity()),
            EstimatorSpec::Poly { r, lambda } => TransformFn::power(*r, *lambda),
            other => Err(Error::InvalidSpec(format!(
                "{} is not a single-transformation estimator",
                other.id()
            ))),
        }
    }

    /// Stable identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            EstimatorSpec::Homogeneous { g } => format!("homogeneous({})", g.label()),
            EstimatorSpec::Heterogeneous { gs } => format!("heterogeneous[{}]", gs.len()),
            EstimatorSpec::Storey { lambda } => format!("storey({lambda})"),
            EstimatorSpec::PcNew => "pc_new".into(),
            EstimatorSpec::PcLegacy => "pc_legacy".into(),
            EstimatorSpec::PcZzd { c, s, .. } => format!("pc_zzd({c},{s})"),
            EstimatorSpec::Poly { r, lambda } => format!("poly({r},{lambda})"),
            EstimatorSpec::Combination { members } => {
                let parts: Vec<String> = members.iter().map(|m| format!("{}*{}", m.w, m.spec.id())).collect();
                format!("combo[{}]", parts.join("+"))
            }
        }
    }
}

/// Outcome of evaluating an estimator on one p-value vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub m0_hat: f64,
    /// `m0_hat / m`, unclamped.
    pub pi0_hat_raw: f64,
    /// `pi0_hat_raw` clamped to `[0, 1]` for display.
    pub pi0_hat: f64,
    pub label: String,
    /// Per-hypothesis contributions `g_i(p_i) / ν_i` (empty for estimators
    /// without that structure).
    pub contributions: Vec<f64>,
    pub warnings: Vec<String>,
}

impl EstimateResult {
    pub(crate) fn new(m0_hat: f64, m: usize, label: String) -> Self {
        let raw = if m == 0 { f64::NAN } else { m0_hat / m as f64 };
        EstimateResult {
            m0_hat,
            pi0_hat_raw: raw,
            pi0_hat: raw.clamp(0.0, 1.0),
            label,
            contributions: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Homogeneous(TransformFn),
    Heterogeneous(Vec<TransformFn>),
    Storey { lambda: f64 },
    PcNew,
    PcLegacy,
    PcZzd { c: f64, s: f64, m_ref: Option<usize> },
    Combination(Vec<(f64, Estimator)>),
}

/// A validated, ready-to-evaluate estimator.
#[derive(Debug, Clone)]
pub struct Estimator {
    spec: EstimatorSpec,
    compiled: Compiled,
}

impl Estimator {
    pub fn new(spec: EstimatorSpec) -> Result<Self> {
        let compiled = match &spec {
            EstimatorSpec::Homogeneous { g } => Compiled::Homogeneous(g.clone()),
            EstimatorSpec::Heterogeneous { gs } => {
                if gs.is_empty() {
                    return Err(Error::InvalidSpec(
                        "heterogeneous estimator without transformations".into(),
                    ));
                }
                Compiled::Heterogeneous(gs.clone())
            }
            EstimatorSpec::Storey { lambda } => {
                TransformFn::indicator(*lambda).map_err(|e| Error::InvalidSpec(e.to_string()))?;
                Compiled::Storey { lambda: *lambda }
            }
            EstimatorSpec::PcNew => Compiled::PcNew,
            EstimatorSpec::PcLegacy => Compiled::PcLegacy,
            EstimatorSpec::PcZzd { c, s, m_ref } => {
                if !(c.is_finite() && *c > 0.0 && s.is_finite() && *s >= 0.0) {
                    return Err(Error::InvalidSpec(format!("invalid ZZD constants C={c}, s={s}")));
                }
                Compiled::PcZzd {
                    c: *c,
                    s: *s,
                    m_ref: *m_ref,
                }
            }
            EstimatorSpec::Poly { r, lambda } => {
                Compiled::Homogeneous(TransformFn::power(*r, *lambda).map_err(|e| Error::InvalidSpec(e.to_string()))?)
            }
            EstimatorSpec::Combination { members } => {
                validate_weights(members)?;
                let mut out = Vec::with_capacity(members.len());
                for m in members {
                    if !m.spec.is_guaranteed() {
                        return Err(Error::InvalidSpec(format!(
                            "{} cannot be part of a combination: its plug-in guarantee does not carry over",
                            m.spec.id()
                        )));
                    }
                    out.push((m.w, Estimator::new(m.spec.clone())?));
                }
                Compiled::Combination(out)
            }
        };
        Ok(Estimator { spec, compiled })
    }

    pub fn spec(&self) -> &EstimatorSpec {
        &self.spec
    }

    pub fn id(&self) -> String {
        self.spec.id()
    }

    /// Evaluates `m̂0` on raw p-values.
    pub fn m0_hat(&self, p: &[f64]) -> Result<f64> {
        match &self.compiled {
            Compiled::Homogeneous(g) => Ok(homogeneous_value(g, p)),
            Compiled::Heterogeneous(gs) => {
                if gs.len() != p.len() {
                    return Err(Error::InvalidSpec(format!(
                        "{} transformations for {} p-values",
                        gs.len(),
                        p.len()
                    )));
                }
                let nus: Vec<f64> = gs.iter().map(TransformFn::nu).collect();
                heterogeneous_value(gs.iter(), &nus, p)
            }
            Compiled::Storey { lambda } => Ok(storey_value(*lambda, p)),
            Compiled::PcNew => Ok(pc_new_value(p)),
            Compiled::PcLegacy => Ok(pc_legacy_value(p)),
            Compiled::PcZzd { c, s, .. } => Ok(pc_zzd_value(p, *c, *s)),
            Compiled::Combination(members) => {
                let mut total = 0.0;
                for (w, e) in members {
                    total += w * e.m0_hat(p)?;
                }
                Ok(total)
            }
        }
    }

    /// Evaluates with diagnostics.
    pub fn estimate(&self, pvals: &PValueVector) -> Result<EstimateResult> {
        let p = pvals.values();
        match &self.compiled {
            Compiled::Homogeneous(g) => {
                let mut r = estimate_homogeneous(g, pvals);
                r.label = self.id();
                Ok(r)
            }
            Compiled::Heterogeneous(gs) => {
                let nus: Vec<f64> = gs.iter().map(TransformFn::nu).collect();
                let mut r = estimate_heterogeneous(gs, &nus, pvals)?;
                r.label = self.id();
                Ok(r)
            }
            Compiled::PcZzd { c, s, m_ref } => Ok(estimate_pc_zzd(pvals, *c, *s, *m_ref)),
            Compiled::PcLegacy => Ok(estimate_pc_legacy(pvals)),
            _ => Ok(EstimateResult::new(self.m0_hat(p)?, p.len(), self.id())),
        }
    }
}

fn validate_weights(members: &[WeightedSpec]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::InvalidSpec("combination without members".into()));
    }
    if members.iter().any(|m| !(m.w >= 0.0 && m.w.is_finite())) {
        return Err(Error::InvalidSpec("combination weights must be non-negative".into()));
    }
    let total: f64 = compensated_sum(members.iter().map(|m| m.w));
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSpec(format!("combination weights sum to {total}, not 1")));
    }
    Ok(())
}

#[inline]
fn homogeneous_value(g: &TransformFn, p: &[f64]) -> f64 {
    (1.0 + compensated_sum(p.iter().map(|&x| g.eval(x)))) / g.nu()
}

fn storey_value(lambda: f64, p: &[f64]) -> f64 {
    let count = p.iter().filter(|&&x| x > lambda).count();
    (1.0 + count as f64) / (1.0 - lambda)
}

fn pc_new_value(p: &[f64]) -> f64 {
    2.0 + 2.0 * compensated_sum(p.iter().copied())
}

fn pc_legacy_value(p: &[f64]) -> f64 {
    (2.0 * compensated_sum(p.iter().copied())).min(p.len() as f64)
}

fn pc_zzd_value(p: &[f64], c: f64, s: f64) -> f64 {
    let m = p.len() as f64;
    c * m.min(s.max(2.0 * compensated_sum(p.iter().copied())))
}

/// `1/min ν_i + Σ g_i(p_i)/ν_i` over indices with `ν_i > 0`.
pub(crate) fn heterogeneous_value<'a, I>(gs: I, nus: &[f64], p: &[f64]) -> Result<f64>
where
    I: Iterator<Item = &'a TransformFn>,
{
    let mut min_nu = f64::INFINITY;
    let mut acc = crate::special::NeumaierSum::default();
    for ((g, &nu), &x) in gs.zip(nus).zip(p) {
        if nu > 0.0 {
            min_nu = min_nu.min(nu);
            acc.add(g.eval(x) / nu);
        }
    }
    if !min_nu.is_finite() {
        return Err(Error::AllRescalingZero);
    }
    Ok(1.0 / min_nu + acc.value())
}

/// `m̂0 = (1 + Σ g(p_i)) / ν(g)`.
pub fn estimate_homogeneous(g: &TransformFn, pvals: &PValueVector) -> EstimateResult {
    let p = pvals.values();
    let mut r = EstimateResult::new(homogeneous_value(g, p), p.len(), format!("homogeneous({})", g.label()));
    r.contributions = p.iter().map(|&x| g.eval(x) / g.nu()).collect();
    r
}

/// `m̂0 = 1/min ν_i + Σ g_i(p_i)/ν_i`; indices with `ν_i = 0` are dropped
/// from both the sum and the minimum.
pub fn estimate_heterogeneous(gs: &[TransformFn], nus: &[f64], pvals: &PValueVector) -> Result<EstimateResult> {
    let p = pvals.values();
    if gs.len() != p.len() || nus.len() != p.len() {
        return Err(Error::InvalidSpec(format!(
            "{} transformations / {} constants for {} p-values",
            gs.len(),
            nus.len(),
            p.len()
        )));
    }
    if nus.iter().any(|&nu| !(nu >= 0.0)) {
        return Err(Error::InvalidSpec("rescaling constants must be non-negative".into()));
    }
    let value = heterogeneous_value(gs.iter(), nus, p)?;
    let mut r = EstimateResult::new(value, p.len(), format!("heterogeneous[{}]", gs.len()));
    r.contributions = gs
        .iter()
        .zip(nus)
        .zip(p)
        .map(|((g, &nu), &x)| if nu > 0.0 { g.eval(x) / nu } else { 0.0 })
        .collect();
    Ok(r)
}

/// Legacy Pounds–Cheng estimator, read as `min(m, 2 Σ p_i)`.
pub fn estimate_pc_legacy(pvals: &PValueVector) -> EstimateResult {
    let p = pvals.values();
    let mut r = EstimateResult::new(pc_legacy_value(p), p.len(), "pc_legacy".into());
    r.warnings.push("no plug-in FDR guarantee".into());
    r
}

/// ZZD-corrected Pounds–Cheng estimator `C · min(m, max(s, 2 Σ p_i))`.
pub fn estimate_pc_zzd(pvals: &PValueVector, c: f64, s: f64, m_ref: Option<usize>) -> EstimateResult {
    let p = pvals.values();
    let mut r = EstimateResult::new(pc_zzd_value(p, c, s), p.len(), format!("pc_zzd({c},{s})"));
    if let Some(m_ref) = m_ref {
        if m_ref != p.len() {
            r.warnings.push(format!(
                "correction constants were derived for m = {m_ref}, applied to m = {}",
                p.len()
            ));
        }
    }
    r
}

/// Builds a validated convex combination.
pub fn combine(members: Vec<(f64, EstimatorSpec)>) -> Result<EstimatorSpec> {
    let spec = EstimatorSpec::Combination {
        members: members.into_iter().map(|(w, spec)| WeightedSpec { w, spec }).collect(),
    };
    Estimator::new(spec.clone())?;
    Ok(spec)
}

/// Per-hypothesis transformations of a guaranteed estimator on `m` hypotheses.
pub fn class_transforms(spec: &EstimatorSpec, m: usize) -> Result<Vec<TransformFn>> {
    match spec {
        EstimatorSpec::Heterogeneous { gs } => {
            if gs.len() != m {
                return Err(Error::InvalidSpec(format!("{} transformations for m = {m}", gs.len())));
            }
            Ok(gs.clone())
        }
        EstimatorSpec::Combination { members } => {
            validate_weights(members)?;
            let mut iter = members.iter().filter(|mm| mm.w > 0.0);
            let first = iter
                .next()
                .ok_or_else(|| Error::InvalidSpec("all weights are zero".into()))?;
            let mut acc_w = first.w;
            let mut acc = class_transforms(&first.spec, m)?;
            for next in iter {
                let lambda = acc_w / (acc_w + next.w);
                let other = class_transforms(&next.spec, m)?;
                acc = reduce_transforms(&acc, &other, lambda)?;
                acc_w += next.w;
            }
            Ok(acc)
        }
        other => Ok(vec![other.homogeneous_transform()?; m]),
    }
}

fn reduce_transforms(gs: &[TransformFn], hs: &[TransformFn], lambda: f64) -> Result<Vec<TransformFn>> {
    gs.iter()
        .zip(hs)
        .map(|(g, h)| {
            if g == h {
                return Ok(g.clone());
            }
            let (nu, mu) = (g.nu(), h.nu());
            let kappa = lambda * mu / (lambda * mu + (1.0 - lambda) * nu);
            TransformFn::mixture(kappa, g.clone(), h.clone())
        })
        .collect()
}

/// Reduces `λ·spec1 + (1−λ)·spec2` to a single heterogeneous estimator with
/// transformations `f_i = κ_i g_i + (1−κ_i) h_i`, where
/// `κ_i = λμ_i / (λμ_i + (1−λ)ν_i)` and `ν(f_i) = κ_iν_i + (1−κ_i)μ_i`.
///
/// The result never exceeds the combination; for single-transformation
/// members the two coincide.
pub fn reduce_combination(
    spec1: &EstimatorSpec,
    spec2: &EstimatorSpec,
    lambda: f64,
    m: usize,
) -> Result<EstimatorSpec> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidSpec(format!(
            "combination weight {lambda} outside [0, 1]"
        )));
    }
    if !spec1.is_guaranteed() || !spec2.is_guaranteed() {
        return Err(Error::InvalidSpec("only guaranteed estimators can be reduced".into()));
    }
    let gs = class_transforms(spec1, m)?;
    let hs = class_transforms(spec2, m)?;
    let fs = if lambda == 1.0 {
        gs
    } else if lambda == 0.0 {
        hs
    } else {
        reduce_transforms(&gs, &hs, lambda)?
    };
    Ok(EstimatorSpec::Heterogeneous { gs: fs })
}

/// Bias of a homogeneous estimator with exactly uniform nulls:
/// `(1 + m1 · E g(X1)) / ν`.
pub fn bias_uniform(g: &TransformFn, m: usize, m0: usize, ex1: f64) -> f64 {
    let m1 = m.saturating_sub(m0) as f64;
    (1.0 + m1 * ex1) / g.nu()
}

/// Bias with super-uniform nulls: the uniform bias plus `m0 (E g(X0) − ν) / ν`.
pub fn bias_superuniform(g: &TransformFn, m: usize, m0: usize, ex0: f64, ex1: f64) -> f64 {
    bias_uniform(g, m, m0, ex1) + m0 as f64 * (ex0 - g.nu()) / g.nu()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> PValueVector {
        PValueVector::new(v.to_vec()).unwrap()
    }

    fn eval(spec: EstimatorSpec, p: &[f64]) -> f64 {
        Estimator::new(spec).unwrap().m0_hat(p).unwrap()
    }

    #[test]
    fn homogeneous_examples() {
        assert_eq!(eval(EstimatorSpec::storey(0.5), &[0.1, 0.2, 0.6, 0.9]), 6.0);
        assert_eq!(eval(EstimatorSpec::PcNew, &[0.0; 7]), 2.0);
        let v = eval(EstimatorSpec::poly(2.0, 0.5), &[0.6, 0.9, 0.3]);
        assert!((v - 24.0 / 7.0 * (1.0 + 0.36 + 0.81)).abs() < 1e-12);
        assert!((v - 7.44).abs() < 1e-12);
    }

    #[test]
    fn heterogeneous_examples() {
        let g = TransformFn::indicator(0.5).unwrap();
        let r = estimate_heterogeneous(&[g.clone(), g.clone()], &[0.5, 0.8], &pv(&[0.7, 0.9])).unwrap();
        assert!((r.m0_hat - 5.25).abs() < 1e-14);
        let p = [0.3, 0.7, 0.95];
        let same = estimate_heterogeneous(&vec![g.clone(); 3], &[0.5; 3], &pv(&p)).unwrap();
        assert_eq!(same.m0_hat, estimate_homogeneous(&g, &pv(&p)).m0_hat);
        let pow = TransformFn::power(1.0, 0.2).unwrap();
        let origin = estimate_heterogeneous(&[pow.clone(), g.clone()], &[0.48, 0.5], &pv(&[0.0, 0.0])).unwrap();
        assert_eq!(origin.m0_hat, 1.0 / 0.48);
        // zero constants drop out
        let dropped = estimate_heterogeneous(&[g.clone(), g.clone()], &[0.0, 0.8], &pv(&[0.9, 0.9])).unwrap();
        assert!((dropped.m0_hat - 2.5).abs() < 1e-15);
        assert!(matches!(
            estimate_heterogeneous(std::slice::from_ref(&g), &[0.0], &pv(&[0.9])),
            Err(Error::AllRescalingZero)
        ));
    }

    #[test]
    fn legacy_and_zzd() {
        assert_eq!(estimate_pc_legacy(&pv(&[0.5; 4])).m0_hat, 4.0);
        assert_eq!(estimate_pc_legacy(&pv(&[0.0; 4])).m0_hat, 0.0);
        assert_eq!(estimate_pc_legacy(&pv(&[0.9, 0.9])).m0_hat, 2.0);
        let half = estimate_pc_zzd(&pv(&[0.5; 500]), ZZD_C_500, ZZD_S_500, Some(500));
        assert!((half.m0_hat - 505.8545).abs() < 1e-9);
        assert!(half.warnings.is_empty());
        let zero = estimate_pc_zzd(&pv(&[0.0; 500]), ZZD_C_500, ZZD_S_500, Some(500));
        assert!((zero.m0_hat - 99.147482).abs() < 1e-9);
        let one = estimate_pc_zzd(&pv(&[1.0; 500]), ZZD_C_500, ZZD_S_500, Some(500));
        assert!((one.m0_hat - 505.8545).abs() < 1e-9);
        let off = estimate_pc_zzd(&pv(&[0.5; 20]), ZZD_C_500, ZZD_S_500, Some(500));
        assert_eq!(off.warnings.len(), 1);
    }

    #[test]
    fn combinations() {
        let two = |w: f64| combine(vec![(w, EstimatorSpec::storey(0.5)), (1.0 - w, EstimatorSpec::PcNew)]).unwrap();
        assert_eq!(eval(two(0.5), &[1.0]), 4.0);
        assert_eq!(eval(two(0.5), &[0.0, 0.0]), 2.0);
        let p = [0.1, 0.7, 0.55];
        assert_eq!(eval(two(1.0), &p), eval(EstimatorSpec::storey(0.5), &p));
        assert!(combine(vec![(0.5, EstimatorSpec::PcLegacy), (0.5, EstimatorSpec::PcNew)]).is_err());
        assert!(combine(vec![(0.5, EstimatorSpec::pc_zzd_500()), (0.5, EstimatorSpec::PcNew)]).is_err());
        assert!(combine(vec![(0.6, EstimatorSpec::PcNew), (0.6, EstimatorSpec::PcNew)]).is_err());
        assert!(combine(vec![(-0.5, EstimatorSpec::PcNew), (1.5, EstimatorSpec::PcNew)]).is_err());
    }

    #[test]
    fn reduction_examples() {
        let s = EstimatorSpec::storey(0.5);
        match reduce_combination(&s, &s, 0.3, 3).unwrap() {
            EstimatorSpec::Heterogeneous { gs } => {
                assert!(gs.iter().all(|g| *g == TransformFn::indicator(0.5).unwrap()))
            }
            _ => panic!(),
        }
        // ν = μ = 0.5 everywhere: κ = ε = 0.5
        let red = reduce_combination(&s, &EstimatorSpec::PcNew, 0.5, 2).unwrap();
        let EstimatorSpec::Heterogeneous { gs } = &red else {
            panic!()
        };
        for f in gs {
            match f.kind() {
                crate::transform::TransformKind::Mixture { weight, .. } => assert_eq!(*weight, 0.5),
                _ => panic!(),
            }
            assert_eq!(f.nu(), 0.5);
        }
        let combo = combine(vec![(0.5, s.clone()), (0.5, EstimatorSpec::PcNew)]).unwrap();
        for p in [[0.1, 0.9], [0.6, 0.2], [0.0, 1.0]] {
            let a = eval(combo.clone(), &p);
            let b = eval(red.clone(), &p);
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn bias_formulas() {
        let id = TransformFn::identity();
        assert_eq!(
            bias_superuniform(&id, 100, 60, 0.5, 0.2),
            bias_uniform(&id, 100, 60, 0.2)
        );
        assert_eq!(bias_uniform(&id, 50, 50, 0.3), 2.0);
        // E g(X1) for the identity at μ = 1.5 is Φ̄(1.5/√2) = 0.144422183173242 (mpmath)
        let b = bias_uniform(&id, 10_000, 6_000, 0.144_422_183_173_242_43);
        assert!((b - 1_157.377_465_385_94).abs() < 1e-8);
    }

    #[test]
    fn json_config_shapes() {
        let s: EstimatorSpec = serde_json::from_str(r#"{"kind":"poly","r":2,"lambda":0.5}"#).unwrap();
        assert_eq!(s, EstimatorSpec::poly(2.0, 0.5));
        let c: EstimatorSpec = serde_json::from_str(
            r#"{"kind":"combination","members":[{"w":0.5,"spec":{"kind":"storey","lambda":0.5}},{"w":0.5,"spec":{"kind":"pc_new"}}]}"#,
        )
        .unwrap();
        assert!(Estimator::new(c).is_ok());
        let z: EstimatorSpec = serde_json::from_str(r#"{"kind":"pc_zzd","c":1.011709,"s":98}"#).unwrap();
        assert_eq!(z, EstimatorSpec::pc_zzd_500());
        assert!(Estimator::new(serde_json::from_str(r#"{"kind":"storey","lambda":1.0}"#).unwrap()).is_err());
    }
}
