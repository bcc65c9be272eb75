//! Exact bias and variance of homogeneous estimators in the Gaussian
//! one-sided setting.
//!
//! With `X1 = g(p)` for an alternative p-value, `m̂0 = (1 + Σ g(p_i)) / ν`
//! has bias `(1 + m1·E X1) / ν` and variance
//! `(m0·Var X0 + m1·Var X1) / ν²`. Alternative moments are integrals over
//! the test statistic `x ~ N(μ, 1)`, split at the preimages of the jumps
//! of `g`, which keeps the integrand smooth near `p = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate_pieces;
use crate::special::{norm_isf, norm_pdf, norm_quantile, norm_sf};
use crate::transform::TransformFn;

/// Half-width of the integration window around `μ`; the normal mass
/// outside is below `1e-32`.
const WINDOW: f64 = 12.0;
const TOLERANCE: f64 = 1e-11;

/// Moments and error decomposition of one estimator at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasVariance {
    pub ex0: f64,
    pub var0: f64,
    pub ex1: f64,
    pub var1: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
}

/// Density of an alternative p-value, `exp(−μ Φ^{-1}(t) − μ²/2)`.
pub fn alternative_density(t: f64, mu: f64) -> f64 {
    match norm_quantile(t) {
        Some(z) => (-mu * z - 0.5 * mu * mu).exp(),
        None => 0.0,
    }
}

/// `E f(p)` for an alternative p-value with signal `mu`; `jumps` lists
/// points of `(0, 1)` where `f` is discontinuous.
pub fn expect_under_alternative<F: Fn(f64) -> f64>(f: F, mu: f64, jumps: &[f64]) -> Result<f64> {
    let (lo, hi) = (mu - WINDOW, mu + WINDOW);
    let mut points = vec![lo];
    let mut cuts: Vec<f64> = jumps
        .iter()
        .filter_map(|&u| norm_isf(u))
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    points.extend(cuts);
    points.push(hi);
    integrate_pieces(|x| f(norm_sf(x)) * norm_pdf(x - mu), &points, TOLERANCE)
}

/// Bias, variance and MSE of `(1 + Σ g(p_i)) / ν` with `m0` uniform nulls
/// and `m − m0` alternatives at signal `mu`.
pub fn closed_form_bias_var(g: &TransformFn, mu: f64, m: usize, m0: usize) -> Result<BiasVariance> {
    if m0 > m {
        return Err(Error::InvalidConfig(format!("m0 = {m0} exceeds m = {m}")));
    }
    let nu = g.nu();
    let second0 = g.uniform_second_moment()?;
    let jumps = g.jumps();
    let ex1 = expect_under_alternative(|u| g.eval(u), mu, &jumps)?;
    let second1 = expect_under_alternative(|u| g.eval(u).powi(2), mu, &jumps)?;
    let var0 = second0 - nu * nu;
    let var1 = second1 - ex1 * ex1;
    let m1 = (m - m0) as f64;
    let bias = (1.0 + m1 * ex1) / nu;
    let variance = (m0 as f64 * var0 + m1 * var1) / (nu * nu);
    Ok(BiasVariance {
        ex0: nu,
        var0,
        ex1,
        var1,
        bias,
        variance,
        mse: bias * bias + variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    const EX1_IDENTITY_MU_1_5: f64 = 0.14442218317324243;

    #[test]
    fn identity_moments() {
        let bv = closed_form_bias_var(&TransformFn::identity(), 1.5, 10_000, 6_000).unwrap();
        assert!((bv.var0 - 1.0 / 12.0).abs() < 1e-15);
        assert!((bv.ex1 - EX1_IDENTITY_MU_1_5).abs() < 1e-10);
        // closed form P(Z > X) with Z − X ~ N(−μ, 2)
        assert!((bv.ex1 - norm_sf(1.5 / 2f64.sqrt())).abs() < 1e-10);
        assert!((bv.bias - 1157.37746538594).abs() < 1e-7);
        assert!((bv.variance - 2540.77691111432).abs() < 1e-7);
    }

    #[test]
    fn grid_point_mse_values() {
        let cases = [
            (TransformFn::indicator(0.5).unwrap(), 294784.271474817),
            (TransformFn::identity(), 1342063.3742943),
            (TransformFn::power(1.0, 0.5).unwrap(), 228334.792306526),
            (TransformFn::power(2.0, 0.5).unwrap(), 176952.562513703),
        ];
        for (g, mse) in cases {
            let bv = closed_form_bias_var(&g, 1.5, 10_000, 6_000).unwrap();
            assert!((bv.mse - mse).abs() < 1e-8 * mse, "{}: {} vs {mse}", g.label(), bv.mse);
        }
    }

    #[test]
    fn strong_signal_limit() {
        let g = TransformFn::indicator(0.5).unwrap();
        let bv = closed_form_bias_var(&g, 40.0, 100, 50).unwrap();
        assert!((bv.bias - 2.0).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        for mu in [0.5, 1.5, 3.0] {
            let via_x = expect_under_alternative(|_| 1.0, mu, &[]).unwrap();
            assert!((via_x - 1.0).abs() < 1e-10);
        }
        // directly in t the density blows up at 0; fine for moderate signal
        for mu in [0.5, 1.5] {
            let via_t = integrate(|t| alternative_density(t, mu), 0.0, 1.0, 1e-10).unwrap();
            assert!((via_t - 1.0).abs() < 1e-8, "mu = {mu}: {via_t}");
        }
        let mean = integrate(|t| t * alternative_density(t, 1.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((mean - EX1_IDENTITY_MU_1_5).abs() < 1e-8);
    }
}
