use proptest::prelude::*;

use plugin_fdr::discrete::adjust_du;
use plugin_fdr::estimators::{combine, reduce_combination, Estimator, EstimatorSpec};
use plugin_fdr::fisher::{fisher_exact, Alternative, ContingencyTable};
use plugin_fdr::procedures::bh_stepup;
use plugin_fdr::pvalues::PValueVector;

fn m0_hat(spec: EstimatorSpec, p: &[f64]) -> f64 {
    Estimator::new(spec).unwrap().m0_hat(p).unwrap()
}

fn guaranteed_specs() -> Vec<EstimatorSpec> {
    vec![
        EstimatorSpec::storey(0.5),
        EstimatorSpec::storey(0.2),
        EstimatorSpec::PcNew,
        EstimatorSpec::poly(1.0, 0.5),
        EstimatorSpec::poly(2.0, 0.5),
        EstimatorSpec::poly(0.5, 0.3),
    ]
}

fn pvalues() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..60)
}

proptest! {
    #[test]
    fn estimators_are_coordinatewise_monotone(p in pvalues(), i in any::<prop::sample::Index>(), bump in 0.0f64..1.0) {
        let i = i.index(p.len());
        let mut q = p.clone();
        q[i] = p[i] + bump * (1.0 - p[i]);
        for spec in guaranteed_specs() {
            prop_assert!(m0_hat(spec.clone(), &q) >= m0_hat(spec, &p));
        }
    }

    #[test]
    fn poly_specialisations_are_bitwise(p in pvalues(), lambda in 0.0f64..0.95) {
        let storey = m0_hat(EstimatorSpec::storey(lambda), &p);
        let poly0 = m0_hat(EstimatorSpec::poly(0.0, lambda), &p);
        prop_assert_eq!(storey.to_bits(), poly0.to_bits());
        let pc = m0_hat(EstimatorSpec::PcNew, &p);
        let poly1 = m0_hat(EstimatorSpec::poly(1.0, 0.0), &p);
        prop_assert_eq!(pc.to_bits(), poly1.to_bits());
    }

    #[test]
    fn estimates_are_at_least_one_over_nu(p in pvalues()) {
        prop_assert!(m0_hat(EstimatorSpec::storey(0.5), &p) >= 2.0);
        prop_assert!(m0_hat(EstimatorSpec::PcNew, &p) >= 2.0);
    }

    #[test]
    fn reduction_never_exceeds_combination(p in pvalues(), lambda in 0.01f64..0.99, a in 0usize..6, b in 0usize..6) {
        let specs = guaranteed_specs();
        let (s1, s2) = (specs[a].clone(), specs[b].clone());
        let combo = combine(vec![(lambda, s1.clone()), (1.0 - lambda, s2.clone())]).unwrap();
        let reduced = reduce_combination(&s1, &s2, lambda, p.len()).unwrap();
        let c = m0_hat(combo, &p);
        let r = m0_hat(reduced, &p);
        prop_assert!(r <= c * (1.0 + 1e-12), "reduced {} > combination {}", r, c);
    }

    #[test]
    fn du_never_exceeds_the_uniform_estimate(
        tables in prop::collection::vec((0u64..12, 1u64..12, 0u64..12, 1u64..12), 1..30),
        two_sided in any::<bool>(),
        which in 0usize..6,
    ) {
        let alt = if two_sided { Alternative::TwoSided } else { Alternative::Greater };
        let results: Vec<_> = tables
            .iter()
            .map(|&(a, b, c, d)| fisher_exact(&ContingencyTable::new(a, b, c, d).unwrap(), alt).unwrap())
            .collect();
        let pv = PValueVector::new(results.iter().map(|r| r.p).collect())
            .unwrap()
            .with_supports(results.iter().map(|r| r.support.clone()).collect())
            .unwrap();
        let spec = guaranteed_specs()[which].clone();
        let g = spec.homogeneous_transform().unwrap();
        let du = adjust_du(&g, &pv).unwrap().m0_hat;
        let base = m0_hat(spec, pv.values());
        prop_assert!(du <= base * (1.0 + 1e-12), "du {} > base {}", du, base);
    }

    #[test]
    fn fet_p_values_are_superuniform(
        (a, b, c, d) in (0u64..20, 0u64..20, 0u64..20, 0u64..20).prop_filter("non-empty", |t| t.0 + t.1 + t.2 + t.3 > 0),
        two_sided in any::<bool>(),
    ) {
        let alt = if two_sided { Alternative::TwoSided } else { Alternative::Greater };
        let r = fisher_exact(&ContingencyTable::new(a, b, c, d).unwrap(), alt).unwrap();
        let s = &r.support;
        for (&atom, &cdf) in s.atoms().iter().zip(s.cdf()) {
            prop_assert!(cdf <= atom);
        }
        prop_assert_eq!(*s.atoms().last().unwrap(), 1.0);
        prop_assert!(s.atom_index(r.p).is_some());
    }

    #[test]
    fn bh_rejections_shrink_with_the_denominator(p in pvalues(), alpha in 0.001f64..0.5, d1 in 0.5f64..100.0, extra in 0.0f64..100.0) {
        let small = bh_stepup(&p, alpha, d1).unwrap();
        let large = bh_stepup(&p, alpha, d1 + extra).unwrap();
        prop_assert!(large.k_hat <= small.k_hat);
        for (l, s) in large.rejected.iter().zip(&small.rejected) {
            prop_assert!(!l || *s);
        }
        prop_assert_eq!(small.rejected.iter().filter(|&&r| r).count(), small.k_hat);
    }
}
