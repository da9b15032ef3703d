use conic_geodesic::estimates::{holder_seminorm, legendre_oracle};
use conic_geodesic::field::{amgm_gap, geodesic_operator, linearized_apply, ma_residual, PotentialGrid, ResidualForm};
use conic_geodesic::geometry::{conical_potential, logistic, BackgroundGeometry, DivisorData};
use conic_geodesic::solver::BoundarySpec;
use conic_geodesic::{Rhs, WeightSpec};
use proptest::prelude::*;

fn geo() -> BackgroundGeometry {
    BackgroundGeometry::new(8.0, 33).unwrap()
}

/// `a t² + b σ(u) t + c σ(u)`: admissible whenever `a` dominates `b²`.
fn model(a: f64, b: f64, c: f64) -> PotentialGrid {
    PotentialGrid::from_fn(geo(), 9, |u, t| a * t * t + b * logistic(u) * t + c * logistic(u)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn swapping_the_divisor_mirrors_the_profile(b0 in 0.2f64..1.0, b1 in 0.2f64..1.0, c in 0.0f64..0.2, u in -12.0f64..12.0) {
        let d = DivisorData::new(b0, b1, c).unwrap();
        let lhs = conical_potential(&d.swapped(), u);
        let rhs = conical_potential(&d, -u);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn product_and_determinant_residuals_agree(a in 1.0f64..3.0, b in -0.5f64..0.5, c in -0.1f64..0.1, eps in 1e-4f64..1e-1) {
        let g = model(a, b, c);
        let rhs = Rhs::new(eps, WeightSpec::constant(1.0, 1.0).unwrap());
        let p = ma_residual(&g, &rhs, ResidualForm::Product).unwrap();
        let d = ma_residual(&g, &rhs, ResidualForm::Determinant).unwrap();
        let worst = (&p - &d).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn linearization_identities(a in 1.0f64..3.0, b in -0.5f64..0.5, c in -0.1f64..0.1) {
        let g = model(a, b, c);
        let t2 = PotentialGrid::from_fn(geo(), 9, |_, t| t * t).unwrap().values;
        for i in 1..g.n_u() - 1 {
            for j in 1..g.n_t - 1 {
                let gop = geodesic_operator(&g, i, j).unwrap();
                let d = linearized_apply(&g, &t2, i, j).unwrap();
                prop_assert!((d * gop - 2.0).abs() < 1e-9);
                prop_assert!(amgm_gap(&g, i, j).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn holder_seminorm_is_absolutely_homogeneous(a in 1.0f64..3.0, b in -0.5f64..0.5, s in -4.0f64..4.0, delta in 0.2f64..1.0) {
        let g = model(a, b, 0.05);
        let mut h = g.clone();
        h.values.mapv_inplace(|v| s * v);
        let x = holder_seminorm(&g, delta, None).unwrap();
        let y = holder_seminorm(&h, delta, None).unwrap();
        prop_assert!((y - s.abs() * x).abs() <= 1e-10 * (1.0 + y));
    }

    #[test]
    fn csv_round_trip(a in -3.0f64..3.0, b in -1.0f64..1.0) {
        let g = model(a, b, 1e-7 * a);
        let back = PotentialGrid::from_csv(&g.to_csv()).unwrap();
        prop_assert_eq!(back.values, g.values);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn legendre_oracle_of_a_shift_is_linear(shift in -5.0f64..5.0) {
        let g = geo();
        let oracle = legendre_oracle(&BoundarySpec::flat(), &BoundarySpec::flat().shifted(shift), 10, &g, 9, 64).unwrap();
        let exact = PotentialGrid::from_fn(g, 9, |_, t| shift * t).unwrap();
        prop_assert!(oracle.max_abs_diff(&exact).unwrap() < 1e-9);
    }
}
