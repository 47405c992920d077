use std::f64::consts::LN_2;

use proptest::prelude::*;
use zetaglue::cylinder::{cylinder_log_det, cylinder_log_det_2d, BoundaryCondition::*, CylinderOp};
use zetaglue::dtn::{dtn_eigenvalue, DtnFamily};
use zetaglue::glue::{check_gluing, exponential_limit, inverse_power_limit, GeometryConfig, Tolerances};
use zetaglue::spectra::{CrossSection, ExplicitSpectrum};
use zetaglue::symbols::{ricatti_expansion, TrigPotential};
use zetaglue::zeta::{log_det_shifted, zeta_invariants, RayShift};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn scaled_linear(offset: f64, scale: f64, multiplicity: u32) -> CrossSection {
    CrossSection::Explicit {
        spectrum: ExplicitSpectrum::Linear {
            offset,
            scale,
            multiplicity,
        },
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn interval_gluing_is_exact(a in 0.05f64..20.0, b in 0.05f64..20.0) {
        let rep = check_gluing(&GeometryConfig::new(CrossSection::Point, a, b), &Tolerances::default()).unwrap();
        let row = rep.row("gluing").unwrap();
        prop_assert!(row.residual <= 1e-10, "{row:?}");
        prop_assert!((row.rhs - (-LN_2 + (1.0 / a + 1.0 / b).ln())).abs() <= 1e-10);
    }

    #[test]
    fn scaling_and_multiplicity(beta in 0.1f64..3.0, scale in 0.2f64..5.0, mult in 1u32..4) {
        let base = zeta_invariants(&CrossSection::linear(beta), false).unwrap();
        let z = zeta_invariants(&scaled_linear(beta, scale, mult), false).unwrap();
        let m = mult as f64;
        prop_assert!((z.zeta0 - m * base.zeta0).abs() < 1e-10);
        prop_assert!((z.log_det - m * (base.log_det + base.zeta0 * scale.ln())).abs() < 1e-9, "{z:?}");
    }

    #[test]
    fn direct_sums_add(beta in 0.1f64..3.0, ell in 0.5f64..10.0, alpha in 0.05f64..0.95) {
        let parts = vec![CrossSection::linear(beta), CrossSection::circle(ell, alpha)];
        let sum = zeta_invariants(&CrossSection::DirectSum { parts: parts.clone() }, false).unwrap();
        let each: Vec<_> = parts.iter().map(|p| zeta_invariants(p, false).unwrap()).collect();
        prop_assert!((sum.zeta0 - each[0].zeta0 - each[1].zeta0).abs() < 1e-10);
        prop_assert!((sum.log_det - each[0].log_det - each[1].log_det).abs() < 1e-9);
    }

    #[test]
    fn conjugate_rays(theta in 0.05f64..3.0, t in 0.1f64..20.0, alpha in 0.0f64..0.5) {
        for model in [CrossSection::linear(0.25), CrossSection::circle(3.0, alpha)] {
            let up = log_det_shifted(&model, &RayShift::new(theta, t).unwrap()).unwrap();
            let down = log_det_shifted(&model, &RayShift::new(-theta, t).unwrap()).unwrap();
            prop_assert!((up - down.conj()).norm() < 1e-9, "{up} vs {down}");
        }
    }

    #[test]
    fn one_sided_maps_are_positive_and_decreasing(l in 0.05f64..10.0, lambda in 0.0f64..400.0, r in 0.1f64..20.0) {
        let q = |len: f64| dtn_eigenvalue(&DtnFamily::q_cylinder(len), lambda).unwrap().det().re;
        prop_assert!(q(l) > 0.0);
        prop_assert!(q(2.0 * l) <= q(l) * (1.0 + 1e-12));
        prop_assert!(q(l) >= lambda.sqrt() * (1.0 - 1e-12));
        let collar = dtn_eigenvalue(&DtnFamily::RNr { r }, lambda).unwrap().det().re;
        prop_assert!(collar > 0.0);
    }

    #[test]
    fn exponential_extrapolation(limit in -5.0f64..5.0, amp in 0.1f64..3.0, rate in 0.2f64..2.0) {
        let rs = [1.0, 2.0, 4.0, 8.0];
        let vs: Vec<f64> = rs.iter().map(|r| limit + amp * (-rate * r).exp()).collect();
        let e = exponential_limit(&rs, &vs);
        prop_assert!(!e.diverged && e.monotone);
        prop_assert!((e.value - limit).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn inverse_power_extrapolation(limit in -5.0f64..5.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let rs = [8.0, 16.0, 32.0, 64.0, 128.0];
        let vs: Vec<f64> = rs.iter().map(|r| limit + c1 / r + c2 / (r * r)).collect();
        prop_assert!((inverse_power_limit(&rs, &vs).value - limit).abs() < 1e-10);
    }

    #[test]
    fn symbols_are_homogeneous(
        c0 in -2.0f64..2.0, c1 in -1.0f64..1.0, s2 in -1.0f64..1.0,
        y in 0.0f64..6.3, xi in -5.0f64..5.0, t in 0.1f64..4.0, scale in 0.3f64..4.0,
    ) {
        let v = TrigPotential { constant: c0, cos: vec![c1], sin: vec![0.0, s2] };
        let e = ricatti_expansion(&v, 4).unwrap();
        for (j, q) in e.orders.iter().enumerate() {
            let order = 1 - j as i32;
            let base = q.eval(&v, y, xi, t);
            let scaled = q.eval(&v, y, scale * xi, scale * scale * t);
            prop_assert!((scaled - base * scale.powi(order)).norm() <= 1e-11 * (1.0 + base.norm()));
        }
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn factorized_matches_double_spectrum(
        ell in 1.0f64..8.0, alpha in 0.0f64..1.0, length in 0.3f64..3.0, t in 0.0f64..2.0, neumann in any::<bool>(),
    ) {
        let right = if neumann { Neumann } else { Dirichlet };
        let op = CylinderOp::new(CrossSection::circle(ell, alpha), length, Dirichlet, right)
            .with_shift(RayShift::real(t).unwrap());
        let f = cylinder_log_det(&op).unwrap();
        let d = cylinder_log_det_2d(&op).unwrap();
        prop_assert!((f.value - d.value).norm() < 1e-8, "{f:?} vs {d:?}");
    }
}
