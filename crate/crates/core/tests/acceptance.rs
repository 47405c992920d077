//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 9 compares the perturbation estimate `Tr(K) / (2 lambda_0)` with
//! the actual determinant shift on the circle; the shift is twice the
//! estimate, so the line reads FAIL. The run exits nonzero if any other
//! criterion fails or if criterion 9 fails in any other way.

mod common;

use std::f64::consts::{FRAC_PI_4, LN_2, PI};
use std::process::ExitCode;

use num_complex::Complex64;
use num_rational::Ratio;
use zetaglue::cylinder::{cylinder_log_det, cylinder_log_det_2d, BoundaryCondition, CylinderOp};
use zetaglue::dtn::{g_r_map, perturbation_bound, twice_root};
use zetaglue::glue::{
    adiabatic_limit, check_gluing, check_power_gluing_m2, default_r_grid, torsion_report, GeometryConfig, Identity,
    Tolerances, DEFAULT_R_GRID,
};
use zetaglue::spectra::{heat_expansion, kernel_dim, CrossSection, Eigenvalue};
use zetaglue::symbols::{ricatti_expansion, smoothing_decay_check, sqrt_taylor, Gaussian, SmoothingWeight, Symbol, SymbolTerm, TrigPotential};
use zetaglue::zeta::{asymptotic_zero_coeff, log_det_shifted, log_grid, zeta_invariants, zeta_shifted, FitBasis, RayShift};

use common::TAU;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let l = 0.5 + 1.5 * i as f64;
        for j in 1..=10 {
            let c = l * j as f64 / 11.0;
            let rep = check_gluing(&GeometryConfig::new(CrossSection::Point, c, l - c), &tol()).map_err(err)?;
            let row = rep.row("gluing").ok_or("missing gluing row")?;
            let lhs = (2.0 * l).ln() - (2.0 * c).ln() - (2.0 * (l - c)).ln();
            let rhs = -LN_2 + (1.0 / c + 1.0 / (l - c)).ln();
            worst = worst
                .max(row.residual)
                .max((row.lhs - lhs).abs())
                .max((row.rhs - rhs).abs());
        }
    }
    check(worst <= 1e-10, format!("100 pairs, worst residual {worst:.2e} (<= 1e-10)"))
}

fn gluing_residual(model: CrossSection) -> Result<(f64, f64), String> {
    let rep = check_gluing(&GeometryConfig::new(model, 1.0, 1.0), &tol()).map_err(err)?;
    let row = rep.row("gluing").ok_or("missing gluing row")?;
    Ok((row.residual, row.lhs))
}

fn criterion_2() -> Outcome {
    let (res, _) = gluing_residual(CrossSection::circle(TAU, 0.0))?;
    check(res <= 1e-6, format!("circle 2pi, lengths 1+1, residual {res:.2e} (<= 1e-6)"))
}

fn criterion_3() -> Outcome {
    let model = CrossSection::linear(0.25);
    let z = zeta_invariants(&model, true).map_err(err)?;
    let constant = z.zeta0 + kernel_dim(&model) as f64;
    let (res, _) = gluing_residual(model)?;
    check(
        res <= 1e-6 && (constant - 0.25).abs() <= 1e-10,
        format!("n + 1/4, zeta(0) + dim ker = {constant:.12}, residual {res:.2e} (<= 1e-6)"),
    )
}

fn criterion_4() -> Outcome {
    let cfg = GeometryConfig::new(CrossSection::Point, 1.0, 1.0);
    let rep = check_power_gluing_m2(&cfg, &tol()).map_err(err)?;
    let row = rep.row("power-gluing").ok_or("missing row")?;
    let z = zeta_invariants(&CrossSection::Point, true).map_err(err)?;
    let sum_c = 2.0 * LN_2 * (z.zeta0 + 1.0);
    check(
        row.residual <= 1e-8 && rep.all_pass() && (sum_c - 2.0 * LN_2).abs() <= 1e-12,
        format!("point, t = 1, residual {:.2e} (<= 1e-8), sum of constants {sum_c:.12}", row.residual),
    )
}

/// Constant term of a large-`t` fit; heat powers start at `first / 2` in steps of `step / 2`.
fn fit(samples: &[(f64, Complex64)], first: i64, step: i64, count: usize) -> Result<Complex64, String> {
    let basis = FitBasis::from_heat_grid(Ratio::new(first, 2), Ratio::new(step, 2), count);
    Ok(asymptotic_zero_coeff(samples, &basis).map_err(err)?.pi0)
}

fn criterion_5() -> Outcome {
    let ts = log_grid(10.0, 1e4, 40);
    let circle = CrossSection::circle(TAU, 0.0);
    let samples: Vec<(f64, Complex64)> = ts
        .iter()
        .map(|&t| Ok((t, log_det_shifted(&circle, &RayShift::real(t).map_err(err)?).map_err(err)?)))
        .collect::<Result<_, String>>()?;
    let pi_circle = fit(&samples, -1, 1, 3)?;

    let linear = CrossSection::linear(0.25);
    let samples: Vec<(f64, Complex64)> = ts
        .iter()
        .map(|&t| Ok((t, zeta_shifted(&linear, &RayShift::real(t).map_err(err)?, false).map_err(err)?.zeta0)))
        .collect::<Result<_, String>>()?;
    let pi_zeta = fit(&samples, -2, 2, 4)?;

    let mut computed = Vec::new();
    let mut oracle = Vec::new();
    let mut agreement: f64 = 0.0;
    for &t in &ts {
        let shift = RayShift::new(FRAC_PI_4, t).map_err(err)?;
        let v = log_det_shifted(&linear, &shift).map_err(err)?;
        let o = common::linear_log_det_shifted(0.25, shift.value());
        agreement = agreement.max((v - o).norm());
        computed.push((t, v));
        oracle.push((t, o));
    }
    let pi_ray = fit(&computed, -2, 2, 5)?;
    let pi_ray_oracle = fit(&oracle, -2, 2, 5)?;
    let want = Complex64::new(0.0, FRAC_PI_4 * 0.25);

    check(
        pi_circle.norm() <= 1e-6
            && (pi_zeta - 0.25).norm() <= 1e-6
            && (pi_ray - want).norm() <= 1e-5
            && (pi_ray_oracle - want).norm() <= 1e-5
            && agreement <= 1e-8,
        format!(
            "circle pi0 {:.2e}; zeta pi0 {:.9}; ray pi0 {:.9}i (oracle fit {:.9}i, want {:.9}i, pointwise {agreement:.1e})",
            pi_circle.norm(),
            pi_zeta.re,
            pi_ray.im,
            pi_ray_oracle.im,
            want.im
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = GeometryConfig::new(CrossSection::Point, 1.0, 1.0);
    let rep = adiabatic_limit(&cfg, &DEFAULT_R_GRID, Identity::CollarDtn, &tol()).map_err(err)?;
    let worst = rep.rows[0]
        .samples
        .iter()
        .map(|s| (s.value - LN_2).abs())
        .fold(0.0, f64::max);
    check(worst <= 1e-12, format!("r in {{1, 2, 4, 8}}, worst |value - log 2| {worst:.2e} (<= 1e-12)"))
}

fn criterion_7() -> Outcome {
    let model = CrossSection::circle(TAU, 0.0);
    let cfg = GeometryConfig::new(model.clone(), 1.0, 1.0);
    let grid = default_r_grid(Identity::StretchedGluing, &model);
    let rep = adiabatic_limit(&cfg, &grid, Identity::StretchedGluing, &tol()).map_err(err)?;
    let row = &rep.rows[0];
    let ex = row.extrapolation.ok_or("no extrapolation")?;
    let diff = (ex.value - TAU.ln()).abs();
    check(
        diff <= 1e-4 && ex.monotone,
        format!("limit {:.9} vs log 2pi, diff {diff:.2e} (<= 1e-4), residuals decreasing: {}", ex.value, ex.monotone),
    )
}

fn criterion_8() -> Outcome {
    let cfg = GeometryConfig::new(CrossSection::circle(TAU, 0.0), 1.0, 1.0);
    let rep = adiabatic_limit(&cfg, &DEFAULT_R_GRID, Identity::OneSidedDtn, &tol()).map_err(err)?;
    let s = &rep.rows[0].samples;
    let (r4, r8) = (s[2].residual, s[3].residual);
    check(
        r8 <= 1e-5 && r4 >= 5.0 * r8,
        format!("r = 4: {r4:.2e}, r = 8: {r8:.2e} (<= 1e-5), ratio {:.1} (>= 5)", r4 / r8),
    )
}

/// `Ok` carries the expected failure; `Err` any other outcome.
fn criterion_9() -> Result<(bool, String), String> {
    let circle = CrossSection::circle(TAU, 0.0);
    let a = twice_root(RayShift::zero());
    let mut lines = Vec::new();
    let mut bound_holds = true;
    let mut ratios = Vec::new();
    let mut actuals = Vec::new();
    for r in [2.0, 3.0, 4.0, 6.0, 8.0] {
        let p = perturbation_bound(&a, &g_r_map(r).map_err(err)?, &circle).map_err(err)?;
        if r <= 4.0 {
            bound_holds &= p.actual <= p.bound;
            ratios.push(p.actual / p.bound);
            lines.push(format!("r={r}: actual {:.3e}, bound {:.3e}", p.actual, p.bound));
        }
        actuals.push(p.actual);
    }
    let to_zero = actuals.windows(2).all(|w| w[1] < w[0]) && actuals[actuals.len() - 1] < 1e-6;
    let detail = format!(
        "{}; tends to 0: {to_zero}; actual/bound {:?}",
        lines.join(", "),
        ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
    );
    let documented = !bound_holds && to_zero && ratios.iter().all(|x| (1.9..=2.01).contains(x));
    if bound_holds && to_zero {
        Ok((true, detail))
    } else if documented {
        Ok((false, detail))
    } else {
        Err(detail)
    }
}

fn term(re: (i64, i64), im: (i64, i64), xi: u32, root: i32, v: Vec<u32>) -> SymbolTerm {
    let r = |(n, d): (i64, i64)| num_rational::BigRational::new(n.into(), d.into());
    SymbolTerm::new(Gaussian::new(r(re), r(im)), xi, root, v)
}

fn criterion_10() -> Outcome {
    let v = TrigPotential {
        constant: 0.3,
        cos: vec![0.5, 0.0, -0.2],
        sin: vec![0.0, 1.0],
    };
    let e = ricatti_expansion(&v, 3).map_err(err)?;
    let closed = e.order(1).is_zero()
        && *e.order(2) == Symbol::from_terms([term((1, 2), (0, 1), 0, 1, vec![0])])
        && *e.order(3) == Symbol::from_terms([term((0, 1), (1, 4), 1, 3, vec![1])]);
    let taylor = (1..=4).all(|k| {
        ricatti_expansion(&TrigPotential::constant(1.7), k).map(|e| e == sqrt_taylor(k)).unwrap_or(false)
    });
    let circle = CrossSection::circle(TAU, 0.0);
    let rep = smoothing_decay_check(&circle, 1.0, 1.0, 400.0, 5, SmoothingWeight::Frequency).map_err(err)?;
    let top = rep.orders.last().ok_or("no orders")?;
    let diag = smoothing_decay_check(&circle, 1.0, 1.0, 400.0, 5, SmoothingWeight::Eigenvalue).map_err(err)?;
    let diag_top = diag.orders.last().ok_or("no orders")?;
    check(
        closed && taylor && top.sup_lambda < 10.0 && top.decreasing_after,
        format!(
            "closed forms {closed}, Taylor through K = 4 {taylor}, (1+sqrt(lambda))^5 sup {:.3e} at lambda = {} (< 10); \
             (1+lambda)^5 sup at lambda = {}",
            top.sup, top.sup_lambda, diag_top.sup_lambda
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut cfg = GeometryConfig::new(CrossSection::circle(TAU, 0.5), 1.0, 2.0);
    cfg.form_grading = true;
    let rep = torsion_report(&cfg, &DEFAULT_R_GRID, &tol()).map_err(err)?;
    let mut worst: f64 = 0.0;
    for name in [
        "absolute-dirichlet[q=0]",
        "absolute-dirichlet[q=1]",
        "relative-dirichlet[q=1]",
        "relative-dirichlet[q=2]",
    ] {
        let row = rep.row(name).ok_or(format!("missing {name}"))?;
        let value = row.extrapolation.map(|e| e.value).unwrap_or(row.lhs);
        worst = worst.max((value - LN_2).abs());
    }
    let torsion = rep.row("torsion-abs-rel").ok_or("missing torsion row")?;
    let tv = torsion.extrapolation.map(|e| e.value).unwrap_or(torsion.lhs);
    let split = rep.row("closed-split-torsion").ok_or("missing split row")?;
    let split_rows = rep.rows.iter().filter(|r| r.identity.starts_with("closed-split")).all(|r| r.residual <= 1e-3);
    check(
        worst <= 1e-3 && (tv + LN_2).abs() <= 1e-3 && split_rows && rep.all_pass(),
        format!(
            "per-degree limits within {worst:.2e} of log 2; log tau_abs - log tau_rel = {tv:.7} (-log 2); \
             closed split residual {:.2e}; {} rows",
            split.residual,
            rep.rows.len()
        ),
    )
}

fn models() -> Vec<CrossSection> {
    vec![
        CrossSection::Point,
        CrossSection::circle(TAU, 0.0),
        CrossSection::circle(TAU, 0.5),
        CrossSection::circle(3.0, 0.2),
        CrossSection::linear(0.25),
        CrossSection::finite(vec![Eigenvalue::new(0.0, 1), Eigenvalue::new(1.5, 2), Eigenvalue::new(4.0, 1)]),
    ]
}

fn criterion_12() -> Outcome {
    use BoundaryCondition::{Dirichlet, Neumann};
    let shifts = [
        RayShift::zero(),
        RayShift::real(0.7).map_err(err)?,
        RayShift::new(FRAC_PI_4, 1.3).map_err(err)?,
        RayShift::new(0.75 * PI, 0.9).map_err(err)?,
    ];
    let mut route: f64 = 0.0;
    let mut heat: f64 = 0.0;
    let mut cases = 0;
    for model in models() {
        for (right, shift) in [Dirichlet, Neumann].into_iter().flat_map(|bc| shifts.iter().map(move |s| (bc, *s))) {
            let op = CylinderOp::new(model.clone(), 1.3, Dirichlet, right).with_shift(shift);
            let f = cylinder_log_det(&op).map_err(err)?;
            let d = cylinder_log_det_2d(&op).map_err(err)?;
            route = route.max((f.value - d.value).norm());
            cases += 1;
        }
        let z = zeta_invariants(&model, true).map_err(err)?;
        let c = heat_expansion(&model).map_err(err)?.constant();
        heat = heat.max((c - z.zeta0 - kernel_dim(&model) as f64).abs());
    }
    check(
        route <= 1e-8 && heat <= 1e-10,
        format!("{cases} cylinder cases, worst route gap {route:.2e} (<= 1e-8); heat constant gap {heat:.2e} (<= 1e-10)"),
    )
}

fn main() -> ExitCode {
    let plain: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut unexpected = 0;
    let report = |n: u32, pass: bool, detail: &str| println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    for (n, f) in plain {
        if n == 10 {
            match criterion_9() {
                Ok((pass, detail)) => report(9, pass, &format!("{detail}{}", if pass { "" } else { " (expected)" })),
                Err(detail) => {
                    unexpected += 1;
                    report(9, false, &detail);
                }
            }
        }
        match f() {
            Ok(detail) => report(n, true, &detail),
            Err(detail) => {
                unexpected += 1;
                report(n, false, &detail);
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
