//! Both sides of the gluing, stretched-collar and torsion identities on
//! product cylinders, with r-grid extrapolation and pass/fail reports.

use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{
    cylinder_log_det, cylinder_log_det_2d, form_cylinder_log_det, BoundaryCondition, CylinderOp, LogDet,
};
use crate::dtn::{dtn_log_det, dtn_log_det_shifted, min_block_eigen, plus_root, q_cylinder, DtnFamily, Expanded};
use crate::error::{invalid, Error, Result};
use crate::spectra::{CrossSection, SpectralModel};
use crate::zeta::{log_det_multiplier, zeta_invariants, RayShift};

use BoundaryCondition::{Absolute, Dirichlet, Neumann, Relative};

pub const DEFAULT_R_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Grid for sequences converging like powers of `1/r`.
pub const INVERSE_POWER_R_GRID: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
/// Agreement required between the two cylinder determinant routes.
pub const ROUTE_TOL: f64 = 1e-8;

const GATE_CUTOFF: f64 = 64.0;
const GATE_CUTOFF_MAX: f64 = 1e6;

/// Tolerances by error source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "exact_tol")]
    pub exact: f64,
    #[serde(default = "fixed_tol")]
    pub fixed: f64,
    #[serde(default = "limit_tol")]
    pub limit: f64,
}

fn exact_tol() -> f64 {
    1e-10
}
fn fixed_tol() -> f64 {
    1e-6
}
fn limit_tol() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: exact_tol(),
            fixed: fixed_tol(),
            limit: limit_tol(),
        }
    }
}

/// `M = M_1 ∪_Y M_2` with `M_1 = [0, a] x Y`, `M_2 = [0, b] x Y`, Dirichlet
/// at the far ends. Stretching inserts a collar `[-r, r] x Y` at the cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub cross_section: CrossSection,
    pub a: f64,
    pub b: f64,
    /// Modulus of the complex shifts in the power gluing check.
    #[serde(default = "one")]
    pub t: f64,
    /// Treat `cross_section` as the base of a form-graded bundle.
    #[serde(default)]
    pub form_grading: bool,
}

fn one() -> f64 {
    1.0
}

impl GeometryConfig {
    pub fn new(cross_section: CrossSection, a: f64, b: f64) -> Self {
        Self {
            cross_section,
            a,
            b,
            t: 1.0,
            form_grading: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("t", self.t)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if matches!(self.cross_section, CrossSection::FormGraded { .. }) {
            return invalid("give the base cross-section and set form_grading");
        }
        self.cross_section.validate()
    }

    fn scalar(&self) -> Result<()> {
        self.validate()?;
        if self.form_grading {
            return Err(Error::Unsupported("this experiment is scalar; unset form_grading".into()));
        }
        Ok(())
    }
}

/// One r-grid evaluation of a limit expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub value: f64,
    pub value_im: f64,
    pub residual: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DecayFit {
    /// `v_inf + c e^(-rate r)`; `tail` is the fitted correction at the last r.
    Exponential { rate: f64, tail: f64 },
    /// Polynomial in `1/r` through all samples.
    InversePowers { order: usize },
    /// Samples already agree to rounding.
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub fit: DecayFit,
    pub value: f64,
    pub estimate_error: f64,
    /// Residuals against the target never increase along the grid.
    pub monotone: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub identity: String,
    pub r: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_im: f64,
    pub rhs_im: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub error_bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Sample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolation: Option<Extrapolation>,
}

impl ReportRow {
    pub fn new(identity: impl Into<String>, r: Option<f64>, lhs: LogDet, rhs: LogDet, tolerance: f64) -> Self {
        let residual = (lhs.value - rhs.value).norm();
        Self {
            identity: identity.into(),
            r,
            lhs: lhs.value.re,
            rhs: rhs.value.re,
            lhs_im: lhs.value.im,
            rhs_im: rhs.value.im,
            residual,
            tolerance,
            error_bound: lhs.error_bound + rhs.error_bound,
            pass: residual <= tolerance,
            samples: Vec::new(),
            extrapolation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, identity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.identity == identity)
    }
}

fn real(x: f64) -> LogDet {
    LogDet::exact(Complex64::new(x, 0.0))
}

fn cyl(model: &CrossSection, length: f64, right: BoundaryCondition, shift: RayShift) -> CylinderOp {
    CylinderOp::new(model.clone(), length, Dirichlet, right).with_shift(shift)
}

/// `-log 2 (zeta_Y(0) + dim ker)`, the local gluing constant per factor.
fn gluing_constant(model: &CrossSection) -> Result<LogDet> {
    let z = zeta_invariants(model, true)?;
    Ok(LogDet {
        value: Complex64::new(-LN_2 * (z.zeta0 + model.kernel_dim() as f64), 0.0),
        error_bound: LN_2 * z.error_bound,
    })
}

fn join_family(a: f64, b: f64) -> DtnFamily {
    DtnFamily::RJoin {
        left: Box::new(DtnFamily::q_cylinder(a)),
        right: Box::new(DtnFamily::q_cylinder(b)),
    }
}

fn multiplier_det(m: crate::zeta::MultiplierLogDet) -> LogDet {
    LogDet {
        value: m.log_det,
        error_bound: m.error_bound,
    }
}

/// Cut `[0, a + b] x Y` at `u = a`: determinants on the pieces against the
/// gluing constant plus `log Det R`.
pub fn check_gluing(cfg: &GeometryConfig, tol: &Tolerances) -> Result<Report> {
    cfg.scalar()?;
    let model = &cfg.cross_section;
    let zero = RayShift::zero();
    let lengths = [cfg.a + cfg.b, cfg.a, cfg.b];
    let pieces: Vec<(LogDet, LogDet)> = lengths
        .par_iter()
        .map(|&l| {
            let op = cyl(model, l, Dirichlet, zero);
            Ok((cylinder_log_det_2d(&op)?, cylinder_log_det(&op)?))
        })
        .collect::<Result<_>>()?;
    let lhs = pieces[0].0 - pieces[1].0 - pieces[2].0;
    let rhs = gluing_constant(model)? + multiplier_det(dtn_log_det(&join_family(cfg.a, cfg.b), model)?);
    let tolerance = if matches!(model, CrossSection::Point) {
        tol.exact
    } else {
        tol.fixed
    };
    let mut rows = vec![ReportRow::new("gluing", None, lhs, rhs, tolerance)];
    for ((name, l), (two_d, factorized)) in ["whole", "left", "right"].iter().zip(lengths).zip(&pieces) {
        let mut row = ReportRow::new(format!("cylinder-routes:{name}"), None, *factorized, *two_d, ROUTE_TOL);
        row.r = Some(l);
        rows.push(row);
    }
    Ok(Report {
        experiment: "glue".into(),
        rows,
    })
}

/// The gluing identity for `Delta^2 + t^2 = (Delta + i t)(Delta - i t)`.
pub fn check_power_gluing_m2(cfg: &GeometryConfig, tol: &Tolerances) -> Result<Report> {
    cfg.scalar()?;
    let model = &cfg.cross_section;
    let shifts = [RayShift::new(FRAC_PI_2, cfg.t)?, RayShift::new(-FRAC_PI_2, cfg.t)?];
    let parts: Vec<(LogDet, LogDet)> = shifts
        .par_iter()
        .map(|&s| {
            let det = |l: f64| cylinder_log_det_2d(&cyl(model, l, Dirichlet, s));
            let lhs = det(cfg.a + cfg.b)? - det(cfg.a)? - det(cfg.b)?;
            let r = multiplier_det(dtn_log_det_shifted(&join_family(cfg.a, cfg.b), model, s)?);
            Ok((lhs, r))
        })
        .collect::<Result<_>>()?;
    let c = gluing_constant(model)?;
    let lhs = parts[0].0 + parts[1].0;
    let rhs = c + c + parts[0].1 + parts[1].1;
    let im = |v: LogDet| real(v.value.im);
    let rows = vec![
        ReportRow::new("power-gluing", None, lhs, rhs, tol.fixed),
        ReportRow::new("power-gluing:lhs-imaginary", None, im(lhs), real(0.0), tol.fixed),
        ReportRow::new("power-gluing:rhs-imaginary", None, im(rhs), real(0.0), tol.fixed),
    ];
    Ok(Report {
        experiment: "power-glue".into(),
        rows,
    })
}

/// Limit expressions of the stretched manifold `M_r`, whose pieces are
/// `M_{1,r} = [0, a + r] x Y` and `M_{2,r} = [0, b + r] x Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `log Det R_{N_r} + k log r -> log 2 (zeta_Y(0) + k) + 1/2 log Det' Delta_Y`.
    CollarDtn,
    /// `log Det M_r - log Det M_{1,r} - log Det M_{2,r} + k log r -> 1/2 log Det' Delta_Y`.
    StretchedGluing,
    /// Neumann minus Dirichlet at the cut on `M_{1,r}`, plus `k log r`.
    NeumannDirichlet,
    /// `log Det M_r - log Det M_{1,r}` (Neumann at the cut) `- log Det M_{2,r} -> 0`.
    NeumannSplit,
    /// `log Det R_{M_{1,r}} -> log Det(Q_1 + sqrt(Delta_Y))` off the kernel fibers.
    OneSidedDtn,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::CollarDtn,
        Identity::StretchedGluing,
        Identity::NeumannDirichlet,
        Identity::NeumannSplit,
        Identity::OneSidedDtn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::CollarDtn => "collar-dtn",
            Identity::StretchedGluing => "stretched-gluing",
            Identity::NeumannDirichlet => "neumann-dirichlet",
            Identity::NeumannSplit => "neumann-split",
            Identity::OneSidedDtn => "one-sided-dtn",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown identity `{name}`")))
    }

    /// Kernel fibers make these sequences converge like `1/r`.
    fn inverse_power(self, kernel: u32) -> bool {
        kernel > 0
            && matches!(
                self,
                Identity::StretchedGluing | Identity::NeumannDirichlet | Identity::NeumannSplit
            )
    }
}

/// The grid suited to the convergence regime of an identity.
pub fn default_r_grid(identity: Identity, model: &CrossSection) -> Vec<f64> {
    if identity.inverse_power(model.kernel_dim()) {
        INVERSE_POWER_R_GRID.to_vec()
    } else {
        DEFAULT_R_GRID.to_vec()
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.len() < 4 {
        return invalid("r-grid needs at least 4 points");
    }
    if !r_grid.iter().all(|r| r.is_finite() && *r > 0.0) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("r-grid must be positive and strictly increasing");
    }
    Ok(())
}

/// Positivity of the collar block over `model` at every `r`.
fn gate(model: &CrossSection, a: f64, b: f64, r_grid: &[f64]) -> Result<()> {
    for &r in r_grid {
        let family = DtnFamily::Rmrr {
            r,
            q1: Box::new(DtnFamily::q_cylinder(a)),
            q2: Box::new(DtnFamily::q_cylinder(b)),
        };
        let mut cutoff = GATE_CUTOFF;
        let min = loop {
            let m = min_block_eigen(&family, model, cutoff)?;
            if m.certified || cutoff >= GATE_CUTOFF_MAX {
                break m;
            }
            cutoff *= 4.0;
        };
        if !min.certified {
            return Err(Error::Uncertified(format!(
                "collar block positivity at r = {r} not certified up to {cutoff}"
            )));
        }
        if !(min.value > 0.0) {
            return Err(Error::Hypothesis(format!(
                "collar block not invertible at r = {r}: smallest eigenvalue {:.3e} at lambda = {}",
                min.value, min.at_lambda
            )));
        }
    }
    Ok(())
}

fn kernel_branch(family: &DtnFamily) -> Result<Option<f64>> {
    match family.expand(RayShift::zero())? {
        Expanded::Single(m) => Ok(m.kernel_value.map(|v| v.det().re)),
        Expanded::Graded { .. } => Ok(None),
    }
}

fn one_sided_target(cfg: &GeometryConfig) -> Result<(LogDet, f64)> {
    let map = plus_root(&q_cylinder(cfg.a, Dirichlet, RayShift::zero())?)?;
    let kernel = map.kernel_value.map(|v| v.det().re).unwrap_or(1.0);
    Ok((multiplier_det(log_det_multiplier(&cfg.cross_section, &map)?), kernel))
}

/// The limit expression at one `r`; the second value drops the kernel-branch
/// compensation where one applies.
fn evaluate(cfg: &GeometryConfig, identity: Identity, r: f64) -> Result<(LogDet, LogDet)> {
    let model = &cfg.cross_section;
    let zero = RayShift::zero();
    let k = model.kernel_dim() as f64;
    let det = |l: f64, right| cylinder_log_det(&cyl(model, l, right, zero));
    let log_r = real(k * r.ln());
    let v = match identity {
        Identity::CollarDtn => multiplier_det(dtn_log_det(&DtnFamily::RNr { r }, model)?) + log_r,
        Identity::StretchedGluing => {
            det(cfg.a + cfg.b + 2.0 * r, Dirichlet)? - det(cfg.a + r, Dirichlet)? - det(cfg.b + r, Dirichlet)? + log_r
        }
        Identity::NeumannDirichlet => det(cfg.a + r, Neumann)? - det(cfg.a + r, Dirichlet)? + log_r,
        Identity::NeumannSplit => {
            det(cfg.a + cfg.b + 2.0 * r, Dirichlet)? - det(cfg.a + r, Neumann)? - det(cfg.b + r, Dirichlet)?
        }
        Identity::OneSidedDtn => {
            let family = DtnFamily::RM1r {
                r,
                q1: Box::new(DtnFamily::q_cylinder(cfg.a)),
            };
            let full = multiplier_det(dtn_log_det(&family, model)?);
            let (_, limit_kernel) = one_sided_target(cfg)?;
            let compensated = match kernel_branch(&family)? {
                Some(kv) if k > 0.0 => full - real(k * (kv / limit_kernel).ln()),
                _ => full,
            };
            return Ok((compensated, full));
        }
    };
    Ok((v, v))
}

fn target(cfg: &GeometryConfig, identity: Identity) -> Result<LogDet> {
    let model = &cfg.cross_section;
    let z = zeta_invariants(model, true)?;
    let half = LogDet {
        value: Complex64::new(0.5 * z.log_det, 0.0),
        error_bound: 0.5 * z.error_bound,
    };
    Ok(match identity {
        Identity::CollarDtn => half - gluing_constant(model)?,
        Identity::StretchedGluing | Identity::NeumannDirichlet => half,
        Identity::NeumannSplit => real(0.0),
        Identity::OneSidedDtn => one_sided_target(cfg)?.0,
    })
}

/// Evaluates `identity` along `r_grid`, extrapolates `r -> infinity` and
/// compares with the closed-form limit.
pub fn adiabatic_limit(cfg: &GeometryConfig, r_grid: &[f64], identity: Identity, tol: &Tolerances) -> Result<Report> {
    cfg.scalar()?;
    check_grid(r_grid)?;
    gate(&cfg.cross_section, cfg.a, cfg.b, r_grid)?;
    let values: Vec<(f64, (LogDet, LogDet))> = r_grid
        .par_iter()
        .map(|&r| Ok((r, evaluate(cfg, identity, r)?)))
        .collect::<Result<_>>()?;
    let goal = target(cfg, identity)?;
    let kernel = cfg.cross_section.kernel_dim();
    let compensated: Vec<(f64, LogDet)> = values.iter().map(|(r, (c, _))| (*r, *c)).collect();
    let mut rows = vec![limit_row(
        identity.name(),
        &compensated,
        goal,
        identity.inverse_power(kernel),
        tol.limit,
    )];
    if identity == Identity::OneSidedDtn && kernel > 0 {
        let full: Vec<(f64, LogDet)> = values.iter().map(|(r, (_, f))| (*r, *f)).collect();
        rows.push(limit_row("one-sided-dtn:full", &full, goal, true, tol.limit));
    }
    Ok(Report {
        experiment: "adiabatic".into(),
        rows,
    })
}

fn limit_row(identity: &str, values: &[(f64, LogDet)], goal: LogDet, inverse_power: bool, tolerance: f64) -> ReportRow {
    let rs: Vec<f64> = values.iter().map(|v| v.0).collect();
    let vs: Vec<f64> = values.iter().map(|v| v.1.value.re).collect();
    let samples: Vec<Sample> = values
        .iter()
        .map(|(r, v)| Sample {
            r: *r,
            value: v.value.re,
            value_im: v.value.im,
            residual: (v.value - goal.value).norm(),
            error_bound: v.error_bound,
        })
        .collect();
    let mut ex = if inverse_power {
        inverse_power_limit(&rs, &vs)
    } else {
        exponential_limit(&rs, &vs)
    };
    ex.monotone = samples
        .windows(2)
        .all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-9) + 1e-13);
    let im = values.iter().map(|v| v.1.value.im.abs()).fold(0.0, f64::max);
    let lhs = Complex64::new(ex.value, im);
    let residual = (lhs - goal.value).norm();
    let error_bound = values.iter().map(|v| v.1.error_bound).fold(0.0, f64::max) + goal.error_bound;
    ReportRow {
        identity: identity.into(),
        r: None,
        lhs: ex.value,
        rhs: goal.value.re,
        lhs_im: im,
        rhs_im: goal.value.im,
        residual,
        tolerance,
        error_bound,
        pass: residual <= tolerance && !ex.diverged,
        samples,
        extrapolation: Some(ex),
    }
}

fn converged(vs: &[f64]) -> bool {
    let scale = vs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let n = vs.len();
    (vs[n - 1] - vs[n - 2]).abs() <= 1e-13 * scale && (vs[n - 2] - vs[n - 3]).abs() <= 1e-13 * scale
}

/// `v_inf + c e^(-a r)` through three points.
fn exponential_window(r: [f64; 3], v: [f64; 3]) -> Option<(f64, f64, f64)> {
    let (d1, d2) = (v[1] - v[0], v[2] - v[1]);
    let (h1, h2) = (r[1] - r[0], r[2] - r[1]);
    if d1 == 0.0 {
        return None;
    }
    let rho = d2 / d1;
    if !(rho > 0.0 && rho < h2 / h1) {
        return None;
    }
    // g(a) decreases from h2/h1 to 0
    let g = |a: f64| (-a * h1).exp() * (-a * h2).exp_m1() / (-a * h1).exp_m1();
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e3f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid.exp()) > rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = (0.5 * (lo + hi)).exp();
    // c e^(-a r0) (e^(-a h1) - 1) = d1
    let tail = d1 * (-a * (h1 + h2)).exp() / (-a * h1).exp_m1();
    let value = v[2] - tail;
    value.is_finite().then_some((value, a, tail))
}

pub fn exponential_limit(rs: &[f64], vs: &[f64]) -> Extrapolation {
    let n = vs.len();
    let last = vs[n - 1];
    let fallback = |diverged| Extrapolation {
        fit: DecayFit::Converged,
        value: last,
        estimate_error: (last - vs[n - 2]).abs(),
        monotone: true,
        diverged,
    };
    if n < 3 {
        return fallback(true);
    }
    if converged(vs) {
        return fallback(false);
    }
    let window = |i: usize| exponential_window([rs[i], rs[i + 1], rs[i + 2]], [vs[i], vs[i + 1], vs[i + 2]]);
    let Some((value, rate, tail)) = window(n - 3) else {
        let scale = vs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        return fallback((last - vs[n - 2]).abs() > 1e-12 * scale);
    };
    let estimate_error = match (n >= 4).then(|| window(n - 4)).flatten() {
        Some((previous, _, _)) => (value - previous).abs(),
        None => tail.abs(),
    };
    Extrapolation {
        fit: DecayFit::Exponential { rate, tail },
        value,
        estimate_error,
        monotone: true,
        diverged: false,
    }
}

/// Neville extrapolation to `1/r = 0`.
pub fn inverse_power_limit(rs: &[f64], vs: &[f64]) -> Extrapolation {
    let xs: Vec<f64> = rs.iter().map(|r| 1.0 / r).collect();
    let n = xs.len();
    // p[i] holds the interpolant through points i..=i+level at 0
    let mut p = vs.to_vec();
    let mut previous = vs[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            p[i] = (xs[j] * p[i] - xs[i] * p[i + 1]) / (xs[j] - xs[i]);
        }
        if level == n - 2 {
            previous = p[1];
        }
    }
    let value = p[0];
    Extrapolation {
        fit: DecayFit::InversePowers { order: n - 1 },
        value,
        estimate_error: (value - previous).abs(),
        monotone: true,
        diverged: !value.is_finite(),
    }
}

/// Per-degree determinants on `M_{1,r}`, `M_{2,r}` and `M_r` for forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionAssembly {
    pub r: f64,
    pub dirichlet: Vec<LogDet>,
    pub absolute: Vec<LogDet>,
    pub relative: Vec<LogDet>,
    /// Relative conditions on `M_{2,r}`.
    pub relative_right: Vec<LogDet>,
    pub closed: Vec<LogDet>,
}

/// `1/2 sum_q (-1)^q q log Det_q`.
pub fn log_torsion(per_degree: &[LogDet]) -> LogDet {
    per_degree
        .iter()
        .enumerate()
        .fold(real(0.0), |acc, (q, d)| {
            let w = if q % 2 == 0 { 0.5 * q as f64 } else { -0.5 * q as f64 };
            acc + LogDet {
                value: d.value * w,
                error_bound: d.error_bound * w.abs(),
            }
        })
}

impl TorsionAssembly {
    pub fn new(cfg: &GeometryConfig, r: f64) -> Result<Self> {
        let base = &cfg.cross_section;
        let top = base.dim_y() + 1;
        let zero = RayShift::zero();
        let form = |l: f64, right, q| form_cylinder_log_det(&cyl(base, l, right, zero).with_degree(q));
        let mut out = Self {
            r,
            dirichlet: Vec::new(),
            absolute: Vec::new(),
            relative: Vec::new(),
            relative_right: Vec::new(),
            closed: Vec::new(),
        };
        for q in 0..=top {
            out.dirichlet.push(form(cfg.a + r, Dirichlet, q)?);
            out.absolute.push(form(cfg.a + r, Absolute, q)?);
            out.relative.push(form(cfg.a + r, Relative, q)?);
            out.relative_right.push(form(cfg.b + r, Relative, q)?);
            out.closed.push(form(cfg.a + cfg.b + 2.0 * r, Dirichlet, q)?);
        }
        Ok(out)
    }

    pub fn log_tau_abs(&self) -> LogDet {
        log_torsion(&self.absolute)
    }

    pub fn log_tau_rel(&self) -> LogDet {
        log_torsion(&self.relative)
    }
}

/// Absolute/relative determinants and torsions of form Laplacians on the
/// stretched pieces, against their limits on `Y`.
pub fn torsion_report(cfg: &GeometryConfig, r_grid: &[f64], tol: &Tolerances) -> Result<Report> {
    cfg.validate()?;
    if !cfg.form_grading {
        return invalid("torsion needs form_grading");
    }
    check_grid(r_grid)?;
    let base = &cfg.cross_section;
    let dim_y = base.dim_y();
    let top = dim_y + 1;
    let graded = |q: u32| CrossSection::graded(base.clone(), q);
    for q in 0..=dim_y {
        let k = graded(q).kernel_dim();
        if k > 0 {
            return Err(Error::Hypothesis(format!(
                "kernel present: Delta_Y in degree {q} has {k} zero modes; twist the cross-section"
            )));
        }
        gate(&graded(q), cfg.a, cfg.b, r_grid)?;
    }
    let on_y: Vec<LogDet> = (0..=top)
        .map(|q| {
            let z = zeta_invariants(&graded(q), false)?;
            Ok(LogDet {
                value: Complex64::new(z.log_det, 0.0),
                error_bound: z.error_bound,
            })
        })
        .collect::<Result<_>>()?;
    let half = |d: LogDet| LogDet {
        value: d.value * 0.5,
        error_bound: d.error_bound * 0.5,
    };
    let tau_y = log_torsion(&on_y[..=dim_y as usize]);

    let assemblies: Vec<TorsionAssembly> = r_grid
        .par_iter()
        .map(|&r| TorsionAssembly::new(cfg, r))
        .collect::<Result<_>>()?;
    let series = |f: &dyn Fn(&TorsionAssembly) -> LogDet| -> Vec<(f64, LogDet)> {
        assemblies.iter().map(|t| (t.r, f(t))).collect()
    };

    let mut rows = Vec::new();
    for q in 0..=top as usize {
        let abs_goal = if q < top as usize { half(on_y[q]) } else { real(0.0) };
        let rel_goal = if q >= 1 { half(on_y[q - 1]) } else { real(0.0) };
        rows.push(limit_row(
            &format!("absolute-dirichlet[q={q}]"),
            &series(&|t| t.absolute[q] - t.dirichlet[q]),
            abs_goal,
            false,
            tol.limit,
        ));
        rows.push(limit_row(
            &format!("relative-dirichlet[q={q}]"),
            &series(&|t| t.relative[q] - t.dirichlet[q]),
            rel_goal,
            false,
            tol.limit,
        ));
    }
    rows.push(limit_row(
        "torsion-abs-rel",
        &series(&|t| t.log_tau_abs() - t.log_tau_rel()),
        tau_y,
        false,
        tol.limit,
    ));
    for q in 0..=top as usize {
        rows.push(limit_row(
            &format!("closed-split[q={q}]"),
            &series(&|t| t.closed[q] - t.absolute[q] - t.relative_right[q]),
            real(0.0),
            false,
            tol.limit,
        ));
    }
    rows.push(limit_row(
        "closed-split-torsion",
        &series(&|t| log_torsion(&t.closed) - t.log_tau_abs() - log_torsion(&t.relative_right)),
        real(0.0),
        false,
        tol.limit,
    ));
    rows.extend(form_gluing_rows(cfg, r_grid[0], tol)?);
    Ok(Report {
        experiment: "torsion".into(),
        rows,
    })
}

/// Cutting `M_{1,r}` at `u = a` for each form degree and condition at `Y_0`.
fn form_gluing_rows(cfg: &GeometryConfig, r: f64, tol: &Tolerances) -> Result<Vec<ReportRow>> {
    let base = &cfg.cross_section;
    let top = base.dim_y() + 1;
    let zero = RayShift::zero();
    let graded = |q: u32| CrossSection::graded(base.clone(), q);
    let form = |l: f64, right, q| form_cylinder_log_det(&cyl(base, l, right, zero).with_degree(q));
    let q1 = || Box::new(DtnFamily::q_cylinder(cfg.a));
    let mut rows = Vec::new();
    for q in 0..=top {
        let mut constant = gluing_constant(&graded(q))?;
        if q >= 1 {
            constant = constant + gluing_constant(&graded(q - 1))?;
        }
        for (name, bc) in [("dirichlet", Dirichlet), ("absolute", Absolute), ("relative", Relative)] {
            let lhs = form(cfg.a + r, bc, q)? - form(cfg.a, Dirichlet, q)? - form(r, bc, q)?;
            let dtn = match bc {
                Absolute => dtn_log_det(&DtnFamily::RqAbs { r, q: q1() }, &graded(q))?,
                Relative => dtn_log_det(&DtnFamily::RqRel { r, q: q1() }, &graded(q))?,
                _ => {
                    let family = DtnFamily::RM1r { r, q1: q1() };
                    let mut d = dtn_log_det(&family, &graded(q))?;
                    if q >= 1 {
                        let low = dtn_log_det(&family, &graded(q - 1))?;
                        d.log_det += low.log_det;
                        d.error_bound += low.error_bound;
                    }
                    d
                }
            };
            let rhs = constant + multiplier_det(dtn);
            rows.push(ReportRow::new(
                format!("form-gluing:{name}[q={q}]"),
                Some(r),
                lhs,
                rhs,
                tol.fixed,
            ));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn point_gluing_is_exact() {
        for (a, b) in [(1.0, 1.0), (0.3, 2.5), (4.0, 0.125)] {
            let rep = check_gluing(&GeometryConfig::new(CrossSection::Point, a, b), &tol()).unwrap();
            let row = rep.row("gluing").unwrap();
            assert!(row.residual < 1e-12, "{row:?}");
            let closed = -LN_2 + (1.0 / a + 1.0 / b).ln();
            assert!((row.rhs - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_gluing() {
        let rep = check_gluing(&GeometryConfig::new(CrossSection::circle(TAU, 0.0), 1.0, 1.0), &tol()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        assert!(rep.row("gluing").unwrap().residual < 1e-8);
    }

    #[test]
    fn shifted_constant_gluing() {
        let rep = check_gluing(&GeometryConfig::new(CrossSection::linear(0.25), 1.0, 1.0), &tol()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
    }

    #[test]
    fn power_gluing_point_and_twisted_circle() {
        let rep = check_power_gluing_m2(&GeometryConfig::new(CrossSection::Point, 1.0, 1.0), &tol()).unwrap();
        assert!(rep.row("power-gluing").unwrap().residual < 1e-8, "{rep:#?}");
        assert!(rep.all_pass());
        let rep = check_power_gluing_m2(&GeometryConfig::new(CrossSection::circle(TAU, 0.5), 1.0, 1.0), &tol()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
    }

    #[test]
    fn collar_dtn_point_is_log_two() {
        let cfg = GeometryConfig::new(CrossSection::Point, 1.0, 1.0);
        let rep = adiabatic_limit(&cfg, &DEFAULT_R_GRID, Identity::CollarDtn, &tol()).unwrap();
        let row = &rep.rows[0];
        assert!(row.pass);
        for s in &row.samples {
            assert!((s.value - LN_2).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn stretched_gluing_circle() {
        let model = CrossSection::circle(TAU, 0.0);
        let cfg = GeometryConfig::new(model.clone(), 1.0, 1.0);
        let grid = default_r_grid(Identity::StretchedGluing, &model);
        let rep = adiabatic_limit(&cfg, &grid, Identity::StretchedGluing, &tol()).unwrap();
        let row = &rep.rows[0];
        assert!((row.rhs - TAU.ln()).abs() < 1e-10);
        assert!(row.residual < 1e-4, "{row:#?}");
        assert!(row.extrapolation.unwrap().monotone);
    }

    #[test]
    fn every_identity_passes_on_point_and_twisted_circle() {
        for model in [CrossSection::Point, CrossSection::circle(TAU, 0.5), CrossSection::circle(TAU, 0.0)] {
            for id in Identity::ALL {
                let cfg = GeometryConfig::new(model.clone(), 1.0, 2.0);
                let rep = adiabatic_limit(&cfg, &default_r_grid(id, &model), id, &tol()).unwrap();
                assert!(rep.rows[0].pass, "{model:?} {id:?} {:#?}", rep.rows[0]);
            }
        }
    }

    #[test]
    fn one_sided_dtn_reports_full_difference() {
        let cfg = GeometryConfig::new(CrossSection::circle(TAU, 0.0), 1.0, 1.0);
        let rep = adiabatic_limit(&cfg, &DEFAULT_R_GRID, Identity::OneSidedDtn, &tol()).unwrap();
        let s = &rep.rows[0].samples;
        assert!(s[3].residual < 1e-5 && s[2].residual >= 5.0 * s[3].residual, "{s:?}");
        let full = rep.row("one-sided-dtn:full").unwrap();
        assert!((full.samples[3].residual - (1.0 + 1.0 / 8.0f64).ln()).abs() < 1e-5);
    }

    #[test]
    fn identity_names_round_trip() {
        for id in Identity::ALL {
            assert_eq!(Identity::parse(id.name()).unwrap(), id);
        }
        assert!(Identity::parse("nope").is_err());
    }

    #[test]
    fn extrapolators_recover_limits() {
        let rs = [1.0, 2.0, 4.0, 8.0];
        let vs: Vec<f64> = rs.iter().map(|r: &f64| 3.0 + 0.7 * (-1.3 * r).exp()).collect();
        let e = exponential_limit(&rs, &vs);
        assert!((e.value - 3.0).abs() < 1e-12, "{e:?}");
        match e.fit {
            DecayFit::Exponential { rate, .. } => assert!((rate - 1.3).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        let rs = INVERSE_POWER_R_GRID;
        let vs: Vec<f64> = rs.iter().map(|r| -2.0 + 1.0 / r - 3.0 / (r * r)).collect();
        assert!((inverse_power_limit(&rs, &vs).value + 2.0).abs() < 1e-12);
        let flat = exponential_limit(&rs, &[1.0; 5]);
        assert_eq!(flat.fit, DecayFit::Converged);
        assert!(!flat.diverged);
        let growing = exponential_limit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 8.0]);
        assert!(growing.diverged);
    }

    #[test]
    fn torsion_twisted_circle() {
        let mut cfg = GeometryConfig::new(CrossSection::circle(TAU, 0.5), 1.0, 1.0);
        cfg.form_grading = true;
        let rep = torsion_report(&cfg, &DEFAULT_R_GRID, &tol()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        let abs0 = rep.row("absolute-dirichlet[q=0]").unwrap();
        let rel1 = rep.row("relative-dirichlet[q=1]").unwrap();
        assert!((abs0.rhs - LN_2).abs() < 1e-10);
        assert!((abs0.lhs - rel1.lhs).abs() < 1e-10);
        assert!((rep.row("torsion-abs-rel").unwrap().rhs + LN_2).abs() < 1e-10);
    }

    #[test]
    fn torsion_needs_twist() {
        let mut cfg = GeometryConfig::new(CrossSection::circle(TAU, 0.0), 1.0, 1.0);
        cfg.form_grading = true;
        assert!(matches!(torsion_report(&cfg, &DEFAULT_R_GRID, &tol()), Err(Error::Hypothesis(_))));
    }
}
