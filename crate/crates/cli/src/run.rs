//! Experiment dispatch: resolves defaults, runs one experiment and assembles
//! the report document.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use zetaglue::cylinder::{cylinder_log_det, cylinder_log_det_2d, form_cylinder_log_det, CylinderOp, LogDet};
use zetaglue::dtn::{dtn_eigenvalue, dtn_log_det_shifted};
use zetaglue::glue::{
    adiabatic_limit, check_gluing, check_power_gluing_m2, default_r_grid, torsion_report, ReportRow, DEFAULT_R_GRID,
    ROUTE_TOL,
};
use zetaglue::spectra::{enumerate_spectrum, heat_expansion, kernel_dim};
use zetaglue::symbols::{ricatti_expansion, smoothing_decay_check, sqrt_taylor, SymbolExpansion};
use zetaglue::zeta::zeta_shifted;
use zetaglue::Error;

use crate::config::{Experiment, RunConfig};

pub const TOOL: &str = "zetaglue";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fiber values listed by the `dtn` experiment.
const FIBER_LISTING: usize = 32;

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: Experiment,
    pub config: RunConfig,
    pub values: Value,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
}

/// Fills in every default that depends on the experiment, so the echoed
/// configuration reproduces the run on its own.
pub fn resolve(mut cfg: RunConfig) -> RunConfig {
    match cfg.experiment() {
        Experiment::Adiabatic => {
            if cfg.numeric.r_grid.is_none() {
                cfg.numeric.r_grid = Some(default_r_grid(cfg.numeric.identity, &cfg.geometry.cross_section));
            }
        }
        Experiment::Torsion => {
            cfg.geometry.form_grading = true;
            if cfg.numeric.r_grid.is_none() {
                cfg.numeric.r_grid = Some(DEFAULT_R_GRID.to_vec());
            }
        }
        _ => {}
    }
    cfg
}

fn real(x: f64) -> LogDet {
    LogDet::exact(Complex64::new(x, 0.0))
}

fn bound_row(name: &str, bound: f64, tolerance: f64) -> ReportRow {
    ReportRow::new(name, None, real(bound), real(0.0), tolerance)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn run(cfg: &RunConfig) -> Result<Document, Error> {
    let model = &cfg.geometry.cross_section;
    let tol = &cfg.numeric.tolerances;
    let grid = || cfg.numeric.r_grid.clone().unwrap_or_else(|| DEFAULT_R_GRID.to_vec());
    let (values, rows) = match cfg.experiment() {
        Experiment::Spectrum => {
            let stream = enumerate_spectrum(model, cfg.numeric.cutoff)?;
            let mut rows = Vec::new();
            let heat = match heat_expansion(model) {
                Ok(h) => {
                    let z = zeta_shifted(model, &zetaglue::RayShift::zero(), true)?;
                    let k = kernel_dim(model) as f64;
                    rows.push(ReportRow::new(
                        "heat-constant",
                        None,
                        real(h.constant()),
                        real(z.zeta0.re + k),
                        tol.exact,
                    ));
                    to_value(&h)
                }
                Err(Error::Uncertified(_)) => Value::Null,
                Err(e) => return Err(e),
            };
            let values = json!({
                "eigenvalues": stream.entries,
                "cutoff": stream.cutoff,
                "kernel_dim": kernel_dim(model),
                "heat_expansion": heat,
            });
            (values, rows)
        }
        Experiment::Zeta => {
            let shift = cfg.shift.ray()?;
            let z = zeta_shifted(model, &shift, cfg.numeric.exclude_kernel)?;
            let mut rows = vec![bound_row("error-bound", z.error_bound, tol.fixed)];
            if shift.is_zero() {
                if let Ok(h) = heat_expansion(model) {
                    let k = if z.excluded_kernel { kernel_dim(model) as f64 } else { 0.0 };
                    rows.push(ReportRow::new(
                        "zeta0-heat-constant",
                        None,
                        LogDet::exact(z.zeta0),
                        real(h.constant() - k),
                        tol.exact,
                    ));
                }
            }
            (to_value(&z), rows)
        }
        Experiment::Logdet => {
            let c = &cfg.cylinder;
            let mut op = CylinderOp::new(model.clone(), c.length, c.bc_left, c.bc_right).with_shift(cfg.shift.ray()?);
            if let Some(q) = c.form_degree {
                op = op.with_degree(q);
                let v = form_cylinder_log_det(&op)?;
                let rows = vec![bound_row("error-bound", v.error_bound, tol.fixed)];
                (json!({ "factorized": v }), rows)
            } else {
                let f = cylinder_log_det(&op)?;
                let d = cylinder_log_det_2d(&op)?;
                let rows = vec![
                    ReportRow::new("cylinder-routes", Some(c.length), f, d, ROUTE_TOL),
                    bound_row("error-bound", f.error_bound, tol.fixed),
                ];
                (json!({ "factorized": f, "double_spectrum": d }), rows)
            }
        }
        Experiment::Dtn => {
            let shift = cfg.shift.ray()?;
            let det = dtn_log_det_shifted(&cfg.dtn, model, shift)?;
            let mut fibers = Vec::new();
            if shift.is_zero() {
                for e in enumerate_spectrum(model, cfg.numeric.cutoff)?.entries.iter().take(FIBER_LISTING) {
                    let v = dtn_eigenvalue(&cfg.dtn, e.value)?;
                    fibers.push(json!({
                        "lambda": e.value,
                        "multiplicity": e.multiplicity,
                        "det": v.det(),
                    }));
                }
            }
            let rows = vec![bound_row("error-bound", det.error_bound, tol.fixed)];
            (json!({ "log_det": det, "fibers": fibers }), rows)
        }
        Experiment::Symbols => {
            let s = &cfg.symbols;
            s.potential.validate()?;
            let expansion = ricatti_expansion(&s.potential, s.depth)?;
            let smoothing = smoothing_decay_check(model, s.length, s.t, cfg.numeric.cutoff, s.order, s.weight)?;
            let root = s.t.sqrt();
            let at_zero = 2.0 * root / ((2.0 * root * s.length).exp() - 1.0);
            let mut rows = vec![ReportRow::new(
                "remainder-at-zero",
                None,
                real(smoothing.remainder_at_zero),
                real(at_zero),
                tol.fixed,
            )];
            if s.potential.is_constant() {
                let zero = s.potential.constant == 0.0;
                let expected = SymbolExpansion {
                    orders: sqrt_taylor(s.depth)
                        .orders
                        .iter()
                        .map(|q| q.at_constant_potential(zero))
                        .collect(),
                };
                let mismatch = if expansion == expected { 0.0 } else { 1.0 };
                rows.push(ReportRow::new("constant-potential-taylor", None, real(mismatch), real(0.0), tol.exact));
            }
            let orders: Vec<String> = expansion
                .orders
                .iter()
                .enumerate()
                .map(|(j, q)| format!("q_{} = {}", 1 - j as i64, q))
                .collect();
            let values = json!({
                "orders": orders,
                "smoothing": {
                    "remainder_at_zero": smoothing.remainder_at_zero,
                    "weighted_sup": smoothing.orders,
                },
            });
            (values, rows)
        }
        Experiment::Glue => (Value::Null, check_gluing(&cfg.geometry.to_config(), tol)?.rows),
        Experiment::PowerGlue => (Value::Null, check_power_gluing_m2(&cfg.geometry.to_config(), tol)?.rows),
        Experiment::Adiabatic => {
            let rep = adiabatic_limit(&cfg.geometry.to_config(), &grid(), cfg.numeric.identity, tol)?;
            (Value::Null, rep.rows)
        }
        Experiment::Torsion => (Value::Null, torsion_report(&cfg.geometry.to_config(), &grid(), tol)?.rows),
    };
    let pass = rows.iter().all(|r| r.pass);
    Ok(Document {
        tool: TOOL,
        version: VERSION,
        experiment: cfg.experiment(),
        config: cfg.clone(),
        values,
        rows,
        pass,
    })
}
