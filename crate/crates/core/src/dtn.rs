//! Dirichlet-to-Neumann operators on product cylinders as eigenvalue-wise
//! maps of `Delta_Y`: their fiber values, determinants, block positivity and
//! trace-class perturbation estimates.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cylinder::BoundaryCondition;
use crate::error::{invalid, Error, Result};
use crate::special::{ln_1p, CompensatedSum};
use crate::spectra::{CrossSection, SpectralModel};
use crate::zeta::{log_det_multiplier, Asymptotics, Decay, Multiplier, MultiplierLogDet, RayShift, TAIL_TOL};

/// Value of a map on one eigenspace of `Delta_Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberValue {
    Scalar(Complex64),
    Block(Matrix2<Complex64>),
}

impl FiberValue {
    pub fn real(x: f64) -> Self {
        FiberValue::Scalar(Complex64::new(x, 0.0))
    }

    pub fn det(&self) -> Complex64 {
        match self {
            FiberValue::Scalar(v) => *v,
            FiberValue::Block(m) => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        }
    }

    pub fn rank(&self) -> u32 {
        match self {
            FiberValue::Scalar(_) => 1,
            FiberValue::Block(_) => 2,
        }
    }

    pub fn scalar(&self) -> Option<Complex64> {
        match self {
            FiberValue::Scalar(v) => Some(*v),
            FiberValue::Block(_) => None,
        }
    }

    /// Eigenvalues of a real symmetric block, ascending; a scalar's real part.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        match self {
            FiberValue::Scalar(v) => vec![v.re],
            FiberValue::Block(m) => {
                let (a, b, d) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 1)].re);
                let mean = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                vec![mean - rad, mean + rad]
            }
        }
    }
}

type FiberFn = dyn Fn(f64) -> FiberValue + Send + Sync;

/// An eigenvalue-wise function of `Delta_Y + z` with declared kernel branch
/// and asymptotic data.
#[derive(Clone)]
pub struct SpectralMap {
    pub label: String,
    pub rank: u32,
    pub shift: RayShift,
    eval: Arc<FiberFn>,
    pub kernel_value: Option<FiberValue>,
    pub asymptotics: Option<Asymptotics>,
    /// `|value| <= amplitude * e^(-rate sqrt(lambda))`, for trace-class maps.
    pub trace_decay: Option<Decay>,
}

impl fmt::Debug for SpectralMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMap")
            .field("label", &self.label)
            .field("rank", &self.rank)
            .field("shift", &self.shift)
            .field("kernel_value", &self.kernel_value)
            .field("asymptotics", &self.asymptotics)
            .finish()
    }
}

impl SpectralMap {
    pub fn new(
        label: impl Into<String>,
        rank: u32,
        shift: RayShift,
        eval: impl Fn(f64) -> FiberValue + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            rank,
            shift,
            eval: Arc::new(eval),
            kernel_value: None,
            asymptotics: None,
            trace_decay: None,
        }
    }

    pub fn with_kernel(mut self, v: FiberValue) -> Self {
        self.kernel_value = Some(v);
        self
    }

    pub fn with_asymptotics(mut self, a: Asymptotics) -> Self {
        self.asymptotics = Some(a);
        self
    }

    pub fn with_trace_decay(mut self, d: Decay) -> Self {
        self.trace_decay = Some(d);
        self
    }

    /// Fiber value; at `lambda = 0` without shift the declared kernel branch.
    pub fn eval(&self, lambda: f64) -> Result<FiberValue> {
        if !(lambda >= 0.0) {
            return invalid(format!("fiber eigenvalue must be nonnegative, got {lambda}"));
        }
        if lambda == 0.0 && self.shift.is_zero() {
            return self.kernel_value.ok_or_else(|| {
                Error::Kernel(format!("`{}` declares no kernel branch", self.label))
            });
        }
        Ok((self.eval)(lambda))
    }

    fn raw(&self, lambda: f64) -> FiberValue {
        (self.eval)(lambda)
    }
}

impl Multiplier for SpectralMap {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn rank(&self) -> u32 {
        self.rank
    }
    fn asymptotics(&self) -> Option<Asymptotics> {
        self.asymptotics
    }
    fn fiber_det(&self, lambda: f64) -> Complex64 {
        self.raw(lambda).det()
    }
    fn kernel_det(&self) -> Option<Complex64> {
        self.kernel_value.map(|v| v.det())
    }
}

fn mu(lambda: f64, shift: &RayShift) -> Complex64 {
    (shift.value() + lambda).sqrt()
}

/// `mu coth(mu L)`.
fn mu_coth(mu: Complex64, length: f64) -> Complex64 {
    let x = mu * length;
    if x.norm() < 1e-4 {
        (1.0 + x * x / 3.0) / length
    } else {
        let e = (-2.0 * x).exp();
        mu * (1.0 + e) / (1.0 - e)
    }
}

/// `mu tanh(mu L)`.
fn mu_tanh(mu: Complex64, length: f64) -> Complex64 {
    let e = (-2.0 * mu * length).exp();
    mu * (1.0 - e) / (1.0 + e)
}

/// `2 sqrt(x) / (e^(2 r sqrt x) - e^(-2 r sqrt x))`, with value `1/(2r)` at 0.
pub fn h_r(x: Complex64, r: f64) -> Complex64 {
    let m = x.sqrt();
    let y = 2.0 * r * m;
    if y.norm() < 1e-4 {
        Complex64::new(1.0 / (2.0 * r), 0.0) * (1.0 - y * y / 6.0)
    } else {
        2.0 * m * (-y).exp() / (1.0 - (-2.0 * y).exp())
    }
}

/// `4 sqrt(x) e^(-r sqrt x) / (e^(r sqrt x) - e^(-r sqrt x))`, with value `2/r` at 0.
pub fn g_r(x: f64, r: f64) -> f64 {
    let m = x.sqrt();
    let y = r * m;
    if y < 1e-4 {
        (2.0 / r) * (1.0 - y + y * y / 3.0)
    } else {
        4.0 * m * (-2.0 * y).exp() / (1.0 - (-2.0 * y).exp())
    }
}

fn check_length(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

/// One-sided map of a cylinder of the given length with a far-end condition.
pub fn q_cylinder(length: f64, far: BoundaryCondition, shift: RayShift) -> Result<SpectralMap> {
    check_length("length", length)?;
    let asym = Asymptotics {
        order: 1,
        constant: 1.0,
        shift,
        decay: Decay {
            rate: 2.0 * length,
            amplitude: 4.0,
        },
    };
    let map = match far {
        BoundaryCondition::Dirichlet => SpectralMap::new(
            format!("Q[L={length},D]"),
            1,
            shift,
            move |l| FiberValue::Scalar(mu_coth(mu(l, &shift), length)),
        )
        .with_kernel(FiberValue::real(1.0 / length)),
        BoundaryCondition::Neumann => SpectralMap::new(
            format!("Q[L={length},N]"),
            1,
            shift,
            move |l| FiberValue::Scalar(mu_tanh(mu(l, &shift), length)),
        )
        .with_kernel(FiberValue::real(0.0)),
        other => {
            return Err(Error::Unsupported(format!(
                "{other:?} is not a scalar far-end condition"
            )))
        }
    };
    Ok(map.with_asymptotics(asym))
}

/// Sum of two scalar maps on the same shift.
pub fn join(a: &SpectralMap, b: &SpectralMap, label: impl Into<String>) -> Result<SpectralMap> {
    if a.rank != 1 || b.rank != 1 {
        return Err(Error::Unsupported("joins take scalar maps".into()));
    }
    if a.shift != b.shift {
        return invalid("joined maps must share the shift");
    }
    let kernel = match (a.kernel_value, b.kernel_value) {
        (Some(x), Some(y)) => Some(FiberValue::Scalar(x.det() + y.det())),
        _ => None,
    };
    let asymptotics = match (a.asymptotics, b.asymptotics) {
        (Some(x), Some(y)) if x.order == y.order => Some(Asymptotics {
            order: x.order,
            constant: x.constant + y.constant,
            shift: x.shift,
            decay: Decay {
                rate: x.decay.rate.min(y.decay.rate),
                amplitude: 2.0 * x.decay.amplitude.max(y.decay.amplitude),
            },
        }),
        _ => None,
    };
    let (fa, fb) = (a.clone(), b.clone());
    let mut map = SpectralMap::new(label, 1, a.shift, move |l| {
        FiberValue::Scalar(fa.raw(l).det() + fb.raw(l).det())
    });
    map.kernel_value = kernel;
    map.asymptotics = asymptotics;
    Ok(map)
}

/// The two-by-two map of the stretched collar between two one-sided maps.
pub fn collar_block(r: f64, q1: &SpectralMap, q2: &SpectralMap) -> Result<SpectralMap> {
    check_length("r", r)?;
    if q1.rank != 1 || q2.rank != 1 || q1.shift != q2.shift {
        return invalid("collar blocks take scalar maps on one shift");
    }
    let shift = q1.shift;
    let (a, b) = (q1.clone(), q2.clone());
    let mut map = SpectralMap::new(format!("R_-r,r[r={r}]"), 2, shift, move |l| {
        let m = mu(l, &shift);
        let h = h_r(m * m, r);
        let e = (-2.0 * r * m).exp();
        FiberValue::Block(Matrix2::new(
            a.raw(l).det() + m + h * e,
            -h,
            -h,
            b.raw(l).det() + m + h * e,
        ))
    });
    if let (Some(k1), Some(k2)) = (q1.kernel_value, q2.kernel_value) {
        let c = Complex64::new(1.0 / (2.0 * r), 0.0);
        map.kernel_value = Some(FiberValue::Block(Matrix2::new(
            k1.det() + c,
            -c,
            -c,
            k2.det() + c,
        )));
    }
    if let (Some(x), Some(y)) = (q1.asymptotics, q2.asymptotics) {
        if x.order == 1 && y.order == 1 && x.constant == 1.0 && y.constant == 1.0 {
            map.asymptotics = Some(Asymptotics {
                order: 1,
                constant: 2.0,
                shift,
                decay: Decay {
                    rate: x.decay.rate.min(y.decay.rate).min(4.0 * r),
                    amplitude: 4.0 * x.decay.amplitude.max(y.decay.amplitude),
                },
            });
        }
    }
    Ok(map)
}

/// `2 sqrt(Delta_Y)` on nonzero modes.
pub fn twice_root(shift: RayShift) -> SpectralMap {
    SpectralMap::new("2sqrt", 1, shift, move |l| FiberValue::Scalar(2.0 * mu(l, &shift)))
        .with_asymptotics(Asymptotics {
            order: 1,
            constant: 2.0,
            shift,
            decay: Decay {
                rate: f64::INFINITY,
                amplitude: 0.0,
            },
        })
}

/// `Q + sqrt(Delta_Y)`.
pub fn plus_root(q: &SpectralMap) -> Result<SpectralMap> {
    let shift = q.shift;
    let root = SpectralMap::new("sqrt", 1, shift, move |l| FiberValue::Scalar(mu(l, &shift)))
        .with_kernel(FiberValue::real(0.0))
        .with_asymptotics(Asymptotics {
            order: 1,
            constant: 1.0,
            shift,
            decay: Decay {
                rate: f64::INFINITY,
                amplitude: 0.0,
            },
        });
    join(q, &root, format!("{}+sqrt", q.label))
}

/// The correction `g_r` of the collar map, trace class on nonzero modes.
pub fn g_r_map(r: f64) -> Result<SpectralMap> {
    check_length("r", r)?;
    Ok(
        SpectralMap::new(format!("g_r[r={r}]"), 1, RayShift::zero(), move |l| {
            FiberValue::real(g_r(l, r))
        })
        .with_trace_decay(Decay {
            rate: r,
            amplitude: 4.0 / (std::f64::consts::E * r * (1.0 - (-2.0f64).exp())),
        }),
    )
}

/// Named families of cylinder maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DtnFamily {
    /// One side: a cylinder of `length` with the given far-end condition.
    QCylinder {
        length: f64,
        #[serde(default = "dirichlet")]
        far_bc: BoundaryCondition,
    },
    /// Sum of two one-sided maps.
    RJoin {
        left: Box<DtnFamily>,
        right: Box<DtnFamily>,
    },
    /// Collar of half-length `r` with Dirichlet ends on both sides.
    RNr { r: f64 },
    RM1r { r: f64, q1: Box<DtnFamily> },
    RM2r { r: f64, q2: Box<DtnFamily> },
    Rmrr {
        r: f64,
        q1: Box<DtnFamily>,
        q2: Box<DtnFamily>,
    },
    /// Absolute-condition family on the degree `q` and `du` blocks.
    RqAbs { r: f64, q: Box<DtnFamily> },
    RqRel { r: f64, q: Box<DtnFamily> },
}

fn dirichlet() -> BoundaryCondition {
    BoundaryCondition::Dirichlet
}

/// A family expanded to maps: one map, or one per form block.
#[derive(Debug, Clone)]
pub enum Expanded {
    Single(SpectralMap),
    Graded {
        tangential: SpectralMap,
        normal: SpectralMap,
    },
}

impl DtnFamily {
    pub fn q_cylinder(length: f64) -> Self {
        DtnFamily::QCylinder {
            length,
            far_bc: BoundaryCondition::Dirichlet,
        }
    }

    pub fn expand(&self, shift: RayShift) -> Result<Expanded> {
        use BoundaryCondition::*;
        let single = |f: &DtnFamily| -> Result<SpectralMap> {
            match f.expand(shift)? {
                Expanded::Single(m) => Ok(m),
                Expanded::Graded { .. } => Err(Error::Unsupported(
                    "form-block families cannot be nested".into(),
                )),
            }
        };
        Ok(match self {
            DtnFamily::QCylinder { length, far_bc } => {
                Expanded::Single(q_cylinder(*length, *far_bc, shift)?)
            }
            DtnFamily::RJoin { left, right } => {
                Expanded::Single(join(&single(left)?, &single(right)?, "R")?)
            }
            DtnFamily::RNr { r } => {
                let q = q_cylinder(*r, Dirichlet, shift)?;
                Expanded::Single(join(&q, &q, format!("R_Nr[r={r}]"))?)
            }
            DtnFamily::RM1r { r, q1 } => {
                let q = q_cylinder(*r, Dirichlet, shift)?;
                Expanded::Single(join(&single(q1)?, &q, format!("R_M1r[r={r}]"))?)
            }
            DtnFamily::RM2r { r, q2 } => {
                let q = q_cylinder(*r, Dirichlet, shift)?;
                Expanded::Single(join(&single(q2)?, &q, format!("R_M2r[r={r}]"))?)
            }
            DtnFamily::Rmrr { r, q1, q2 } => {
                Expanded::Single(collar_block(*r, &single(q1)?, &single(q2)?)?)
            }
            DtnFamily::RqAbs { r, q } | DtnFamily::RqRel { r, q } => {
                let base = single(q)?;
                let open = q_cylinder(*r, Neumann, shift)?;
                let closed = q_cylinder(*r, Dirichlet, shift)?;
                let (t, n) = if matches!(self, DtnFamily::RqAbs { .. }) {
                    (open, closed)
                } else {
                    (closed, open)
                };
                Expanded::Graded {
                    tangential: join(&base, &t, format!("Rq_tan[r={r}]"))?,
                    normal: join(&base, &n, format!("Rq_du[r={r}]"))?,
                }
            }
        })
    }
}

/// Fiber value of a family at `lambda`, with the kernel branch at zero.
/// Form-block families return the diagonal pair (degree `q`, `du` block).
pub fn dtn_eigenvalue(family: &DtnFamily, lambda: f64) -> Result<FiberValue> {
    match family.expand(RayShift::zero())? {
        Expanded::Single(m) => m.eval(lambda),
        Expanded::Graded { tangential, normal } => {
            let (t, n) = (tangential.eval(lambda)?.det(), normal.eval(lambda)?.det());
            let zero = Complex64::new(0.0, 0.0);
            Ok(FiberValue::Block(Matrix2::new(t, zero, zero, n)))
        }
    }
}

/// Regularized `log Det` of a family over a cross-section.
pub fn dtn_log_det(family: &DtnFamily, model: &CrossSection) -> Result<MultiplierLogDet> {
    dtn_log_det_shifted(family, model, RayShift::zero())
}

pub fn dtn_log_det_shifted(
    family: &DtnFamily,
    model: &CrossSection,
    shift: RayShift,
) -> Result<MultiplierLogDet> {
    match family.expand(shift)? {
        Expanded::Single(m) => log_det_multiplier(model, &m),
        Expanded::Graded { tangential, normal } => {
            let CrossSection::FormGraded { base, degree } = model else {
                return invalid("form-block families need a form-graded cross-section");
            };
            let top = log_det_multiplier(&CrossSection::graded((**base).clone(), *degree), &tangential)?;
            let low = match degree.checked_sub(1) {
                Some(d) => log_det_multiplier(&CrossSection::graded((**base).clone(), d), &normal)?,
                None => MultiplierLogDet {
                    log_det: Complex64::new(0.0, 0.0),
                    error_bound: 0.0,
                },
            };
            Ok(MultiplierLogDet {
                log_det: top.log_det + low.log_det,
                error_bound: top.error_bound + low.error_bound,
            })
        }
    }
}

/// Smallest block eigenvalue over fibers below the cutoff, with a check
/// that fibers above it cannot go lower.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinEigen {
    pub value: f64,
    pub at_lambda: f64,
    /// Lower bound `sqrt(cutoff) - 1/(2r)` valid on all fibers above the cutoff.
    pub tail_lower_bound: f64,
    pub certified: bool,
}

pub fn min_block_eigen(family: &DtnFamily, model: &CrossSection, cutoff: f64) -> Result<MinEigen> {
    let DtnFamily::Rmrr { r, .. } = family else {
        return invalid("minimum block eigenvalue is defined for the collar block family");
    };
    let Expanded::Single(map) = family.expand(RayShift::zero())? else {
        unreachable!("collar block expands to one map");
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for e in model.eigenvalues(cutoff)? {
        let v = map.eval(e.value)?.symmetric_eigenvalues()[0];
        if v < best.0 {
            best = (v, e.value);
        }
    }
    // on one-sided maps bounded below by 0, Gershgorin gives sqrt(l) - h_r(l) >= sqrt(l) - 1/(2r)
    let tail_lower_bound = cutoff.sqrt() - 1.0 / (2.0 * r);
    Ok(MinEigen {
        value: best.0,
        at_lambda: best.1,
        tail_lower_bound,
        certified: tail_lower_bound >= best.0,
    })
}

/// Perturbation of `log Det A` by a trace-class `K` on one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBound {
    /// `Tr(K) / (2 lambda_0)`.
    pub bound: f64,
    /// `Tr(K) / lambda_0`, valid when `Tr(K) <= lambda_0`.
    pub rigorous_bound: f64,
    /// `|log Det(A + K) - log Det A|`.
    pub actual: f64,
    pub trace: f64,
    pub lambda0: f64,
}

pub fn perturbation_bound(a: &SpectralMap, k: &SpectralMap, model: &CrossSection) -> Result<PerturbationBound> {
    let decay = k
        .trace_decay
        .ok_or_else(|| Error::NotTraceClass(k.label.clone()))?;
    if a.rank != 1 || k.rank != 1 {
        return Err(Error::Unsupported("scalar maps only".into()));
    }
    let (cutoff, tail) = model
        .counting_bound()
        .root_exponential_cutoff(decay.rate, decay.amplitude, TAIL_TOL);
    let mut trace = CompensatedSum::new();
    let mut shift = CompensatedSum::new();
    let mut lambda0 = f64::INFINITY;
    for e in model.eigenvalues(cutoff.max(1.0))? {
        let on_kernel = e.value == 0.0;
        if on_kernel && a.kernel_value.is_none() {
            continue;
        }
        let av = a.eval(e.value)?.det();
        let kv = if on_kernel {
            match k.kernel_value {
                Some(v) => v.det(),
                None => continue,
            }
        } else {
            k.raw(e.value).det()
        };
        if av.re <= 0.0 {
            return Err(Error::Kernel(format!("`{}` is not positive", a.label)));
        }
        lambda0 = lambda0.min(av.re);
        let m = e.multiplicity as f64;
        trace.add_real(m * kv.norm());
        shift.add(ln_1p(kv / av) * m);
    }
    let tr = trace.value().re + tail;
    Ok(PerturbationBound {
        bound: tr / (2.0 * lambda0),
        rigorous_bound: tr / lambda0,
        actual: shift.value().norm(),
        trace: tr,
        lambda0,
    })
}
