//! Determinants of `-d^2/du^2 + Delta_Y (+ z)` on intervals and product
//! cylinders, by fiberwise regularization and, independently, through the
//! double spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{ln_1p, CompensatedSum};
use crate::spectra::{
    merge_sorted, CountingBound, CrossSection, Eigenvalue, HeatExpansion, HeatTerm, SpectralModel,
};
use crate::zeta::{zeta_laurent, zeta_shifted, RayShift, TAIL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Absolute,
    Relative,
}

/// Scalar boundary pairs, up to orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pair {
    DirichletDirichlet,
    DirichletNeumann,
    NeumannNeumann,
}

fn pair(left: BoundaryCondition, right: BoundaryCondition) -> Result<Pair> {
    use BoundaryCondition::*;
    match (left, right) {
        (Dirichlet, Dirichlet) => Ok(Pair::DirichletDirichlet),
        (Dirichlet, Neumann) | (Neumann, Dirichlet) => Ok(Pair::DirichletNeumann),
        (Neumann, Neumann) => Ok(Pair::NeumannNeumann),
        _ => Err(Error::Unsupported(format!(
            "{left:?}-{right:?} is not a scalar boundary pair"
        ))),
    }
}

/// `-d^2/du^2 + Delta_Y + shift` on `[0, length] x Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderOp {
    pub cross_section: CrossSection,
    pub length: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub shift: RayShift,
    #[serde(default)]
    pub form_degree: Option<u32>,
}

impl CylinderOp {
    pub fn new(
        cross_section: CrossSection,
        length: f64,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Self {
        Self {
            cross_section,
            length,
            bc_left,
            bc_right,
            shift: RayShift::zero(),
            form_degree: None,
        }
    }

    pub fn with_shift(mut self, shift: RayShift) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_degree(mut self, q: u32) -> Self {
        self.form_degree = Some(q);
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return invalid(format!("length must be positive, got {}", self.length));
        }
        self.cross_section.validate()
    }
}

/// A log-determinant with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    pub value: Complex64,
    pub error_bound: f64,
}

impl LogDet {
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            error_bound: 0.0,
        }
    }
}

impl std::ops::Add for LogDet {
    type Output = LogDet;
    fn add(self, rhs: LogDet) -> LogDet {
        LogDet {
            value: self.value + rhs.value,
            error_bound: self.error_bound + rhs.error_bound,
        }
    }
}

impl std::ops::Sub for LogDet {
    type Output = LogDet;
    fn sub(self, rhs: LogDet) -> LogDet {
        LogDet {
            value: self.value - rhs.value,
            error_bound: self.error_bound + rhs.error_bound,
        }
    }
}

fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `log Det(-d^2/du^2 + lambda + z)` on `[0, L]`.
pub fn interval_log_det(
    length: f64,
    lambda: f64,
    left: BoundaryCondition,
    right: BoundaryCondition,
    z: Complex64,
) -> Result<Complex64> {
    if !(length > 0.0) {
        return invalid(format!("length must be positive, got {length}"));
    }
    if !(lambda >= 0.0) {
        return invalid(format!("fiber eigenvalue must be nonnegative, got {lambda}"));
    }
    let mu = (z + lambda).sqrt();
    let x = mu * length;
    let zero = Complex64::new(0.0, 0.0);
    Ok(match pair(left, right)? {
        Pair::DirichletDirichlet => {
            if x.norm() < 1.0 {
                (sinhc(x) * (2.0 * length)).ln()
            } else {
                x + ln_1p(-(-2.0 * x).exp()) - mu.ln()
            }
        }
        Pair::DirichletNeumann => {
            if x.norm() < 1.0 {
                (x.cosh() * 2.0).ln()
            } else {
                x + ln_1p((-2.0 * x).exp())
            }
        }
        Pair::NeumannNeumann => {
            if mu == zero {
                return Err(Error::Kernel(
                    "constant mode under Neumann conditions at both ends".into(),
                ));
            }
            if x.norm() < 1.0 {
                (sinhc(x) * mu * mu * (2.0 * length)).ln()
            } else {
                x + ln_1p(-(-2.0 * x).exp()) + mu.ln()
            }
        }
    })
}

/// Regularized `sum mu_k` over the nonzero fibers of `Delta_Y + z`.
fn regularized_root_sum(model: &CrossSection, shift: &RayShift) -> Result<(Complex64, f64)> {
    let l = zeta_laurent(model, shift, -0.5, true)?;
    let c = 2.0 - 2.0 * 2f64.ln();
    Ok((l.finite + l.residue * c, l.error_bound))
}

/// Fiberwise regularized cylinder determinant.
pub fn cylinder_log_det(op: &CylinderOp) -> Result<LogDet> {
    op.check()?;
    if op.form_degree.is_some() {
        return form_cylinder_log_det(op);
    }
    let p = pair(op.bc_left, op.bc_right)?;
    let model = &op.cross_section;
    let l = op.length;
    let z = op.shift.value();
    let kernel = model.kernel_dim();
    let zero_shift = op.shift.is_zero();

    let mut total = CompensatedSum::new();
    let mut error = 0.0;

    let (root_sum, e1) = regularized_root_sum(model, &op.shift)?;
    total.add(root_sum * l);
    error += e1 * l;

    let zeta = zeta_shifted(model, &op.shift, true)?;
    error += 0.5 * zeta.error_bound;
    match p {
        Pair::DirichletDirichlet => total.add(zeta.zeta0_prime * 0.5),
        Pair::DirichletNeumann => {}
        Pair::NeumannNeumann => total.add(zeta.zeta0_prime * -0.5),
    }

    if zero_shift && kernel > 0 {
        let zero_fiber = match p {
            Pair::DirichletDirichlet => (2.0 * l).ln(),
            Pair::DirichletNeumann => 2f64.ln(),
            Pair::NeumannNeumann => {
                return Err(Error::Kernel(
                    "zero fiber under Neumann conditions at both ends".into(),
                ))
            }
        };
        total.add_real(kernel as f64 * zero_fiber);
    }

    let sign = if p == Pair::DirichletNeumann { 1.0 } else { -1.0 };
    let bound = model.counting_bound();
    let (cutoff, tail) = bound.root_exponential_cutoff(2.0 * l, 2.0, TAIL_TOL);
    for e in model.eigenvalues(cutoff)? {
        if zero_shift && e.value == 0.0 {
            continue;
        }
        let mu = (z + e.value).sqrt();
        total.add(ln_1p((-2.0 * l * mu).exp() * sign) * e.multiplicity as f64);
    }
    error += tail;

    Ok(LogDet {
        value: total.value(),
        error_bound: error,
    })
}

/// Absolute and relative conditions at the right end reduce to scalar pairs
/// on the degree-`q` part and the `du`-part of degree `q - 1`.
pub fn form_cylinder_log_det(op: &CylinderOp) -> Result<LogDet> {
    use BoundaryCondition::*;
    op.check()?;
    let q = op
        .form_degree
        .ok_or_else(|| Error::InvalidInput("form degree required".into()))?;
    if op.bc_left != Dirichlet {
        return Err(Error::Unsupported(
            "form cylinders take a Dirichlet far end".into(),
        ));
    }
    let base = match &op.cross_section {
        CrossSection::FormGraded { base, .. } => (**base).clone(),
        other => other.clone(),
    };
    let (tangential, normal) = match op.bc_right {
        Dirichlet => (Dirichlet, Dirichlet),
        Absolute => (Neumann, Dirichlet),
        Relative => (Dirichlet, Neumann),
        Neumann => {
            return Err(Error::Unsupported(
                "use absolute or relative conditions for forms".into(),
            ))
        }
    };
    let block = |degree: Option<u32>, bc: BoundaryCondition| -> Result<LogDet> {
        match degree {
            None => Ok(LogDet::exact(Complex64::new(0.0, 0.0))),
            Some(d) => {
                let scalar = CylinderOp {
                    cross_section: CrossSection::graded(base.clone(), d),
                    length: op.length,
                    bc_left: Dirichlet,
                    bc_right: bc,
                    shift: op.shift,
                    form_degree: None,
                };
                cylinder_log_det(&scalar)
            }
        }
    };
    Ok(block(Some(q), tangential)? + block(q.checked_sub(1), normal)?)
}

/// Spectrum of `-d^2/du^2` on `[0, L]`, as half of a circle of length `2L`
/// with the constant mode added or removed.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalModel {
    length: f64,
    pair: Pair,
    double: CrossSection,
}

impl IntervalModel {
    pub fn new(length: f64, left: BoundaryCondition, right: BoundaryCondition) -> Result<Self> {
        if !(length > 0.0) {
            return invalid(format!("length must be positive, got {length}"));
        }
        let pair = pair(left, right)?;
        let holonomy = if pair == Pair::DirichletNeumann { 0.5 } else { 0.0 };
        Ok(Self {
            length,
            pair,
            double: CrossSection::circle(2.0 * length, holonomy),
        })
    }

    fn constant_mode(&self) -> f64 {
        match self.pair {
            Pair::DirichletDirichlet => -0.5,
            Pair::DirichletNeumann => 0.0,
            Pair::NeumannNeumann => 0.5,
        }
    }
}

impl SpectralModel for IntervalModel {
    fn eigenvalues(&self, cutoff: f64) -> Result<Vec<Eigenvalue>> {
        let k = PI / self.length;
        let (start, offset) = match self.pair {
            Pair::DirichletDirichlet => (1u64, 0.0),
            Pair::DirichletNeumann => (0, 0.5),
            Pair::NeumannNeumann => (0, 0.0),
        };
        let mut out = Vec::new();
        let mut n = start;
        loop {
            let x = k * (n as f64 + offset);
            let lam = x * x;
            if lam > cutoff {
                break;
            }
            out.push(Eigenvalue::new(lam, 1));
            n += 1;
        }
        Ok(out)
    }

    fn heat_expansion(&self) -> Result<HeatExpansion> {
        Ok(HeatExpansion::from_terms([
            HeatTerm::new(Ratio::new(-1, 2), self.length / (4.0 * PI).sqrt()),
            HeatTerm::new(Ratio::from_integer(0), self.constant_mode()),
        ]))
    }

    fn heat_remainder(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.double.heat_remainder(w)? * 0.5)
    }

    fn counting_bound(&self) -> CountingBound {
        CountingBound {
            constant: self.length / PI + 1.0,
            exponent: 0.5,
        }
    }

    fn kernel_dim(&self) -> u32 {
        u32::from(self.pair == Pair::NeumannNeumann)
    }
}

/// The double spectrum of an interval times a cross-section.
pub struct ProductModel<'a> {
    pub interval: IntervalModel,
    pub fiber: &'a CrossSection,
}

impl SpectralModel for ProductModel<'_> {
    fn eigenvalues(&self, cutoff: f64) -> Result<Vec<Eigenvalue>> {
        let a = self.interval.eigenvalues(cutoff)?;
        let b = self.fiber.eigenvalues(cutoff)?;
        let mut out = Vec::new();
        for x in &a {
            for y in &b {
                let v = x.value + y.value;
                if v <= cutoff {
                    out.push(Eigenvalue::new(v, x.multiplicity * y.multiplicity));
                }
            }
        }
        Ok(merge_sorted(out))
    }

    fn heat_expansion(&self) -> Result<HeatExpansion> {
        let (kept, _) = self
            .interval
            .heat_expansion()?
            .product(&self.fiber.heat_expansion()?);
        Ok(kept)
    }

    fn heat_remainder(&self, w: Complex64) -> Result<Complex64> {
        let ei = self.interval.heat_expansion()?;
        let ey = self.fiber.heat_expansion()?;
        let (_, dropped) = ei.product(&ey);
        let ri = self.interval.heat_remainder(w)?;
        let ry = self.fiber.heat_remainder(w)?;
        Ok(ei.eval(w) * ry + ri * ey.eval(w) + ri * ry + dropped.eval(w))
    }

    fn counting_bound(&self) -> CountingBound {
        let a = self.interval.counting_bound();
        let b = self.fiber.counting_bound();
        CountingBound {
            constant: a.constant * b.constant,
            exponent: a.exponent + b.exponent,
        }
    }

    fn kernel_dim(&self) -> u32 {
        self.interval.kernel_dim() * self.fiber.kernel_dim()
    }
}

/// The same determinant as [`cylinder_log_det`], through the zeta function
/// of the double spectrum.
pub fn cylinder_log_det_2d(op: &CylinderOp) -> Result<LogDet> {
    op.check()?;
    if op.form_degree.is_some() {
        return Err(Error::Unsupported(
            "double-spectrum route covers scalar boundary pairs".into(),
        ));
    }
    let model = ProductModel {
        interval: IntervalModel::new(op.length, op.bc_left, op.bc_right)?,
        fiber: &op.cross_section,
    };
    let z = zeta_shifted(&model, &op.shift, false)?;
    Ok(LogDet {
        value: z.log_det,
        error_bound: z.error_bound,
    })
}
