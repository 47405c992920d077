//! Analytic continuation of spectral zeta functions at `s = 0` (and at other
//! real points), determinants along rays, determinants of spectral
//! multipliers, and extraction of the constant term of a large-`t` expansion.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{
    ln_1p, lower_mellin, nonpositive_integer, reciprocal_gamma_jet, reciprocal_gamma_second,
    tanh_sinh, upper_mellin, CompensatedSum, Laurent,
};
use crate::spectra::{CountingBound, SpectralModel};

/// Target size of the discarded spectral tail.
pub const TAIL_TOL: f64 = 1e-15;
const QUAD_TOL: f64 = 1e-13;
const PARALLEL_THRESHOLD: usize = 4096;

/// The shift `e^(i theta) t` together with the rotation angle `phi` that
/// moves the rotated operator's spectrum into the right half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayShift {
    pub theta: f64,
    pub t: f64,
    pub phi: f64,
}

impl RayShift {
    pub fn new(theta: f64, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return invalid(format!("shift magnitude must be nonnegative, got {t}"));
        }
        if !(theta > -PI && theta <= PI) {
            return invalid(format!("ray angle must lie in (-pi, pi], got {theta}"));
        }
        if t > 0.0 && (theta.abs() - PI).abs() < 1e-12 {
            return invalid("ray angle pi meets the spectrum of a nonnegative operator");
        }
        let phi = if theta.abs() < FRAC_PI_2 { 0.0 } else { theta / 2.0 };
        Ok(Self { theta, t, phi })
    }

    pub fn zero() -> Self {
        Self {
            theta: 0.0,
            t: 0.0,
            phi: 0.0,
        }
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::new(0.0, t)
    }

    /// `e^(i theta) t`.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.t, self.theta)
    }

    /// Shift of the rotated operator `e^(-i phi) Delta + e^(i (theta - phi)) t`.
    pub fn rotated(&self) -> Complex64 {
        Complex64::from_polar(self.t, self.theta - self.phi)
    }

    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.phi)
    }

    pub fn is_zero(&self) -> bool {
        self.t == 0.0
    }
}

/// Zeta data at `s = 0` for a real nonnegative spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub zeta0: f64,
    pub zeta0_prime: f64,
    pub log_det: f64,
    pub error_bound: f64,
    pub excluded_kernel: bool,
}

/// Zeta data at `s = 0` for a shifted operator; `log_det = -zeta0_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexZeta {
    pub zeta0: Complex64,
    pub zeta0_prime: Complex64,
    pub log_det: Complex64,
    pub error_bound: f64,
    pub excluded_kernel: bool,
    pub phi: f64,
}

/// Laurent data of a zeta function at a real point `s0`:
/// `residue / (s - s0) + finite + O(s - s0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaLaurent {
    pub s0: f64,
    pub residue: Complex64,
    pub finite: Complex64,
    pub error_bound: f64,
}

struct Mellin {
    laurent: Laurent,
    error: f64,
    excluded: bool,
}

/// Laurent data of `Gamma(s) zeta(s)` at `s0` for the rotated operator.
fn mellin<M: SpectralModel + ?Sized>(
    model: &M,
    shift: &RayShift,
    s0: f64,
    exclude_kernel: bool,
) -> Result<Mellin> {
    let expansion = model.heat_expansion()?;
    let y0 = shift.rotated();
    let rot = shift.rotation();
    let kernel = model.kernel_dim();
    let zero = Complex64::new(0.0, 0.0);
    let excluded = if y0 == zero && kernel > 0 {
        if exclude_kernel {
            true
        } else {
            return Err(Error::Kernel(format!(
                "{kernel}-dimensional kernel with zero shift"
            )));
        }
    } else {
        false
    };

    let mut acc = Laurent::default();
    for term in &expansion.terms {
        let p = term.power_f64();
        let weight = rot.powf(p) * term.coeff;
        acc += lower_mellin(s0 + p, y0) * weight;
    }
    if excluded {
        acc += lower_mellin(s0, zero) * Complex64::new(-(kernel as f64), 0.0);
    }

    // remainder of the small-time expansion on (0, 1]
    model.heat_remainder(Complex64::new(0.5, 0.0) * rot)?;
    let integrand = |r: f64| -> Complex64 {
        let rem = model
            .heat_remainder(rot * r)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        rem * (-(y0 * r)).exp() * r.powf(s0 - 1.0)
    };
    let split = if y0.re > 10.0 { 10.0 / y0.re } else { 1.0 };
    let mut quad_error = 0.0;
    let mut remainder = Complex64::new(0.0, 0.0);
    for (a, b) in [(0.0, split), (split, 1.0)] {
        if b > a {
            let q = tanh_sinh(integrand, a, b, QUAD_TOL);
            if !(q.value.re.is_finite() && q.value.im.is_finite()) {
                return Err(Error::Unsupported(
                    "heat remainder could not be integrated".into(),
                ));
            }
            remainder += q.value;
            quad_error += q.error;
        }
    }
    acc.finite += remainder;

    // large-time part, spectral sum of int_1^inf r^(s0-1) e^(-r mu) dr
    let c = rot.re;
    let bound: CountingBound = model.counting_bound();
    let cutoff = bound.cutoff_for(c, TAIL_TOL);
    let tail = bound.exponential_tail(cutoff, c);
    let eigen = model.eigenvalues(cutoff)?;
    let eval = |e: &crate::spectra::Eigenvalue| -> Complex64 {
        if excluded && e.value == 0.0 {
            return zero;
        }
        let mu = rot * e.value + y0;
        upper_mellin(s0, mu) * e.multiplicity as f64
    };
    let terms: Vec<Complex64> = if eigen.len() > PARALLEL_THRESHOLD {
        eigen.par_iter().map(eval).collect()
    } else {
        eigen.iter().map(eval).collect()
    };
    let spectral: CompensatedSum = terms.into_iter().collect();
    acc.finite += spectral.value();

    Ok(Mellin {
        laurent: acc,
        error: quad_error + tail,
        excluded,
    })
}

/// Zeta data at `s = 0` of `Delta + e^(i theta) t`, with the branch fixed by
/// the rotation: `log Det = i phi zeta~(0) - zeta~'(0)`.
pub fn zeta_shifted<M: SpectralModel + ?Sized>(
    model: &M,
    shift: &RayShift,
    exclude_kernel: bool,
) -> Result<ComplexZeta> {
    let m = mellin(model, shift, 0.0, exclude_kernel)?;
    let (_, c1) = reciprocal_gamma_jet(0.0);
    let c2 = reciprocal_gamma_second(0);
    let zeta0 = m.laurent.pole * c1;
    let rotated_prime = m.laurent.finite * c1 + m.laurent.pole * c2;
    let i_phi = Complex64::new(0.0, shift.phi);
    let zeta0_prime = rotated_prime - i_phi * zeta0;
    Ok(ComplexZeta {
        zeta0,
        zeta0_prime,
        log_det: -zeta0_prime,
        error_bound: m.error,
        excluded_kernel: m.excluded,
        phi: shift.phi,
    })
}

/// `zeta(0)`, `zeta'(0)` and `log Det` of the unshifted operator.
pub fn zeta_invariants<M: SpectralModel + ?Sized>(
    model: &M,
    exclude_kernel: bool,
) -> Result<ZetaResult> {
    let z = zeta_shifted(model, &RayShift::zero(), exclude_kernel)?;
    Ok(ZetaResult {
        zeta0: z.zeta0.re,
        zeta0_prime: z.zeta0_prime.re,
        log_det: z.log_det.re,
        error_bound: z.error_bound,
        excluded_kernel: z.excluded_kernel,
    })
}

/// `log Det(Delta + e^(i theta) t)`.
pub fn log_det_shifted<M: SpectralModel + ?Sized>(model: &M, shift: &RayShift) -> Result<Complex64> {
    Ok(zeta_shifted(model, shift, false)?.log_det)
}

/// Laurent data of `zeta_{Delta + e^(i theta) t}` at a real point `s0`.
pub fn zeta_laurent<M: SpectralModel + ?Sized>(
    model: &M,
    shift: &RayShift,
    s0: f64,
    exclude_kernel: bool,
) -> Result<ZetaLaurent> {
    let m = mellin(model, shift, s0, exclude_kernel)?;
    let (a, b) = (m.laurent.pole, m.laurent.finite);
    let (res, fin) = match nonpositive_integer(s0) {
        Some(_) => {
            let (_, c1) = reciprocal_gamma_jet(s0);
            (Complex64::new(0.0, 0.0), a * c1)
        }
        None => {
            let (g0, g1) = reciprocal_gamma_jet(s0);
            (a * g0, b * g0 + a * g1)
        }
    };
    // undo the rotation: zeta(s) = e^(-i phi s) zeta~(s)
    let phase = Complex64::from_polar(1.0, -shift.phi * s0);
    let i_phi = Complex64::new(0.0, shift.phi);
    Ok(ZetaLaurent {
        s0,
        residue: phase * res,
        finite: phase * (fin - i_phi * res),
        error_bound: m.error,
    })
}

/// Superpolynomial decay certificate: `|log(f / asymptotic)| <= amplitude * e^(-rate sqrt(lambda))`
/// once `rate * sqrt(lambda) >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub rate: f64,
    pub amplitude: f64,
}

/// `f(lambda) ~ constant * (lambda + z)^(order / 2)` per fiber; block maps use
/// the same asymptotic on each diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub order: i32,
    pub constant: f64,
    pub shift: RayShift,
    pub decay: Decay,
}

/// An eigenvalue-wise function of `Delta_Y`, scalar (`rank = 1`) or block.
pub trait Multiplier: Sync {
    fn label(&self) -> String;
    fn rank(&self) -> u32;
    fn asymptotics(&self) -> Option<Asymptotics>;
    /// Determinant of the fiber value at a nonzero eigenvalue (the value itself for scalars).
    fn fiber_det(&self, lambda: f64) -> Complex64;
    /// Determinant on the kernel fiber; `None` restricts to nonzero modes.
    fn kernel_det(&self) -> Option<Complex64>;
}

/// Determinant of a multiplier with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierLogDet {
    pub log_det: Complex64,
    pub error_bound: f64,
}

/// `log Det f(Delta)` by splitting off `constant * (Delta + z)^(order/2)`:
/// `rank * (zeta(0) log c + (p/2) log Det(Delta + z))` plus the convergent
/// fiber sum of `log(f / asymptotic)` plus the kernel fibers.
pub fn log_det_multiplier<M, F>(model: &M, map: &F) -> Result<MultiplierLogDet>
where
    M: SpectralModel + ?Sized,
    F: Multiplier + ?Sized,
{
    let asym = map
        .asymptotics()
        .ok_or_else(|| Error::MissingAsymptotics(map.label()))?;
    if !(asym.constant > 0.0) {
        return invalid(format!("asymptotic constant must be positive for `{}`", map.label()));
    }
    let rank = map.rank() as f64;
    let kernel = model.kernel_dim();
    let z = asym.shift.value();
    let zero_shift = asym.shift.is_zero();
    let with_kernel = zero_shift && kernel > 0;

    let mut total = CompensatedSum::new();
    let mut error = 0.0;

    let zeta = zeta_shifted(model, &asym.shift, true)?;
    total.add(zeta.zeta0 * (rank * asym.constant.ln()));
    total.add(zeta.log_det * (rank * asym.order as f64 / 2.0));
    error += zeta.error_bound * rank * (1.0 + asym.constant.ln().abs());

    if with_kernel {
        let kd = map.kernel_det();
        if let Some(kd) = kd {
            if kd == Complex64::new(0.0, 0.0) {
                return Err(Error::Kernel(format!("`{}` vanishes on the kernel", map.label())));
            }
            total.add(kd.ln() * kernel as f64);
        }
    }

    let rate = asym.decay.rate;
    if !(rate > 0.0) {
        return Err(Error::MissingAsymptotics(map.label()));
    }
    let bound = model.counting_bound();
    let (cutoff, tail) = bound.root_exponential_cutoff(rate, asym.decay.amplitude, TAIL_TOL);
    let eigen = model.eigenvalues(cutoff)?;
    let scale = Complex64::new(asym.constant.powf(rank), 0.0);
    let eval = |e: &crate::spectra::Eigenvalue| -> Complex64 {
        if e.value == 0.0 && zero_shift {
            return Complex64::new(0.0, 0.0);
        }
        let base = (z + e.value).powf(rank * asym.order as f64 / 2.0) * scale;
        let ratio = map.fiber_det(e.value) / base;
        ln_1p(ratio - 1.0) * e.multiplicity as f64
    };
    let terms: Vec<Complex64> = if eigen.len() > PARALLEL_THRESHOLD {
        eigen.par_iter().map(eval).collect()
    } else {
        eigen.iter().map(eval).collect()
    };
    for t in terms {
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::Kernel(format!(
                "`{}` has a nonpositive fiber value",
                map.label()
            )));
        }
        total.add(t);
    }
    error += tail;

    Ok(MultiplierLogDet {
        log_det: total.value(),
        error_bound: error,
    })
}

/// One basis function `t^exponent * (log t)^[log]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFn {
    pub exponent: Ratio<i64>,
    pub log: bool,
}

impl BasisFn {
    pub fn eval(&self, t: f64) -> f64 {
        let e = *self.exponent.numer() as f64 / *self.exponent.denom() as f64;
        let v = t.powf(e);
        if self.log {
            v * t.ln()
        } else {
            v
        }
    }

    pub fn is_constant(&self) -> bool {
        *self.exponent.numer() == 0 && !self.log
    }
}

/// Fit basis for large-`t` expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBasis {
    pub functions: Vec<BasisFn>,
}

impl FitBasis {
    /// `t^(-p)` for heat powers `p = first, first + step, ...` (`count` of them),
    /// with `t^(-p) log t` added when `p` is a nonpositive integer. The
    /// constant is always included.
    pub fn from_heat_grid(first: Ratio<i64>, step: Ratio<i64>, count: usize) -> Self {
        let mut functions = Vec::new();
        let mut p = first;
        for _ in 0..count {
            let exponent = -p;
            if p.is_integer() && *p.numer() <= 0 {
                functions.push(BasisFn {
                    exponent,
                    log: true,
                });
            }
            functions.push(BasisFn {
                exponent,
                log: false,
            });
            p += step;
        }
        if !functions.iter().any(BasisFn::is_constant) {
            functions.push(BasisFn {
                exponent: Ratio::from_integer(0),
                log: false,
            });
        }
        Self { functions }
    }

    fn constant_index(&self) -> usize {
        self.functions
            .iter()
            .position(BasisFn::is_constant)
            .expect("basis carries a constant")
    }
}

/// Least-squares fit of a large-`t` expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub basis: FitBasis,
    pub coefficients: Vec<Complex64>,
    pub pi0: Complex64,
    pub residual_norm: f64,
    pub stability: f64,
    pub condition: f64,
}

/// Maximum admissible condition number of the normalized design matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Fits `value(t) ~ sum c_j basis_j(t)` and returns the constant coefficient.
pub fn asymptotic_zero_coeff(samples: &[(f64, Complex64)], basis: &FitBasis) -> Result<AsymptoticFit> {
    let n = basis.functions.len();
    if samples.len() < 2 * n {
        return invalid(format!(
            "{} samples for {n} basis functions; need at least {}",
            samples.len(),
            2 * n
        ));
    }
    let (tmin, tmax) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (t, _)| (lo.min(*t), hi.max(*t)));
    if !(tmin > 0.0) || tmax / tmin < 100.0 {
        return invalid("sampling window must be positive and span two decades");
    }
    let (coefficients, residual_norm, condition) = least_squares(samples, basis)?;
    let k = basis.constant_index();
    let pi0 = coefficients[k];

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = &sorted[sorted.len() / 2..];
    let stability = if half.len() >= n + 1 {
        match least_squares(half, basis) {
            Ok((c, _, _)) => (c[k] - pi0).norm(),
            Err(_) => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };

    Ok(AsymptoticFit {
        basis: basis.clone(),
        coefficients,
        pi0,
        residual_norm,
        stability,
        condition,
    })
}

fn least_squares(
    samples: &[(f64, Complex64)],
    basis: &FitBasis,
) -> Result<(Vec<Complex64>, f64, f64)> {
    let rows = samples.len();
    let cols = basis.functions.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (i, (t, _)) in samples.iter().enumerate() {
        for (j, f) in basis.functions.iter().enumerate() {
            a[(i, j)] = f.eval(*t);
        }
    }
    let mut norms = vec![0.0; cols];
    for j in 0..cols {
        let s = a.column(j).amax();
        norms[j] = if s > 0.0 { s } else { 1.0 };
        for i in 0..rows {
            a[(i, j)] /= norms[j];
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::Conditioning { condition });
    }
    let solve = |b: DVector<f64>| -> Result<DVector<f64>> {
        svd.solve(&b, 0.0)
            .map_err(|e| Error::Unsupported(format!("least squares failed: {e}")))
    };
    let re = solve(DVector::from_iterator(rows, samples.iter().map(|s| s.1.re)))?;
    let im = solve(DVector::from_iterator(rows, samples.iter().map(|s| s.1.im)))?;
    let coeffs: Vec<Complex64> = (0..cols)
        .map(|j| Complex64::new(re[j], im[j]) / norms[j])
        .collect();
    let mut residual = 0.0f64;
    for (t, v) in samples {
        let fit: Complex64 = basis
            .functions
            .iter()
            .zip(&coeffs)
            .map(|(f, c)| c * f.eval(*t))
            .sum();
        residual = residual.max((fit - v).norm());
    }
    Ok((coeffs, residual, condition))
}

/// Geometric sampling grid on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
