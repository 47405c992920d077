//! Model cross-sections: eigenvalue streams, heat traces, small-time heat
//! expansions and kernel dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::exp_m1_m_linear;

/// Heat-expansion terms with power above this are folded into the remainder.
pub const HEAT_CUT: i64 = 1;

/// Relative tolerance used to merge numerically equal eigenvalues.
pub const MERGE_TOL: f64 = 1e-12;

/// One eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: u32,
}

impl Eigenvalue {
    pub fn new(value: f64, multiplicity: u32) -> Self {
        Self {
            value,
            multiplicity,
        }
    }
}

/// All eigenvalues up to `cutoff`, ascending, multiplicities merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueStream {
    pub entries: Vec<Eigenvalue>,
    pub cutoff: f64,
}

/// `b * w^power` in the small-time expansion of the heat trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTerm {
    pub power: Ratio<i64>,
    pub coeff: f64,
}

impl HeatTerm {
    pub fn new(power: Ratio<i64>, coeff: f64) -> Self {
        Self { power, coeff }
    }

    pub fn power_f64(&self) -> f64 {
        *self.power.numer() as f64 / *self.power.denom() as f64
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        if *self.power.numer() == 0 {
            Complex64::new(self.coeff, 0.0)
        } else {
            w.powf(self.power_f64()) * self.coeff
        }
    }
}

/// Heat-trace expansion through power [`HEAT_CUT`], powers strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatExpansion {
    pub terms: Vec<HeatTerm>,
}

impl HeatExpansion {
    pub fn from_terms(terms: impl IntoIterator<Item = HeatTerm>) -> Self {
        let mut out: Vec<HeatTerm> = Vec::new();
        for t in terms {
            match out.iter_mut().find(|u| u.power == t.power) {
                Some(u) => u.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        out.sort_by(|a, b| a.power.cmp(&b.power));
        Self { terms: out }
    }

    pub fn constant_index(&self) -> Option<usize> {
        self.terms.iter().position(|t| *t.power.numer() == 0)
    }

    /// Coefficient of `w^0`, zero when absent.
    pub fn constant(&self) -> f64 {
        self.constant_index().map_or(0.0, |i| self.terms[i].coeff)
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(w)).sum()
    }

    /// Formal product, split into the part kept through [`HEAT_CUT`] and the
    /// dropped higher terms.
    pub fn product(&self, other: &HeatExpansion) -> (HeatExpansion, HeatExpansion) {
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let t = HeatTerm::new(a.power + b.power, a.coeff * b.coeff);
                if t.power <= Ratio::from_integer(HEAT_CUT) {
                    kept.push(t);
                } else {
                    dropped.push(t);
                }
            }
        }
        (
            HeatExpansion::from_terms(kept),
            HeatExpansion::from_terms(dropped),
        )
    }
}

/// `N(x) <= constant * (1 + x)^exponent` for the eigenvalue counting function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingBound {
    pub constant: f64,
    pub exponent: f64,
}

impl CountingBound {
    pub const EMPTY: CountingBound = CountingBound {
        constant: 0.0,
        exponent: 0.0,
    };

    /// Bound on `sum_{lambda > cutoff} mult * e^(-c lambda) / (c lambda)`.
    /// Infinite when the cutoff is too low for the estimate to apply.
    pub fn exponential_tail(&self, cutoff: f64, c: f64) -> f64 {
        if self.constant == 0.0 {
            return 0.0;
        }
        if cutoff <= 0.0 || c * (1.0 + cutoff) < 2.0 * self.exponent {
            return f64::INFINITY;
        }
        2.0 * self.constant * (1.0 + cutoff).powf(self.exponent) * (-c * cutoff).exp()
            / (c * cutoff)
    }

    /// Smallest cutoff (from a doubling search) whose exponential tail is below `tol`.
    pub fn cutoff_for(&self, c: f64, tol: f64) -> f64 {
        let mut cutoff = (2.0 * self.exponent / c).max(1.0);
        while self.exponential_tail(cutoff, c) > tol {
            cutoff *= 1.25;
        }
        cutoff
    }

    /// Cutoff `Lambda` with `rate sqrt(Lambda) >= 40` past the monotone range
    /// of the counting estimate, and the bound
    /// `2 K C (1 + Lambda)^d e^(-rate sqrt(Lambda))` on
    /// `sum_{lambda > Lambda} mult * K e^(-rate sqrt(lambda))`.
    pub fn root_exponential_cutoff(&self, rate: f64, amplitude: f64, tol: f64) -> (f64, f64) {
        if self.constant == 0.0 {
            return (0.0, 0.0);
        }
        let mut root = (40.0 / rate).max(4.0 * self.exponent / rate).max(1.0);
        loop {
            let cutoff = root * root;
            let tail = 2.0
                * amplitude
                * self.constant
                * (1.0 + cutoff).powf(self.exponent)
                * (-rate * root).exp();
            if tail < tol || root > 1e6 {
                return (cutoff, tail);
            }
            root *= 1.1;
        }
    }

    pub fn add(self, other: CountingBound) -> CountingBound {
        CountingBound {
            constant: self.constant + other.constant,
            exponent: self.exponent.max(other.exponent),
        }
    }
}

/// Spectral data consumed by the zeta continuation.
pub trait SpectralModel: Sync {
    /// Eigenvalues `<= cutoff`, ascending, merged.
    fn eigenvalues(&self, cutoff: f64) -> Result<Vec<Eigenvalue>>;
    /// Expansion terms with power at most [`HEAT_CUT`].
    fn heat_expansion(&self) -> Result<HeatExpansion>;
    /// Heat trace at complex time `w` (`Re w > 0`) minus [`Self::heat_expansion`].
    fn heat_remainder(&self, w: Complex64) -> Result<Complex64>;
    fn counting_bound(&self) -> CountingBound;
    fn kernel_dim(&self) -> u32;
}

/// Rule-generated or listed spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExplicitSpectrum {
    /// `scale * (n + offset)`, `n >= 0`, each with the given multiplicity.
    Linear {
        offset: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one_u32")]
        multiplicity: u32,
    },
    /// A complete finite spectrum.
    Finite { eigenvalues: Vec<Eigenvalue> },
    /// A list known to be exhaustive only below `certified_up_to`, with no
    /// expansion rule.
    Truncated {
        eigenvalues: Vec<Eigenvalue>,
        certified_up_to: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

/// A model of the cut hypersurface through its explicit spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrossSection {
    Point,
    Circle {
        circumference: f64,
        #[serde(default)]
        holonomy: f64,
    },
    Explicit { spectrum: ExplicitSpectrum },
    FormGraded { base: Box<CrossSection>, degree: u32 },
    DirectSum { parts: Vec<CrossSection> },
}

impl CrossSection {
    pub fn circle(circumference: f64, holonomy: f64) -> Self {
        CrossSection::Circle {
            circumference,
            holonomy,
        }
    }

    pub fn linear(offset: f64) -> Self {
        CrossSection::Explicit {
            spectrum: ExplicitSpectrum::Linear {
                offset,
                scale: 1.0,
                multiplicity: 1,
            },
        }
    }

    pub fn finite(eigenvalues: Vec<Eigenvalue>) -> Self {
        CrossSection::Explicit {
            spectrum: ExplicitSpectrum::Finite { eigenvalues },
        }
    }

    pub fn graded(base: CrossSection, degree: u32) -> Self {
        CrossSection::FormGraded {
            base: Box::new(base),
            degree,
        }
    }

    pub fn empty() -> Self {
        CrossSection::DirectSum { parts: Vec::new() }
    }

    pub fn dim_y(&self) -> u32 {
        match self {
            CrossSection::Point => 0,
            CrossSection::Circle { .. } => 1,
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear { .. } => 2,
                _ => 0,
            },
            CrossSection::FormGraded { base, .. } => base.dim_y(),
            CrossSection::DirectSum { parts } => parts.iter().map(|p| p.dim_y()).max().unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CrossSection::Point => Ok(()),
            CrossSection::Circle {
                circumference,
                holonomy,
            } => {
                if !(circumference.is_finite() && *circumference > 0.0) {
                    return invalid(format!("circumference must be positive, got {circumference}"));
                }
                if !(0.0..1.0).contains(holonomy) {
                    return invalid(format!("holonomy must lie in [0, 1), got {holonomy}"));
                }
                Ok(())
            }
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    offset,
                    scale,
                    multiplicity,
                } => {
                    if !(offset.is_finite() && *offset >= 0.0) {
                        return invalid(format!("offset must be nonnegative, got {offset}"));
                    }
                    if !(scale.is_finite() && *scale > 0.0) {
                        return invalid(format!("scale must be positive, got {scale}"));
                    }
                    if *multiplicity == 0 {
                        return invalid("multiplicity must be at least 1");
                    }
                    Ok(())
                }
                ExplicitSpectrum::Finite { eigenvalues }
                | ExplicitSpectrum::Truncated { eigenvalues, .. } => check_list(eigenvalues),
            },
            CrossSection::FormGraded { base, .. } => base.validate(),
            CrossSection::DirectSum { parts } => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    /// The model actually carrying the spectrum after resolving form degrees.
    fn resolved(&self) -> Option<&CrossSection> {
        match self {
            CrossSection::FormGraded { base, degree } => {
                if *degree <= base.dim_y() {
                    base.resolved()
                } else {
                    None
                }
            }
            other => Some(other),
        }
    }

    /// Heat trace `sum mult * e^(-w lambda)` at complex time with `Re w > 0`.
    pub fn heat_trace_complex(&self, w: Complex64) -> Result<Complex64> {
        self.validate()?;
        if w.re <= 0.0 {
            return invalid(format!("heat time must have positive real part, got {w}"));
        }
        let Some(model) = self.resolved() else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        match model {
            CrossSection::Point => Ok(Complex64::new(1.0, 0.0)),
            CrossSection::Circle {
                circumference,
                holonomy,
            } => Ok(circle_trace(*circumference, *holonomy, w)),
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    offset,
                    scale,
                    multiplicity,
                } => {
                    let v = w * *scale;
                    Ok((-(v * *offset)).exp() / (1.0 - (-v).exp()) * *multiplicity as f64)
                }
                ExplicitSpectrum::Finite { eigenvalues } => Ok(eigenvalues
                    .iter()
                    .map(|e| (-(w * e.value)).exp() * e.multiplicity as f64)
                    .sum()),
                ExplicitSpectrum::Truncated { .. } => Err(Error::Uncertified(
                    "truncated spectrum has no complete heat trace".into(),
                )),
            },
            CrossSection::DirectSum { parts } => {
                parts.iter().map(|p| p.heat_trace_complex(w)).sum()
            }
            CrossSection::FormGraded { .. } => unreachable!("resolved"),
        }
    }

    pub fn heat_trace(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return invalid(format!("heat time must be positive, got {r}"));
        }
        Ok(self.heat_trace_complex(Complex64::new(r, 0.0))?.re)
    }
}

fn check_list(list: &[Eigenvalue]) -> Result<()> {
    for e in list {
        if !(e.value.is_finite() && e.value >= 0.0) {
            return invalid(format!("eigenvalues must be nonnegative, got {}", e.value));
        }
        if e.multiplicity == 0 {
            return invalid("multiplicities must be at least 1");
        }
    }
    Ok(())
}

/// Sorts ascending and merges eigenvalues equal up to [`MERGE_TOL`].
pub fn merge_sorted(mut list: Vec<Eigenvalue>) -> Vec<Eigenvalue> {
    list.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<Eigenvalue> = Vec::with_capacity(list.len());
    for e in list {
        match out.last_mut() {
            Some(last) if (e.value - last.value).abs() <= MERGE_TOL * last.value.max(1.0) => {
                last.multiplicity += e.multiplicity;
            }
            _ => out.push(e),
        }
    }
    out
}

fn circle_trace(ell: f64, alpha: f64, w: Complex64) -> Complex64 {
    let kappa = 2.0 * PI / ell;
    // Poisson side decays like exp(-ell^2 Re(1/w) m^2 / 4)
    let poisson_rate = ell * ell * w.inv().re / 4.0;
    let direct_rate = kappa * kappa * w.re;
    if poisson_rate >= direct_rate {
        circle_poisson_sum(ell, alpha, w, true)
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n = 0i64;
        loop {
            let mut fresh = Complex64::new(0.0, 0.0);
            for m in [n, -n - 1] {
                let x = kappa * (m as f64 + alpha);
                fresh += (-(w * (x * x))).exp();
            }
            acc += fresh;
            if fresh.norm() < 1e-18 * acc.norm().max(1e-300) || n > 100_000 {
                break;
            }
            n += 1;
        }
        acc
    }
}

/// Poisson-dual form of the circle heat trace; with `lead = false` the
/// leading `ell / sqrt(4 pi w)` is omitted.
fn circle_poisson_sum(ell: f64, alpha: f64, w: Complex64, lead: bool) -> Complex64 {
    let pref = ell / (4.0 * PI * w).sqrt();
    let q = w.inv() * (ell * ell / 4.0);
    let mut acc = Complex64::new(if lead { 1.0 } else { 0.0 }, 0.0);
    for m in 1..10_000 {
        let m = m as f64;
        let term = (-(q * (m * m))).exp() * (2.0 * (2.0 * PI * m * alpha).cos());
        acc += term;
        if (-(q.re * m * m)).exp() < 1e-20 {
            break;
        }
    }
    pref * acc
}

/// Taylor coefficients of `v e^(-beta v) / (1 - e^(-v))` through `v^n`.
pub fn linear_heat_coefficients(beta: f64, n: usize) -> Vec<f64> {
    // v / (e^v - 1) = sum B_k v^k / k!
    let mut bern = vec![0.0; n + 1];
    let mut fact = vec![1.0; n + 2];
    for k in 1..n + 2 {
        fact[k] = fact[k - 1] * k as f64;
    }
    for j in 0..=n {
        let mut s = if j == 0 { 1.0 } else { 0.0 };
        for k in 0..j {
            s -= bern[k] / fact[j - k + 1];
        }
        bern[j] = s;
    }
    let shift = 1.0 - beta;
    (0..=n)
        .map(|j| {
            (0..=j)
                .map(|k| bern[k] * shift.powi((j - k) as i32) / fact[j - k])
                .sum()
        })
        .collect()
}

fn linear_terms(beta: f64, scale: f64, mult: u32) -> Vec<HeatTerm> {
    let f = linear_heat_coefficients(beta, 2);
    (0..=2)
        .map(|j| {
            HeatTerm::new(
                Ratio::from_integer(j as i64 - 1),
                mult as f64 * f[j] * scale.powi(j as i32 - 1),
            )
        })
        .collect()
}

fn linear_remainder(beta: f64, scale: f64, mult: u32, w: Complex64) -> Complex64 {
    let v = w * scale;
    if v.norm() < 1.5 {
        let f = linear_heat_coefficients(beta, 60);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut vp = v * v;
        // coefficients decay like (2 pi)^-j and may vanish individually
        let ratio = v.norm() / (2.0 * PI);
        let mut bound = ratio * ratio;
        for fj in f.iter().skip(3) {
            acc += vp * *fj;
            bound *= ratio;
            if bound < 1e-20 {
                break;
            }
            vp *= v;
        }
        acc * mult as f64
    } else {
        let full = (-(v * beta)).exp() / (1.0 - (-v).exp()) * mult as f64;
        let lead: Complex64 = linear_terms(beta, scale, mult).iter().map(|t| t.eval(w)).sum();
        full - lead
    }
}

impl SpectralModel for CrossSection {
    fn eigenvalues(&self, cutoff: f64) -> Result<Vec<Eigenvalue>> {
        self.validate()?;
        if !(cutoff >= 0.0) {
            return invalid(format!("cutoff must be nonnegative, got {cutoff}"));
        }
        let Some(model) = self.resolved() else {
            return Ok(Vec::new());
        };
        let list = match model {
            CrossSection::Point => vec![Eigenvalue::new(0.0, 1)],
            CrossSection::Circle {
                circumference,
                holonomy,
            } => {
                let kappa = 2.0 * PI / circumference;
                let reach = (cutoff.sqrt() / kappa).floor() as i64 + 1;
                let mut list = Vec::new();
                for n in -reach - 1..=reach {
                    let x = kappa * (n as f64 + holonomy);
                    let lam = x * x;
                    if lam <= cutoff {
                        list.push(Eigenvalue::new(lam, 1));
                    }
                }
                list
            }
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    offset,
                    scale,
                    multiplicity,
                } => {
                    let top = (cutoff / scale - offset).floor();
                    if top < 0.0 {
                        Vec::new()
                    } else {
                        (0..=top as u64)
                            .map(|n| Eigenvalue::new(scale * (n as f64 + offset), *multiplicity))
                            .filter(|e| e.value <= cutoff)
                            .collect()
                    }
                }
                ExplicitSpectrum::Finite { eigenvalues } => eigenvalues
                    .iter()
                    .copied()
                    .filter(|e| e.value <= cutoff)
                    .collect(),
                ExplicitSpectrum::Truncated {
                    eigenvalues,
                    certified_up_to,
                } => {
                    if cutoff > *certified_up_to {
                        return Err(Error::Uncertified(format!(
                            "cutoff {cutoff} exceeds certified range {certified_up_to}"
                        )));
                    }
                    eigenvalues
                        .iter()
                        .copied()
                        .filter(|e| e.value <= cutoff)
                        .collect()
                }
            },
            CrossSection::DirectSum { parts } => {
                let mut list = Vec::new();
                for p in parts {
                    list.extend(p.eigenvalues(cutoff)?);
                }
                list
            }
            CrossSection::FormGraded { .. } => unreachable!("resolved"),
        };
        Ok(merge_sorted(list))
    }

    fn heat_expansion(&self) -> Result<HeatExpansion> {
        self.validate()?;
        let Some(model) = self.resolved() else {
            return Ok(HeatExpansion::default());
        };
        Ok(match model {
            CrossSection::Point => {
                HeatExpansion::from_terms([HeatTerm::new(Ratio::from_integer(0), 1.0)])
            }
            CrossSection::Circle { circumference, .. } => HeatExpansion::from_terms([
                HeatTerm::new(Ratio::new(-1, 2), circumference / (4.0 * PI).sqrt()),
            ]),
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    offset,
                    scale,
                    multiplicity,
                } => HeatExpansion::from_terms(linear_terms(*offset, *scale, *multiplicity)),
                ExplicitSpectrum::Finite { eigenvalues } => {
                    let count: u32 = eigenvalues.iter().map(|e| e.multiplicity).sum();
                    let first: f64 = eigenvalues
                        .iter()
                        .map(|e| e.value * e.multiplicity as f64)
                        .sum();
                    HeatExpansion::from_terms([
                        HeatTerm::new(Ratio::from_integer(0), count as f64),
                        HeatTerm::new(Ratio::from_integer(1), -first),
                    ])
                }
                ExplicitSpectrum::Truncated { .. } => {
                    return Err(Error::Uncertified(
                        "truncated spectrum declares no heat expansion".into(),
                    ))
                }
            },
            CrossSection::DirectSum { parts } => {
                let mut terms = Vec::new();
                for p in parts {
                    terms.extend(p.heat_expansion()?.terms);
                }
                HeatExpansion::from_terms(terms)
            }
            CrossSection::FormGraded { .. } => unreachable!("resolved"),
        })
    }

    fn heat_remainder(&self, w: Complex64) -> Result<Complex64> {
        self.validate()?;
        let zero = Complex64::new(0.0, 0.0);
        let Some(model) = self.resolved() else {
            return Ok(zero);
        };
        match model {
            CrossSection::Point => Ok(zero),
            CrossSection::Circle {
                circumference,
                holonomy,
            } => {
                if w.inv().re * circumference * circumference / 4.0 > 1.0 {
                    Ok(circle_poisson_sum(*circumference, *holonomy, w, false))
                } else {
                    let lead = circumference / (4.0 * PI * w).sqrt();
                    Ok(circle_trace(*circumference, *holonomy, w) - lead)
                }
            }
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    offset,
                    scale,
                    multiplicity,
                } => Ok(linear_remainder(*offset, *scale, *multiplicity, w)),
                ExplicitSpectrum::Finite { eigenvalues } => Ok(eigenvalues
                    .iter()
                    .map(|e| exp_m1_m_linear(-(w * e.value)) * e.multiplicity as f64)
                    .sum()),
                ExplicitSpectrum::Truncated { .. } => Err(Error::Uncertified(
                    "truncated spectrum declares no heat expansion".into(),
                )),
            },
            CrossSection::DirectSum { parts } => parts.iter().map(|p| p.heat_remainder(w)).sum(),
            CrossSection::FormGraded { .. } => unreachable!("resolved"),
        }
    }

    fn counting_bound(&self) -> CountingBound {
        let Some(model) = self.resolved() else {
            return CountingBound::EMPTY;
        };
        match model {
            CrossSection::Point => CountingBound {
                constant: 1.0,
                exponent: 0.0,
            },
            CrossSection::Circle { circumference, .. } => CountingBound {
                constant: circumference / PI + 1.0,
                exponent: 0.5,
            },
            CrossSection::Explicit { spectrum } => match spectrum {
                ExplicitSpectrum::Linear {
                    scale,
                    multiplicity,
                    ..
                } => CountingBound {
                    constant: *multiplicity as f64 * (1.0 / scale + 1.0),
                    exponent: 1.0,
                },
                ExplicitSpectrum::Finite { eigenvalues }
                | ExplicitSpectrum::Truncated { eigenvalues, .. } => CountingBound {
                    constant: eigenvalues.iter().map(|e| e.multiplicity as f64).sum(),
                    exponent: 0.0,
                },
            },
            CrossSection::DirectSum { parts } => parts
                .iter()
                .map(|p| p.counting_bound())
                .fold(CountingBound::EMPTY, CountingBound::add),
            CrossSection::FormGraded { .. } => unreachable!("resolved"),
        }
    }

    fn kernel_dim(&self) -> u32 {
        match self.eigenvalues(0.0) {
            Ok(list) => list
                .iter()
                .filter(|e| e.value == 0.0)
                .map(|e| e.multiplicity)
                .sum(),
            Err(_) => 0,
        }
    }
}

/// Exhaustive eigenvalue stream below `cutoff`.
pub fn enumerate_spectrum(model: &CrossSection, cutoff: f64) -> Result<EigenvalueStream> {
    Ok(EigenvalueStream {
        entries: model.eigenvalues(cutoff)?,
        cutoff,
    })
}

pub fn heat_expansion(model: &CrossSection) -> Result<HeatExpansion> {
    model.heat_expansion()
}

pub fn kernel_dim(model: &CrossSection) -> u32 {
    model.kernel_dim()
}
