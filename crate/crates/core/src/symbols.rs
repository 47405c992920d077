//! Exact symbol expansion of the one-sided DtN family on a circle with a
//! potential `V(y)`, and a numerical check that the remainder
//! `Q - sqrt(Delta_Y + t)` is smoothing.
//!
//! A term is `c xi^a (xi^2 + t)^(-b/2) prod_i V^(d_i)(y)` with `c` a Gaussian
//! rational; `D_y = -i d/dy`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cylinder::BoundaryCondition;
use crate::dtn::q_cylinder;
use crate::error::{invalid, Result};
use crate::spectra::{CrossSection, SpectralModel};
use crate::zeta::RayShift;

pub type Gaussian = Complex<BigRational>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn gauss(re: BigRational, im: BigRational) -> Gaussian {
    Complex::new(re, im)
}

fn to_f64(q: &BigRational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTerm {
    pub coeff: Gaussian,
    pub xi_power: u32,
    pub root_power: i32,
    /// Derivative orders of the `V` factors, ascending.
    pub v_factors: Vec<u32>,
}

impl SymbolTerm {
    pub fn new(coeff: Gaussian, xi_power: u32, root_power: i32, mut v_factors: Vec<u32>) -> Self {
        v_factors.sort_unstable();
        Self {
            coeff,
            xi_power,
            root_power,
            v_factors,
        }
    }

    /// Total number of `y`-derivatives on the `V` factors.
    pub fn weight(&self) -> u32 {
        self.v_factors.iter().sum()
    }

    /// Homogeneity order in `(xi, sqrt t)`.
    pub fn order(&self) -> i32 {
        self.xi_power as i32 - self.root_power
    }

    fn key(&self) -> (u32, u32, i32, &[u32]) {
        (self.weight(), self.xi_power, self.root_power, &self.v_factors)
    }

    fn times(&self, other: &SymbolTerm) -> SymbolTerm {
        let mut v = self.v_factors.clone();
        v.extend_from_slice(&other.v_factors);
        SymbolTerm::new(
            &self.coeff * &other.coeff,
            self.xi_power + other.xi_power,
            self.root_power + other.root_power,
            v,
        )
    }

    pub fn eval(&self, potential: &TrigPotential, y: f64, xi: f64, t: f64) -> Complex64 {
        let c = Complex64::new(to_f64(&self.coeff.re), to_f64(&self.coeff.im));
        let rho2 = xi * xi + t;
        let v: f64 = self.v_factors.iter().map(|&d| potential.derivative(d, y)).product();
        c * xi.powi(self.xi_power as i32) * rho2.powf(-0.5 * self.root_power as f64) * v
    }
}

/// A finite sum of terms in canonical order with like terms merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Symbol {
    terms: Vec<SymbolTerm>,
}

impl Symbol {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = SymbolTerm>) -> Self {
        let mut list: Vec<SymbolTerm> = terms.into_iter().collect();
        list.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<SymbolTerm> = Vec::with_capacity(list.len());
        for term in list {
            match merged.last_mut() {
                Some(last) if last.key() == term.key() => last.coeff = &last.coeff + &term.coeff,
                _ => merged.push(term),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        Self { terms: merged }
    }

    /// `(xi^2 + t)^(1/2)`.
    pub fn root() -> Self {
        Self::from_terms([SymbolTerm::new(Gaussian::one(), 0, -1, Vec::new())])
    }

    /// `V(y)`.
    pub fn potential() -> Self {
        Self::from_terms([SymbolTerm::new(Gaussian::one(), 0, 0, vec![0])])
    }

    pub fn terms(&self) -> &[SymbolTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common homogeneity order, `None` for zero or mixed symbols.
    pub fn order(&self) -> Option<i32> {
        let first = self.terms.first()?.order();
        self.terms.iter().all(|t| t.order() == first).then_some(first)
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        Symbol::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scale(&self, c: &Gaussian) -> Symbol {
        Symbol::from_terms(self.terms.iter().map(|t| SymbolTerm {
            coeff: &t.coeff * c,
            ..t.clone()
        }))
    }

    pub fn mul(&self, other: &Symbol) -> Symbol {
        Symbol::from_terms(
            self.terms
                .iter()
                .flat_map(|a| other.terms.iter().map(move |b| a.times(b))),
        )
    }

    /// `d/dxi`, with `d (xi^2+t)^(-b/2) = -b xi (xi^2+t)^(-(b+2)/2)`.
    pub fn d_xi(&self) -> Symbol {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.xi_power > 0 {
                out.push(SymbolTerm {
                    coeff: t.coeff.scale(BigRational::from_integer(t.xi_power.into())),
                    xi_power: t.xi_power - 1,
                    ..t.clone()
                });
            }
            if t.root_power != 0 {
                out.push(SymbolTerm {
                    coeff: t.coeff.scale(BigRational::from_integer((-t.root_power).into())),
                    xi_power: t.xi_power + 1,
                    root_power: t.root_power + 2,
                    v_factors: t.v_factors.clone(),
                });
            }
        }
        Symbol::from_terms(out)
    }

    /// `D_y = -i d/dy` by the product rule over the `V` factors.
    pub fn d_y(&self) -> Symbol {
        let minus_i = gauss(BigRational::zero(), -BigRational::one());
        let mut out = Vec::new();
        for t in &self.terms {
            for i in 0..t.v_factors.len() {
                let mut v = t.v_factors.clone();
                v[i] += 1;
                out.push(SymbolTerm::new(&t.coeff * &minus_i, t.xi_power, t.root_power, v));
            }
        }
        Symbol::from_terms(out)
    }

    /// Drops terms that vanish for a constant potential.
    pub fn at_constant_potential(&self, zero: bool) -> Symbol {
        Symbol::from_terms(
            self.terms
                .iter()
                .filter(|t| if zero { t.v_factors.is_empty() } else { t.weight() == 0 })
                .cloned(),
        )
    }

    pub fn eval(&self, potential: &TrigPotential, y: f64, xi: f64, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(potential, y, xi, t)).sum()
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, c: &Gaussian, first: bool, bare: bool) -> fmt::Result {
    let (re, im) = (&c.re, &c.im);
    let sep = |f: &mut fmt::Formatter<'_>, neg: bool| -> fmt::Result {
        match (first, neg) {
            (true, true) => write!(f, "-"),
            (true, false) => Ok(()),
            (false, true) => write!(f, " - "),
            (false, false) => write!(f, " + "),
        }
    };
    if im.is_zero() {
        sep(f, re.is_negative())?;
        if bare && re.abs().is_one() {
            return Ok(());
        }
        write!(f, "{}", re.abs())
    } else if re.is_zero() {
        sep(f, im.is_negative())?;
        imaginary(f, &im.abs())
    } else {
        sep(f, false)?;
        let sign = if im.is_negative() { "-" } else { "+" };
        write!(f, "({re}{sign}")?;
        imaginary(f, &im.abs())?;
        write!(f, ")")
    }
}

/// `i`, `3i`, `i/4`, `3i/4`.
fn imaginary(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if !q.numer().is_one() {
        write!(f, "{}", q.numer())?;
    }
    write!(f, "i")?;
    if !q.denom().is_one() {
        write!(f, "/{}", q.denom())?;
    }
    Ok(())
}

impl fmt::Display for SymbolTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_coeff(f, &self.coeff, true, has_factors(self))?;
        fmt_factors(f, self)
    }
}

fn has_factors(t: &SymbolTerm) -> bool {
    t.xi_power > 0 || t.root_power != 0 || !t.v_factors.is_empty()
}

fn fmt_factors(f: &mut fmt::Formatter<'_>, t: &SymbolTerm) -> fmt::Result {
    let mut sep = if t.coeff.re.abs().is_one() && t.coeff.im.is_zero() { "" } else { " " };
    let mut put = |f: &mut fmt::Formatter<'_>, s: String| -> fmt::Result {
        write!(f, "{sep}{s}")?;
        sep = " ";
        Ok(())
    };
    match t.xi_power {
        0 => {}
        1 => put(f, "xi".into())?,
        a => put(f, format!("xi^{a}"))?,
    }
    for &d in &t.v_factors {
        match d {
            0 => put(f, "V".into())?,
            1..=3 => put(f, format!("V{}", "'".repeat(d as usize)))?,
            _ => put(f, format!("V^({d})"))?,
        }
    }
    match t.root_power {
        0 => Ok(()),
        b if b % 2 == 0 => put(f, format!("(xi^2+t)^({})", -b / 2)),
        b => put(f, format!("(xi^2+t)^({}/2)", -b)),
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            write_coeff(f, &t.coeff, i == 0, has_factors(t))?;
            fmt_factors(f, t)?;
        }
        Ok(())
    }
}

/// `V(y) = constant + sum_n cos[n-1] cos(n y) + sin[n-1] sin(n y)` on the
/// circle of length `2 pi`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPotential {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPotential {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|c| *c == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if std::iter::once(&self.constant).chain(&self.cos).chain(&self.sin).all(|c| c.is_finite()) {
            Ok(())
        } else {
            invalid("potential coefficients must be finite")
        }
    }

    /// `V^(d)(y)`.
    pub fn derivative(&self, d: u32, y: f64) -> f64 {
        let phase = d as f64 * std::f64::consts::FRAC_PI_2;
        let mut v = if d == 0 { self.constant } else { 0.0 };
        for (k, c) in self.cos.iter().enumerate() {
            let n = (k + 1) as f64;
            v += c * n.powi(d as i32) * (n * y + phase).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            let n = (k + 1) as f64;
            v += s * n.powi(d as i32) * (n * y + phase).sin();
        }
        v
    }
}

/// `q_1, q_0, ..., q_{1-K}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolExpansion {
    pub orders: Vec<Symbol>,
}

impl SymbolExpansion {
    pub fn depth(&self) -> usize {
        self.orders.len() - 1
    }

    /// `q_{1-j}`.
    pub fn order(&self, j: usize) -> &Symbol {
        &self.orders[j]
    }

    /// Partial sum `sum_{j <= depth} q_{1-j}` at a point.
    pub fn eval(&self, potential: &TrigPotential, y: f64, xi: f64, t: f64) -> Complex64 {
        self.orders.iter().map(|q| q.eval(potential, y, xi, t)).sum()
    }
}

impl fmt::Display for SymbolExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, q) in self.orders.iter().enumerate() {
            writeln!(f, "q_{} = {}", 1 - j as i64, q)?;
        }
        Ok(())
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Homogeneous parts of the symbol of `Q` solving `Q^2 + dQ/du = Delta_Y + t`
/// with `sigma(Delta_Y + t) = xi^2 + t + V`; `q_{1-k}` collects the order
/// `1 - k` part of the composition
/// `sum (1/w!) d_xi^w q_{1-i} D_y^w q_{1-j}` over `w + i + j = k`, `i, j < k`.
pub fn ricatti_expansion(potential: &TrigPotential, depth: usize) -> Result<SymbolExpansion> {
    if depth == 0 {
        return invalid("expansion depth must be at least 1");
    }
    potential.validate()?;
    let reduce = |s: Symbol| {
        if potential.is_constant() {
            s.at_constant_potential(potential.constant == 0.0)
        } else {
            s
        }
    };
    let half_inverse_root = Symbol::from_terms([SymbolTerm::new(gauss(rat(1, 2), BigRational::zero()), 0, 1, Vec::new())]);
    let mut q: Vec<Symbol> = vec![Symbol::root()];
    // xi_derivs[i][w] = d_xi^w q_{1-i}, y_derivs[j][w] = D_y^w q_{1-j}
    let mut xi_derivs: Vec<Vec<Symbol>> = vec![vec![q[0].clone()]];
    let mut y_derivs: Vec<Vec<Symbol>> = vec![vec![q[0].clone()]];
    for k in 1..=depth {
        for i in 0..k {
            while xi_derivs[i].len() <= k {
                let next = xi_derivs[i].last().unwrap().d_xi();
                xi_derivs[i].push(next);
                let next = y_derivs[i].last().unwrap().d_y();
                y_derivs[i].push(reduce(next));
            }
        }
        let mut sum = Symbol::zero();
        for i in 0..k {
            for j in 0..k {
                if i + j > k {
                    continue;
                }
                let w = k - i - j;
                let term = xi_derivs[i][w].mul(&y_derivs[j][w]);
                let c = gauss(BigRational::new(BigInt::one(), factorial(w)), BigRational::zero());
                sum = sum.add(&term.scale(&c));
            }
        }
        let minus_one = gauss(-BigRational::one(), BigRational::zero());
        let mut bracket = sum.scale(&minus_one);
        if k == 2 {
            bracket = bracket.add(&Symbol::potential());
        }
        let next = reduce(bracket.mul(&half_inverse_root));
        xi_derivs.push(vec![next.clone()]);
        y_derivs.push(vec![next.clone()]);
        q.push(next);
    }
    Ok(SymbolExpansion { orders: q })
}

/// Taylor coefficients of `sqrt(xi^2 + t + V)` in `V`, as an expansion of
/// the same shape: `binom(1/2, n) V^n (xi^2+t)^(1/2 - n)` at `j = 2n`.
pub fn sqrt_taylor(depth: usize) -> SymbolExpansion {
    let orders = (0..=depth)
        .map(|j| {
            if j % 2 == 1 {
                return Symbol::zero();
            }
            let n = j / 2;
            let mut c = BigRational::one();
            for m in 0..n {
                c *= rat(1 - 2 * m as i64, 2) / BigRational::from_integer(BigInt::from(m + 1));
            }
            Symbol::from_terms([SymbolTerm::new(
                gauss(c, BigRational::zero()),
                0,
                j as i32 - 1,
                vec![0; n],
            )])
        })
        .collect();
    SymbolExpansion { orders }
}

/// Weight applied to the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingWeight {
    /// `(1 + sqrt(lambda))^N`, a power of the symbol variable.
    Frequency,
    /// `(1 + lambda)^N`.
    Eigenvalue,
}

impl SmoothingWeight {
    fn eval(self, lambda: f64, n: u32) -> f64 {
        match self {
            SmoothingWeight::Frequency => (1.0 + lambda.sqrt()).powi(n as i32),
            SmoothingWeight::Eigenvalue => (1.0 + lambda).powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSup {
    pub order: u32,
    pub sup: f64,
    pub sup_lambda: f64,
    /// Weighted remainder is nonincreasing beyond the maximizer.
    pub decreasing_after: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub length: f64,
    pub t: f64,
    pub cutoff: f64,
    pub weight: SmoothingWeight,
    pub remainder_at_zero: f64,
    /// `(lambda, |Q(lambda) - sqrt(lambda + t)|)` over the fiber spectrum.
    pub remainder: Vec<(f64, f64)>,
    pub orders: Vec<WeightedSup>,
}

/// Remainder of the one-sided map on `[0, L] x Y` (Dirichlet far end) against
/// `sqrt(lambda + t)`, weighted by powers up to `order`.
pub fn smoothing_decay_check(
    model: &CrossSection,
    length: f64,
    t: f64,
    cutoff: f64,
    order: u32,
    weight: SmoothingWeight,
) -> Result<SmoothingReport> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("t must be positive, got {t}"));
    }
    if !(cutoff >= 0.0) {
        return invalid("cutoff must be nonnegative");
    }
    let map = q_cylinder(length, BoundaryCondition::Dirichlet, RayShift::real(t)?)?;
    let remainder: Vec<(f64, f64)> = model
        .eigenvalues(cutoff)?
        .into_iter()
        .map(|e| Ok((e.value, (map.eval(e.value)?.det() - (e.value + t).sqrt()).norm())))
        .collect::<Result<_>>()?;
    let at_zero = (map.eval(0.0)?.det() - t.sqrt()).norm();
    let orders = (0..=order)
        .map(|n| {
            let weighted: Vec<(f64, f64)> = remainder.iter().map(|&(l, r)| (l, r * weight.eval(l, n))).collect();
            let (idx, &(sup_lambda, sup)) = weighted
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap_or(Ordering::Equal))
                .unwrap_or((0, &(f64::NAN, f64::NAN)));
            let decreasing_after = weighted[idx.min(weighted.len())..]
                .windows(2)
                .all(|w| w[1].1 <= w[0].1);
            WeightedSup {
                order: n,
                sup,
                sup_lambda,
                decreasing_after,
            }
        })
        .collect();
    Ok(SmoothingReport {
        length,
        t,
        cutoff,
        weight,
        remainder_at_zero: at_zero,
        remainder,
        orders,
    })
}
