//! Numerical building blocks shared by the spectral modules: compensated
//! summation, double-exponential quadrature and the incomplete Mellin
//! integrals that carry the analytic continuation at small heat time.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated accumulator. Reduction order is the caller's
/// iteration order, so results are bit-stable for a fixed input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        self.sum = Complex64::new(
            neumaier(&mut self.comp.re, self.sum.re, x.re),
            neumaier(&mut self.comp.im, self.sum.im, x.im),
        );
    }

    pub fn add_real(&mut self, x: f64) {
        self.add(Complex64::new(x, 0.0));
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier(comp: &mut f64, sum: f64, x: f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    if x > 0.0 {
        statrs::function::gamma::digamma(x)
    } else {
        // reflection: psi(1-x) - psi(x) = pi cot(pi x)
        statrs::function::gamma::digamma(1.0 - x) - PI / (PI * x).tan()
    }
}

/// `Some(n)` when `a == -n` for a nonnegative integer `n`.
pub fn nonpositive_integer(a: f64) -> Option<u32> {
    let r = a.round();
    if (a - r).abs() < 1e-12 && r <= 0.0 {
        Some((-r) as u32)
    } else {
        None
    }
}

fn harmonic(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Laurent data `pole/eps + finite + O(eps)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Laurent {
    pub pole: Complex64,
    pub finite: Complex64,
}

impl std::ops::AddAssign for Laurent {
    fn add_assign(&mut self, rhs: Self) {
        self.pole += rhs.pole;
        self.finite += rhs.finite;
    }
}

impl std::ops::Mul<Complex64> for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Complex64) -> Laurent {
        Laurent {
            pole: self.pole * rhs,
            finite: self.finite * rhs,
        }
    }
}

const SERIES_RADIUS: f64 = 2.0;

/// Series `sum_k (-y)^k / (k! (a + k))`, skipping the index with `a + k = 0`,
/// which is returned separately as `(-y)^n / n!`.
fn lower_series(a: f64, y: Complex64) -> (Complex64, Complex64) {
    let pole_index = nonpositive_integer(a);
    let mut power = Complex64::new(1.0, 0.0);
    let mut acc = CompensatedSum::new();
    let mut pole = Complex64::new(0.0, 0.0);
    for k in 0..200u32 {
        if k > 0 {
            power *= -y / k as f64;
        }
        if Some(k) == pole_index {
            pole = power;
            continue;
        }
        let term = power / (a + k as f64);
        acc.add(term);
        if k as f64 > y.norm() + 2.0 && term.norm() <= 1e-18 * acc.value().norm().max(1e-300) {
            break;
        }
    }
    (pole, acc.value())
}

/// `int_1^inf r^(a-1) e^(-r y) dr` for `Re y > 0` (or `y > 0`), `a <= 1`.
pub fn upper_mellin(a: f64, y: Complex64) -> Complex64 {
    if y.norm() >= SERIES_RADIUS {
        generalized_exp_integral(1.0 - a, y)
    } else {
        let (pole, lower) = lower_series(a, y);
        match nonpositive_integer(a) {
            Some(n) => pole * (digamma(n as f64 + 1.0) - y.ln()) - lower,
            None => y.powf(-a) * gamma(a) - lower,
        }
    }
}

/// `E_n(y) = int_1^inf r^-n e^(-r y) dr` by the modified Lentz continued fraction.
fn generalized_exp_integral(n: f64, y: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut b = y + n;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..10_000 {
        let i = i as f64;
        let an = -i * (n - 1.0 + i);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-y).exp()
}

/// Laurent expansion in `eps` of `int_0^1 r^(a+eps-1) e^(-r y) dr`.
pub fn lower_mellin(a: f64, y: Complex64) -> Laurent {
    let zero = Complex64::new(0.0, 0.0);
    if y == zero {
        return if nonpositive_integer(a) == Some(0) {
            Laurent {
                pole: Complex64::new(1.0, 0.0),
                finite: zero,
            }
        } else {
            Laurent {
                pole: zero,
                finite: Complex64::new(1.0 / a, 0.0),
            }
        };
    }
    if y.norm() < SERIES_RADIUS {
        let (pole, finite) = lower_series(a, y);
        return Laurent { pole, finite };
    }
    match nonpositive_integer(a) {
        Some(n) => {
            let mut lead = Complex64::new(1.0, 0.0);
            for k in 1..=n {
                lead *= -y / k as f64;
            }
            Laurent {
                pole: lead,
                finite: lead * (digamma(n as f64 + 1.0) - y.ln()) - upper_mellin(a, y),
            }
        }
        None => Laurent {
            pole: zero,
            finite: y.powf(-a) * gamma(a) - upper_mellin(a, y),
        },
    }
}

/// Value and first derivative of `1/Gamma(s)` at `s`.
pub fn reciprocal_gamma_jet(s: f64) -> (f64, f64) {
    match nonpositive_integer(s) {
        Some(n) => {
            // 1/Gamma(-n + e) = (-1)^n n! e + O(e^2)
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            (0.0, sign * fact)
        }
        None => {
            let g = gamma(s);
            (1.0 / g, -digamma(s) / g)
        }
    }
}

/// Second-order term of `1/Gamma(s)` at a nonpositive integer `-n`:
/// `1/Gamma(-n + e) = c1 e + c2 e^2 + ...`, returns `c2`.
pub fn reciprocal_gamma_second(n: u32) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // Gamma(-n+e) = (-1)^n/(n! e) (1 + psi(n+1) e + ...)
    -sign * fact * digamma(n as f64 + 1.0)
}

/// Digamma at positive integers, exact harmonic form.
pub fn digamma_int(n: u32) -> f64 {
    harmonic(n - 1) - EULER_GAMMA
}

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
}

/// Tanh-sinh quadrature of a complex-valued integrand on `[a, b]`.
/// Endpoint singularities of integrable type are handled by the
/// double-exponential node clustering.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Quadrature
where
    F: Fn(f64) -> Complex64,
{
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let node = |t: f64| -> (f64, f64, f64) {
        let u = FRAC_PI_2 * t.sinh();
        // distance of the node from each endpoint, computed without cancellation
        let dist = (b - a) / (1.0 + (2.0 * u).exp());
        let w = half * FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        (a + dist, b - dist, w)
    };
    let pair = |t: f64| -> Option<Complex64> {
        let (xl, xr, w) = node(t);
        let left = xl > a;
        let right = xr < b;
        if w < 1e-300 || !(left || right) {
            return None;
        }
        let mut v = Complex64::new(0.0, 0.0);
        if left {
            v += eval(xl);
        }
        if right {
            v += eval(xr);
        }
        Some(v * w)
    };

    let mut h = 1.0;
    let mut total = CompensatedSum::new();
    total.add(eval(0.5 * (a + b)) * (half * FRAC_PI_2));
    let mut k = 1u32;
    loop {
        let t = k as f64 * h;
        match pair(t) {
            Some(v) => total.add(v),
            None => break,
        }
        k += 1;
    }
    let mut estimate = total.value() * h;
    let mut error = f64::INFINITY;

    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1u32;
        loop {
            let t = k as f64 * h;
            match pair(t) {
                Some(v) => total.add(v),
                None => break,
            }
            k += 2;
        }
        let next = total.value() * h;
        error = (next - estimate).norm();
        estimate = next;
        if error <= tol * estimate.norm().max(1.0) {
            break;
        }
    }
    Quadrature {
        value: estimate,
        error,
    }
}

/// `e^x - 1 - x`, accurate for small `|x|`.
pub fn exp_m1_m_linear(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let mut term = x * x * 0.5;
        let mut acc = term;
        for k in 3..40 {
            term *= x / k as f64;
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    } else {
        x.exp() - 1.0 - x
    }
}

/// `log(1 + x)` for complex `x`, accurate for small `|x|`.
pub fn ln_1p(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let mut term = x;
        let mut acc = x;
        for k in 2..12 {
            term *= -x;
            acc += term / k as f64;
        }
        acc
    } else {
        (x + 1.0).ln()
    }
}
