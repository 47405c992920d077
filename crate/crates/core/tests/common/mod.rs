//! Closed-form oracles written independently of the library's special functions.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub const TAU: f64 = 2.0 * PI;

/// `B_{2k}` for `k = 1..`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Principal `log Gamma(z)` by upward recurrence and the Stirling series.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 20.0 {
        shift += w.ln();
        w += 1.0;
    }
    let mut series = (w - 0.5) * w.ln() - w + 0.5 * TAU.ln();
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2.0 * (k + 1) as f64;
        series += p * (b / (n * (n - 1.0)));
        p *= inv2;
    }
    series - shift
}

pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// Hurwitz `zeta(s, a)` for real `s != 1` by Euler-Maclaurin.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let n = 30usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (k as f64 + a).powf(-s);
    }
    let x = n as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) / (2k)!
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let m = 2 * (k + 1);
        sum += b / fact * rising * x.powf(-s - m as f64 + 1.0);
        rising *= (s + m as f64 - 1.0) * (s + m as f64);
        fact *= ((m + 1) * (m + 2)) as f64;
    }
    sum
}

pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// `d/ds zeta(s, a)` at `s = 0`, by central differences of the Euler-Maclaurin sum.
pub fn hurwitz_zeta_prime_at_zero(a: f64) -> f64 {
    let h = 1e-5;
    (hurwitz_zeta(h, a) - hurwitz_zeta(-h, a)) / (2.0 * h)
}

/// `eta(i) = Gamma(1/4) / (2 pi^(3/4))`.
pub fn eta_i() -> f64 {
    ln_gamma_real(0.25).exp() / (2.0 * PI.powf(0.75))
}

/// `eta(i)` from its product.
pub fn eta_i_product() -> f64 {
    let q = (-TAU).exp();
    let mut p = (-PI / 12.0).exp();
    let mut qk = q;
    while qk > 1e-300 {
        p *= 1.0 - qk;
        qk *= q;
    }
    p
}

/// `log Det'` of `-d^2/dy^2` on a circle of length `l` with holonomy `alpha`.
pub fn circle_log_det(l: f64, alpha: f64) -> f64 {
    let frac = alpha - alpha.floor();
    if frac == 0.0 {
        2.0 * l.ln()
    } else {
        (4.0 * (PI * frac).sin().powi(2)).ln()
    }
}

/// `log Det(-d^2/dy^2 + m^2)` on the twisted circle.
pub fn circle_log_det_massive(l: f64, alpha: f64, m: f64) -> f64 {
    (2.0 * ((m * l).cosh() - (TAU * alpha).cos())).ln()
}

/// `log prod (n + beta)` over `n >= 0`, `beta > 0`.
pub fn linear_log_det(beta: f64) -> f64 {
    0.5 * TAU.ln() - ln_gamma_real(beta)
}

/// `log prod (n + beta + z)` along a ray.
pub fn linear_log_det_shifted(beta: f64, z: Complex64) -> Complex64 {
    0.5 * TAU.ln() - ln_gamma(z + beta)
}

/// `log Det` of `-d^2/du^2 + mu^2` on `[0, l]`: Dirichlet at both ends or
/// Dirichlet-Neumann, from the Gelfand-Yaglom initial value problem.
pub fn interval_log_det(l: f64, mu: f64, neumann_end: bool) -> f64 {
    if mu == 0.0 {
        return if neumann_end { 2f64.ln() } else { (2.0 * l).ln() };
    }
    if neumann_end {
        (2.0 * (mu * l).cosh()).ln()
    } else {
        (2.0 * (mu * l).sinh() / mu).ln()
    }
}

pub fn assert_close(label: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got:.15e}, want {want:.15e}, diff {:.3e} > {tol:.1e}",
        (got - want).abs()
    );
}
