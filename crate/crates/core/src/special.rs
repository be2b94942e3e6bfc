//! Special functions used across the crate.
//!
//! Gamma comes from `statrs`; the Riemann zeta function, the Bessel functions
//! of half-integer and integer order, and the exponentially scaled modified
//! Bessel function of the second kind are evaluated here.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Apéry's constant ζ(3).
pub const APERY: f64 = 1.202_056_903_159_594_3;

/// ψ(1/2) = −γ − 2 log 2.
pub const DIGAMMA_HALF: f64 = -1.963_510_026_021_423_5;

/// Bernoulli numbers B_2, B_4, …, B_30.
const BERNOULLI_EVEN: [f64; 15] = [
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
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Riemann zeta function for real `s`.
///
/// Returns `+inf` at the pole `s = 1`. Arguments below 1/2 go through the
/// functional equation; the rest use Euler–Maclaurin summation with a fixed
/// head of 20 terms.
pub fn riemann_zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s == 0.0 {
        return -0.5;
    }
    if s < 0.5 {
        // trivial zeros
        if s < 0.0 && s == s.floor() && (s as i64) % 2 == 0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        return 2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma(one_minus) * riemann_zeta(one_minus);
    }
    if s > 40.0 {
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    const HEAD: usize = 20;
    let n = HEAD as f64;
    let mut sum: f64 = (1..HEAD).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0);
    sum += 0.5 * n.powf(-s);
    // rising factorial s (s+1) … (s+2k-2) / (2k)!, times N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * npow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let kk = (k + 1) as f64;
        rising *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        fact *= (2.0 * kk + 1.0) * (2.0 * kk + 2.0);
        npow /= n * n;
    }
    sum
}

/// Bessel function of the first kind J_{d/2}(x) for `x >= 0`.
pub fn bessel_j_half(d: u32, x: f64) -> f64 {
    let nu = d as f64 / 2.0;
    if x == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    if d % 2 == 1 {
        let n = (d - 1) / 2;
        if x <= n as f64 + 1.0 {
            return bessel_j_series(nu, x);
        }
        // spherical Bessel recurrence, stable for x > n
        let (s, c) = x.sin_cos();
        let mut jm = s / x;
        if n == 0 {
            return (2.0 * x / PI).sqrt() * jm;
        }
        let mut j = s / (x * x) - c / x;
        for k in 1..n {
            let next = (2 * k + 1) as f64 / x * j - jm;
            jm = j;
            j = next;
        }
        (2.0 * x / PI).sqrt() * j
    } else {
        let n = d / 2;
        if x <= (n as f64).max(12.0) {
            return bessel_j_series(nu, x);
        }
        let mut jm = bessel_j_hankel(0.0, x);
        let mut j = bessel_j_hankel(1.0, x);
        if n == 0 {
            return jm;
        }
        for k in 1..n {
            let next = 2.0 * k as f64 / x * j - jm;
            jm = j;
            j = next;
        }
        j
    }
}

fn bessel_j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let q = -half * half;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if k > half && term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion, accurate to ~1e-11 for x >= 12.
fn bessel_j_hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > prev || a.abs() < 1e-17 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Exponentially scaled modified Bessel function e^x K_ν(x), x > 0.
///
/// Trapezoidal rule on K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt; the integrand
/// is entire and doubly-exponentially decaying, so the rule converges to
/// machine precision with a few dozen nodes.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let h = 0.5 * (1.0 / x.sqrt()).min(0.5);
    let mut total = 0.5;
    let mut t = h;
    loop {
        let sh = (0.5 * t).sinh();
        let v = (-2.0 * x * sh * sh).exp() * (nu * t).cosh();
        total += v;
        if v < 1e-17 * total {
            break;
        }
        t += h;
    }
    total * h
}
