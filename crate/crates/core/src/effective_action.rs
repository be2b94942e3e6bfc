//! Zeta-regularized one-loop effective action and its high-temperature
//! expansion coefficients.
//!
//! Throughout, β̄ = β/2π and the heat-kernel coefficients A_k enter through
//! [`HeatKernelCoeffs`].

use std::f64::consts::PI;

use nalgebra::{Matrix5, Vector5};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::special::{gamma, riemann_zeta, DIGAMMA_HALF, EULER_GAMMA};
use crate::spectral::HeatKernelCoeffs;

/// Closest admissible distance to a pole of any factor.
const POLE_GUARD: f64 = 1e-6;

/// Mass, chemical potential, inverse temperature and measure scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldParams {
    pub m: f64,
    pub mu: f64,
    pub beta: f64,
    pub l_scale: f64,
}

impl FieldParams {
    pub fn new(m: f64, mu: f64, beta: f64, l_scale: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() || !mu.is_finite() {
            return invalid("mass must be >= 0 and chemical potential finite");
        }
        if !(beta > 0.0) || !(l_scale > 0.0) {
            return invalid("beta and l_scale must be positive");
        }
        Ok(Self { m, mu, beta, l_scale })
    }

    /// β/2π.
    pub fn beta_bar(&self) -> f64 {
        self.beta / (2.0 * PI)
    }

    /// m² − μ².
    pub fn gap2(&self) -> f64 {
        self.m * self.m - self.mu * self.mu
    }
}

/// 1/Γ(s), zero at the poles of Γ.
fn rgamma(s: f64) -> f64 {
    if s <= 0.0 && s == s.round() {
        0.0
    } else {
        1.0 / gamma(s)
    }
}

fn near_nonpositive_integer(x: f64) -> bool {
    x < POLE_GUARD && (x - x.round()).abs() < POLE_GUARD
}

fn pole(s: f64, at: f64) -> Error {
    Error::Pole { s, distance: (s - at).abs() }
}

/// ζ1(s) = Σ_k Γ(s − k/2)/Γ(s) · A_k (m² − μ²)^{k/2 − s}.
pub fn zeta1(s: f64, coeffs: &HeatKernelCoeffs, fp: &FieldParams) -> Result<f64> {
    let gap = fp.gap2();
    if gap < 0.0 {
        return invalid("zeta1 needs |mu| <= m");
    }
    let mut total = 0.0;
    for (k, &a) in coeffs.as_array().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let half = k as f64 / 2.0;
        let ratio = match k {
            0 => 1.0,
            2 => {
                if (s - 1.0).abs() < POLE_GUARD {
                    return Err(pole(s, 1.0));
                }
                1.0 / (s - 1.0)
            }
            _ => {
                if near_nonpositive_integer(s - half) {
                    return Err(pole(s, half + (s - half).round()));
                }
                gamma(s - half) * rgamma(s)
            }
        };
        if gap == 0.0 {
            if half - s < 0.0 {
                return Err(Error::Divergent("zeta1"));
            }
            if half - s > 0.0 {
                continue;
            }
        }
        total += ratio * a * gap.powf(half - s);
    }
    Ok(total)
}

/// Pieces of the expanded ζ2, separated so that s = 0 can be handled exactly.
struct Zeta2Parts {
    /// Groups multiplied by 1/Γ(s): A3, A2 and A1/A3 brackets.
    h: f64,
    /// ζ(2s)[A0 − A2(m² + (2s−1)μ²)], whose Γ(s) cancels.
    x_group: f64,
    /// β̄ Γ(s+½) Y(s), multiplied by ζ(2s+1)/Γ(s).
    y_group: f64,
}

fn zeta2_parts(s: f64, c: &HeatKernelCoeffs, fp: &FieldParams) -> Zeta2Parts {
    let bb = fp.beta_bar();
    let (m2, mu2) = (fp.m * fp.m, fp.mu * fp.mu);
    let h = c.a3 / bb.powi(3) * PI.powf(2.0 * s - 3.5) * riemann_zeta(4.0 - 2.0 * s) * gamma(2.0 - s)
        + c.a2 / (bb * bb) * PI.powf(2.0 * s - 2.5) * riemann_zeta(3.0 - 2.0 * s) * gamma(1.5 - s)
        + PI.powf(2.0 * s - 1.5) / bb
            * riemann_zeta(2.0 - 2.0 * s)
            * gamma(1.0 - s)
            * (c.a1 - c.a3 * (m2 + (2.0 * s - 2.0) * mu2));
    let x_group = riemann_zeta(2.0 * s) * (c.a0 - c.a2 * (m2 + (2.0 * s - 1.0) * mu2));
    let y =
        c.a3 * (fp.gap2().powi(2) / 2.0 + (s + 1.5) * (s + 0.5) * 2.0 * mu2 * mu2 / 3.0) - c.a1 * (m2 + 2.0 * s * mu2);
    Zeta2Parts { h, x_group, y_group: bb * gamma(s + 0.5) * y }
}

/// ζ2(s) in the small-β̄ expansion, through first order in β̄.
///
/// s = 0 is a removable point and is evaluated through its limit.
pub fn zeta2_expanded(s: f64, coeffs: &HeatKernelCoeffs, fp: &FieldParams) -> Result<f64> {
    // poles of ζ(4−2s), ζ(3−2s), ζ(2−2s)=ζ(2s) partner, Γ(2−s), Γ(3/2−s), Γ(1−s), Γ(s+½)
    for p in [1.5, 1.0, 0.5] {
        if (s - p).abs() < POLE_GUARD {
            return Err(pole(s, p));
        }
    }
    if s >= 1.0 - POLE_GUARD && (s - s.round()).abs() < POLE_GUARD {
        return Err(pole(s, s.round()));
    }
    if s >= 1.5 - POLE_GUARD && (s - 0.5 - (s - 0.5).round()).abs() < POLE_GUARD {
        return Err(pole(s, 0.5 + (s - 0.5).round()));
    }
    if near_nonpositive_integer(s + 0.5) {
        return Err(pole(s, (s + 0.5).round() - 0.5));
    }
    let parts = zeta2_parts(s, coeffs, fp);
    let bb = fp.beta_bar();
    // ζ(2s+1)/Γ(s) → 1/2 at s = 0
    let zr = if s.abs() < POLE_GUARD {
        0.5 + 1.5 * EULER_GAMMA * s
    } else if near_nonpositive_integer(s) {
        // 1/Γ vanishes, ζ(2s+1) finite for s ≤ −1
        0.0
    } else {
        riemann_zeta(2.0 * s + 1.0) * rgamma(s)
    };
    Ok(2.0 * bb.powf(2.0 * s) * (rgamma(s) * parts.h + parts.x_group + zr * parts.y_group))
}

/// Exact s-derivative of [`zeta2_expanded`] at s = 0.
pub fn zeta2_expanded_derivative_at_zero(coeffs: &HeatKernelCoeffs, fp: &FieldParams) -> f64 {
    let bb = fp.beta_bar();
    let ln_bb = bb.ln();
    let (m2, mu2) = (fp.m * fp.m, fp.mu * fp.mu);
    let parts = zeta2_parts(0.0, coeffs, fp);
    // d/ds[β̄^{2s} ζ(2s) X(s)] with ζ(0) = −½, ζ'(0) = −½ log 2π
    let x0 = coeffs.a0 - coeffs.a2 * (m2 - mu2);
    let dx = -2.0 * coeffs.a2 * mu2;
    let zeta0_prime = -0.5 * (2.0 * PI).ln();
    let d_x = 2.0 * ln_bb * (-0.5) * x0 + 2.0 * zeta0_prime * x0 - 0.5 * dx;
    // d/ds[β̄^{2s+1} (ζ(2s+1)/Γ(s)) Γ(s+½) Y(s)] with ζ(2s+1)/Γ(s) = ½ + (3γ/2)s + …
    let y0 = coeffs.a3 * (fp.gap2().powi(2) / 2.0 + 0.5 * mu2 * mu2) - coeffs.a1 * m2;
    let dy = 4.0 / 3.0 * coeffs.a3 * mu2 * mu2 - 2.0 * coeffs.a1 * mu2;
    let sqpi = PI.sqrt();
    let d_y = bb
        * (2.0 * ln_bb * 0.5 * sqpi * y0
            + 1.5 * EULER_GAMMA * sqpi * y0
            + 0.5 * sqpi * DIGAMMA_HALF * y0
            + 0.5 * sqpi * dy);
    2.0 * (parts.h + d_x + d_y)
}

/// ζ2(s) from the double series over p (powers of m² − μ²) and q (powers of
/// μ²), truncated at p + q ≤ `order`.
pub fn zeta2_double_sum(s: f64, coeffs: &HeatKernelCoeffs, fp: &FieldParams, order: usize) -> Result<f64> {
    let bb = fp.beta_bar();
    let gap = fp.gap2();
    let mut total = 0.0;
    for (k, &a) in coeffs.as_array().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let kf = k as f64;
        for p in 0..=order {
            for q in 0..=(order - p) {
                let (pf, qf) = (p as f64, q as f64);
                let zarg = 2.0 * s - kf + 2.0 * pf + 2.0 * qf;
                if (zarg - 1.0).abs() < 2.0 * POLE_GUARD {
                    return Err(pole(s, (1.0 + kf - 2.0 * pf - 2.0 * qf) / 2.0));
                }
                let garg = s - kf / 2.0 + pf + 2.0 * qf;
                // Γ(garg)/Γ(s); only k = p = q = 0 hits Γ(s) itself
                let gratio = if k == 0 && p == 0 && q == 0 {
                    1.0
                } else {
                    if near_nonpositive_integer(garg) {
                        return Err(pole(s, s - garg + garg.round()));
                    }
                    gamma(garg) * rgamma(s)
                };
                let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                let fact = gamma(pf + 1.0) * gamma(2.0 * qf + 1.0);
                let w =
                    sign / fact * gap.powi(p as i32) * bb.powi(2 * p as i32) * (2.0 * fp.mu * bb).powi(2 * q as i32);
                total += a / bb.powi(k as i32) * riemann_zeta(zarg) * gratio * w;
            }
        }
    }
    Ok(2.0 * bb.powf(2.0 * s) * total)
}

/// Coefficients of Γ = c3/β̄³ + c2/β̄² + c1/β̄ + c½ log β̄ + c0 + c₋½ β̄ log β̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c12: f64,
    pub c0: f64,
    pub cm12: f64,
}

impl ActionCoeffs {
    /// Effective action without the classical term, at inverse temperature β.
    pub fn effective_action(&self, beta: f64) -> f64 {
        let bb = beta / (2.0 * PI);
        let l = bb.ln();
        self.c3 / bb.powi(3) + self.c2 / (bb * bb) + self.c1 / bb + self.c12 * l + self.c0 + self.cm12 * bb * l
    }
}

/// x log x with the limit 0 at x = 0.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn action_coeffs(coeffs: &HeatKernelCoeffs, m: f64, mu: f64) -> Result<ActionCoeffs> {
    let (m2, mu2) = (m * m, mu * mu);
    let gap = m2 - mu2;
    if gap < 0.0 {
        return invalid("action coefficients need |mu| <= m");
    }
    let HeatKernelCoeffs { a0, a1, a2, a3, .. } = *coeffs;
    let sqpi = PI.sqrt();
    let l2pi = (2.0 * PI).ln();
    Ok(ActionCoeffs {
        c3: -sqpi / 45.0 * a3,
        c2: -crate::special::APERY * a2 / (PI * PI),
        c1: -sqpi / 3.0 * (a1 - a3 * (m2 - 2.0 * mu2)),
        c12: 2.0 * (a0 - a2 * gap),
        c0: 2.0 * l2pi * a0
            - sqpi / 2.0 * gap.sqrt() * a1
            - (xlogx(gap) + 2.0 * l2pi * m2 - (2.0 * l2pi + 1.0) * mu2) * a2
            - 4.0 * sqpi / 2.0 * gap.powf(1.5) * a3,
        cm12: -(a3 * (gap * gap + mu2 * mu2) - 2.0 * a1 * m2) / sqpi,
    })
}

/// Coefficients of the high-temperature charge
/// Q = b2 T² + b3/2 T log T + b1 T + b1/2 log T + b0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargeExpansion {
    pub b2: f64,
    pub b32: f64,
    /// Subleading coefficients, absent when |μ| ≥ m.
    pub b1: Option<f64>,
    pub b12: Option<f64>,
    pub b0: Option<f64>,
    pub action: ActionCoeffs,
    /// C = A3(4μ² − m²).
    pub c_const: f64,
    pub euler_gamma: f64,
    pub digamma_half: f64,
}

impl ChargeExpansion {
    /// Leading two terms, b2 T² + b3/2 T log T.
    pub fn leading_charge(&self, t: f64) -> f64 {
        self.b2 * t * t + self.b32 * t * t.ln()
    }

    /// All available terms.
    pub fn charge(&self, t: f64) -> f64 {
        let l = t.ln();
        self.leading_charge(t) + self.b1.unwrap_or(0.0) * t + self.b12.unwrap_or(0.0) * l + self.b0.unwrap_or(0.0)
    }
}

/// b2 = μV/3, the bulk coefficient written through the volume.
pub fn bulk_b2(mu: f64, volume: f64) -> f64 {
    mu * volume / 3.0
}

pub fn charge_coeffs(coeffs: &HeatKernelCoeffs, m: f64, mu: f64, l_scale: f64) -> Result<ChargeExpansion> {
    if !(l_scale > 0.0) {
        return invalid("l_scale must be positive");
    }
    let action = action_coeffs(coeffs, m, mu)?;
    let HeatKernelCoeffs { a0, a1, a2, a3, .. } = *coeffs;
    let (m2, mu2) = (m * m, mu * mu);
    let gap = m2 - mu2;
    let sqpi = PI.sqrt();
    let c = a3 * (4.0 * mu2 - m2);
    let b2 = 8.0 * mu * PI.powf(1.5) / 3.0 * a3;
    let b32 = 4.0 * mu * a2;
    let (b1, b12, b0) = if mu.abs() < m {
        let b1 = -mu
            * (4.0 * sqpi * gap.sqrt() * a3 + 2.0 * (2.0 + gap.ln()) * a2
                - 2.0 * sqpi * a1 / gap.sqrt()
                - 2.0 * a0 / gap);
        let b12 = -mu * c / (2.0 * sqpi);
        let b0 = mu / (2.0 * sqpi)
            * (2.0 * c * (DIGAMMA_HALF + 3.0 * EULER_GAMMA) + 32.0 / 3.0 * a3 * mu2
                - 8.0 * a1
                - (l_scale * l_scale).ln() * c);
        (Some(b1), Some(b12), Some(b0))
    } else {
        (None, None, None)
    };
    Ok(ChargeExpansion {
        b2,
        b32,
        b1,
        b12,
        b0,
        action,
        c_const: c,
        euler_gamma: EULER_GAMMA,
        digamma_half: DIGAMMA_HALF,
    })
}

/// Charge −(1/β) ∂Γ/∂μ from a Richardson-extrapolated central difference of
/// the assembled effective action.
pub fn charge_from_action(coeffs: &HeatKernelCoeffs, m: f64, mu: f64, t: f64) -> Result<f64> {
    let beta = 1.0 / t;
    let h = 1e-3 * m.max(1e-3);
    let gam = |x: f64| -> Result<f64> { Ok(action_coeffs(coeffs, m, x)?.effective_action(beta)) };
    let d = |h: f64| -> Result<f64> { Ok((gam(mu + h)? - gam(mu - h)?) / (2.0 * h)) };
    let dh = d(h)?;
    let dh2 = d(h / 2.0)?;
    let deriv = (4.0 * dh2 - dh) / 3.0;
    Ok(-deriv / beta)
}

/// Recovers (b2, b3/2, b1, b1/2, b0) by fitting the action-derived charge at
/// five temperatures to the basis {T², T log T, T, log T, 1}.
pub fn fit_charge_from_action(coeffs: &HeatKernelCoeffs, m: f64, mu: f64, temps: [f64; 5]) -> Result<[f64; 5]> {
    let mut a = Matrix5::zeros();
    let mut rhs = Vector5::zeros();
    for (i, &t) in temps.iter().enumerate() {
        let l = t.ln();
        let row = [t * t, t * l, t, l, 1.0];
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
        rhs[i] = charge_from_action(coeffs, m, mu, t)?;
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::NonConvergence { what: "charge basis fit", detail: "singular design matrix".into() })?;
    Ok([sol[0], sol[1], sol[2], sol[3], sol[4]])
}
