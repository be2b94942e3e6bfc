//! Net charge of the ideal relativistic Bose gas in a cavity.
//!
//! The exact engine sums Bose–Einstein occupations of particles minus
//! antiparticles over the discrete spectrum; the asymptotic formulas give the
//! same quantity split by excitation class in the high-temperature
//! expansion.

mod engine;

use std::f64::consts::PI;

use serde::Serialize;

pub use engine::{ThermalSpectrum, FAR_CUT as EXPONENT_CUTOFF};

use crate::effective_action::charge_coeffs;
use crate::error::{invalid, Error, Result};
use crate::spectral::{heat_kernel_coeffs, smooth_dos, CavityGeometry, Scenario};

/// Default truncation β(E − μ) ≤ Λ of the direct sum.
pub const DEFAULT_CUTOFF: f64 = 40.0;
/// Default limit on modes visited by the direct sum.
pub const DEFAULT_MODE_BUDGET: u64 = 100_000_000;
/// Iteration cap of the chemical potential bisection.
pub const MAX_BISECTIONS: usize = 200;

/// Thermodynamic state of the gas.
///
/// The reduced chemical potential x = β(E₀ − μ) is carried alongside μ so
/// that states close to condensation keep full relative precision in x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoState {
    pub t: f64,
    pub mu: f64,
    pub m: f64,
    pub q_total: f64,
    pub reduced_mu: f64,
}

impl ThermoState {
    pub fn new(t: f64, mu: f64, m: f64, q_total: f64, g: &CavityGeometry) -> Result<Self> {
        check_tm(t, m)?;
        let e0 = g.ground_energy(m);
        if !(mu < e0) {
            return invalid(format!("chemical potential {mu} must lie below the lowest level {e0}"));
        }
        Ok(Self { t, mu, m, q_total, reduced_mu: (e0 - mu) / t })
    }

    /// State with μ = E₀ − xT.
    pub fn from_reduced(t: f64, x: f64, m: f64, q_total: f64, g: &CavityGeometry) -> Result<Self> {
        check_tm(t, m)?;
        if !(x > 0.0) {
            return invalid(format!("reduced chemical potential must be positive, got {x}"));
        }
        Ok(Self { t, mu: g.ground_energy(m) - x * t, m, q_total, reduced_mu: x })
    }
}

fn check_tm(t: f64, m: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("temperature must be positive, got {t}"));
    }
    if !(m >= 0.0) || !m.is_finite() {
        return invalid(format!("mass must be non-negative, got {m}"));
    }
    Ok(())
}

/// Result of the direct mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargeSum {
    /// Charge split by excitation class.
    pub by_class: [f64; 4],
    /// Upper bound on the magnitude of the truncated tail.
    pub tail_bound: f64,
    pub modes: u64,
}

impl ChargeSum {
    pub fn total(&self) -> f64 {
        self.by_class.iter().sum()
    }
}

/// Number of modes with √ω ≤ k, bounded above by the enclosing box.
fn box_count_bound(g: &CavityGeometry, k: f64) -> f64 {
    g.l.iter().map(|&li| li * k / PI + 1.0).product()
}

/// Direct sum of particle minus antiparticle occupations over all modes
/// with β(E − μ) ≤ cutoff, using the default mode budget.
pub fn exact_charge(st: &ThermoState, g: &CavityGeometry, cutoff: f64) -> Result<f64> {
    Ok(exact_charge_sum(st, g, cutoff, DEFAULT_MODE_BUDGET)?.total())
}

/// Direct mode sum with an explicit work budget.
pub fn exact_charge_sum(st: &ThermoState, g: &CavityGeometry, cutoff: f64, budget: u64) -> Result<ChargeSum> {
    check_tm(st.t, st.m)?;
    if !(cutoff >= 30.0) {
        return invalid(format!("cutoff must be at least 30, got {cutoff}"));
    }
    let beta = 1.0 / st.t;
    let x = st.reduced_mu;
    if !(x > 0.0) {
        return invalid("chemical potential must lie below the lowest level");
    }
    let e0 = g.ground_energy(st.m);
    let m2 = st.m * st.m;
    let lo = g.bc.lowest_index();
    let w = g.l.map(|li| (PI / li).powi(2));
    let omega0: f64 = w.iter().map(|wi| wi * (lo * lo) as f64).sum();
    // β(E − μ) = x + β(E − E₀)
    let u_max = cutoff - x;
    let k_of = |u: f64| -> f64 {
        let e = e0 + u.max(0.0) * st.t;
        (e * e - m2).max(0.0).sqrt()
    };
    let needed = box_count_bound(g, k_of(u_max));
    if needed > budget as f64 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let classes: [u8; 8] = std::array::from_fn(|mask| crate::spectral::pattern_class(mask as u8, g));
    let gap = |o: f64| (o - omega0) / ((o + m2).sqrt() + e0);
    let two = 2.0 * beta * e0;
    let mut q = [0.0; 4];
    let mut modes = 0u64;
    if u_max >= 0.0 {
        let omega_max = k_of(u_max).powi(2);
        let base = [w[0], w[1], w[2]].map(|wi| wi * (lo * lo) as f64);
        let mut n0 = lo;
        while w[0] * (n0 * n0) as f64 + base[1] + base[2] <= omega_max || n0 == lo {
            let o0 = w[0] * (n0 * n0) as f64;
            let mut n1 = lo;
            while o0 + w[1] * (n1 * n1) as f64 + base[2] <= omega_max || n1 == lo {
                let o1 = o0 + w[1] * (n1 * n1) as f64;
                let mut n2 = lo;
                loop {
                    let o = o1 + w[2] * (n2 * n2) as f64;
                    let u = beta * gap(o);
                    if u > u_max {
                        break;
                    }
                    let mask = (n0 > lo) as u8 | ((n1 > lo) as u8) << 1 | ((n2 > lo) as u8) << 2;
                    let u = u.max(0.0);
                    q[classes[mask as usize] as usize] += 1.0 / (u + x).exp_m1() - 1.0 / (u + two - x).exp_m1();
                    modes += 1;
                    n2 += 1;
                }
                n1 += 1;
            }
            n0 += 1;
        }
    }
    // geometric tail: shells of unit width in β(E − μ) beyond the cutoff
    let mut tail = 0.0;
    let scale = 1.0 / (1.0 - (-cutoff).exp());
    for r in 0..200 {
        let s = cutoff + r as f64;
        let shell = box_count_bound(g, k_of(s + 1.0 - x)) * (-s).exp() * scale;
        tail += shell;
        if shell < 1e-18 * tail.max(1e-300) {
            break;
        }
    }
    Ok(ChargeSum { by_class: q, tail_bound: tail, modes })
}

/// Reduced chemical potential x = β(E₀ − μ) at which the spectrum carries
/// charge `q_target`, by bisection.
pub fn solve_reduced(spec: &ThermalSpectrum, q_target: f64) -> Result<f64> {
    if !(q_target > 0.0) || !q_target.is_finite() {
        return invalid(format!("target charge must be positive, got {q_target}"));
    }
    // Q(x) decreases from +∞ at x → 0 to 0 at x = βE₀
    let mut hi = spec.beta() * spec.ground_energy();
    let mut lo = (0.5 / q_target).min(0.5 * hi);
    let mut tries = 0;
    while spec.charge(lo) < q_target {
        hi = lo;
        lo /= 16.0;
        tries += 1;
        if tries > 250 || lo < 1e-300 {
            return Err(Error::NoRoot { what: "chemical potential", detail: format!("charge {q_target} not reached") });
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        let q = spec.charge(mid);
        if q == q_target {
            return Ok(mid);
        }
        if q > q_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * lo {
            break;
        }
    }
    let (qlo, qhi) = (spec.charge(lo), spec.charge(hi));
    // linear interpolation inside the final bracket
    let x = if qlo > qhi { lo + (qlo - q_target) / (qlo - qhi) * (hi - lo) } else { lo };
    Ok(x.clamp(lo, hi))
}

/// State at temperature t whose exact charge equals `q_target`.
pub fn solve_state(t: f64, q_target: f64, g: &CavityGeometry, m: f64) -> Result<ThermoState> {
    let spec = ThermalSpectrum::new(g, m, t)?;
    let x = solve_reduced(&spec, q_target)?;
    ThermoState::from_reduced(t, x, m, q_target, g)
}

/// Chemical potential μ ∈ (0, E₀) at which the exact charge equals
/// `q_target`.
pub fn solve_mu(t: f64, q_target: f64, g: &CavityGeometry, m: f64) -> Result<f64> {
    Ok(solve_state(t, q_target, g, m)?.mu)
}

/// Engine that produced a charge partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Asymptotic,
}

/// Charge split into ground state Q0 and the one-, two- and
/// three-dimensionally excited classes Q1–Q3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionedCharge {
    pub t: f64,
    pub q: [f64; 4],
    pub q_total: f64,
    pub mu_solved: f64,
    pub reduced_mu: f64,
    pub engine: Engine,
}

impl PartitionedCharge {
    pub fn fractions(&self) -> [f64; 4] {
        self.q.map(|qi| qi / self.q_total)
    }
}

/// Solves μ at fixed total charge and splits the charge by excitation class.
pub fn partitioned_charge(t: f64, q_target: f64, g: &CavityGeometry, m: f64) -> Result<PartitionedCharge> {
    let spec = ThermalSpectrum::new(g, m, t)?;
    partition_with(&spec, t, q_target, g, m)
}

/// As [`partitioned_charge`] with a prepared spectrum.
pub fn partition_with(
    spec: &ThermalSpectrum,
    t: f64,
    q_target: f64,
    g: &CavityGeometry,
    m: f64,
) -> Result<PartitionedCharge> {
    let x = solve_reduced(spec, q_target)?;
    let q = spec.charges(x);
    Ok(PartitionedCharge {
        t,
        q,
        q_total: q_target,
        mu_solved: g.ground_energy(m) - x * t,
        reduced_mu: x,
        engine: Engine::Exact,
    })
}

/// m̃² = π²ε₁/L3² + m² − μ² for the sorted cavity.
fn cutoff_mass2(st: &ThermoState, g: &CavityGeometry, eps1: f64) -> Result<f64> {
    let l3 = g.sorted().l[2];
    let mt2 = PI * PI * eps1 / (l3 * l3) + st.m * st.m - st.mu * st.mu;
    if !(mt2 > 0.0) {
        return invalid(format!("infrared cutoff mass squared {mt2} is not positive"));
    }
    Ok(mt2)
}

fn check_asymptotic(st: &ThermoState) -> Result<()> {
    check_tm(st.t, st.m)?;
    if st.mu.abs() > st.m * (1.0 + 1e-12) {
        return invalid(format!("asymptotic charge needs |mu| <= m, got mu = {} and m = {}", st.mu, st.m));
    }
    Ok(())
}

/// Charge of all excited modes, b2T² + (b32T/2) log(T²/m̃²) with
/// m̃² = π²/L3² + m² − μ².
pub fn asymptotic_q_excited(st: &ThermoState, g: &CavityGeometry) -> Result<f64> {
    check_asymptotic(st)?;
    let mt2 = cutoff_mass2(st, g, 1.0)?;
    let ce = charge_coeffs(&heat_kernel_coeffs(g), st.m, st.mu, 1.0)?;
    let t = st.t;
    Ok(ce.b2 * t * t + ce.b32 * t / 2.0 * (t * t / mt2).ln())
}

/// Charge of the three-dimensionally excited modes,
/// b2T² ∓ (b32T/6) log(T²/m̃²), with the minus sign for the 1D scenario.
pub fn asymptotic_q3(st: &ThermoState, g: &CavityGeometry, scenario: Scenario) -> Result<f64> {
    check_asymptotic(st)?;
    let sign = match scenario {
        Scenario::OneD => -1.0,
        Scenario::TwoD | Scenario::ThreeStep => 1.0,
        Scenario::Isotropic => return Err(isotropic_mismatch()),
    };
    let dos = smooth_dos(g, scenario)?;
    let mt2 = cutoff_mass2(st, g, dos.eps1_3d)?;
    let ce = charge_coeffs(&heat_kernel_coeffs(g), st.m, st.mu, 1.0)?;
    let t = st.t;
    Ok(ce.b2 * t * t + sign * ce.b32 * t / 6.0 * (t * t / mt2).ln())
}

/// Lowest level entering the logarithm of the two-dimensional charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Q2Cutoff {
    /// The lowest two-dimensionally excited level of the scenario.
    #[default]
    Own,
    /// The lowest three-dimensionally excited level, as in the charge of
    /// three-dimensional modes.
    ThreeD,
}

/// Charge of the two-dimensionally excited modes, c·μL2L3T log(T²/m̃²) with
/// c = 2/π in the 1D scenario and 1/(2π) otherwise.
pub fn asymptotic_q2(st: &ThermoState, g: &CavityGeometry, scenario: Scenario, cut: Q2Cutoff) -> Result<f64> {
    check_asymptotic(st)?;
    let pref = match scenario {
        Scenario::OneD => 2.0 / PI,
        Scenario::TwoD | Scenario::ThreeStep => 1.0 / (2.0 * PI),
        Scenario::Isotropic => return Err(isotropic_mismatch()),
    };
    let dos = smooth_dos(g, scenario)?;
    let eps1 = match cut {
        Q2Cutoff::Own => dos.eps1_2d.unwrap_or(dos.eps1_3d),
        Q2Cutoff::ThreeD => dos.eps1_3d,
    };
    let mt2 = cutoff_mass2(st, g, eps1)?;
    let s = g.sorted().l;
    let t = st.t;
    Ok(pref * st.mu * s[1] * s[2] * t * (t * t / mt2).ln())
}

/// Charge of the one-dimensionally excited modes, c·μL3²T log(2π)/π with
/// c = 4 in the 2D scenario and 2 otherwise.
pub fn asymptotic_q1(st: &ThermoState, g: &CavityGeometry, scenario: Scenario) -> Result<f64> {
    check_asymptotic(st)?;
    scenario.check(g)?;
    let pref = match scenario {
        Scenario::TwoD => 4.0,
        Scenario::OneD | Scenario::ThreeStep => 2.0,
        Scenario::Isotropic => return Err(isotropic_mismatch()),
    };
    let l3 = g.sorted().l[2];
    Ok(pref * st.mu * l3 * l3 * st.t * (2.0 * PI).ln() / PI)
}

fn isotropic_mismatch() -> Error {
    Error::ScenarioMismatch("an isotropic cavity has no multistep charge split".into())
}

/// Asymptotic partition at μ = m. Excited classes fill in order of
/// dimension, each capped by the charge left over, and the ground state
/// takes the remainder.
pub fn asymptotic_partition(
    t: f64,
    q_target: f64,
    g: &CavityGeometry,
    m: f64,
    scenario: Scenario,
) -> Result<PartitionedCharge> {
    if !(q_target > 0.0) {
        return invalid(format!("target charge must be positive, got {q_target}"));
    }
    let st = ThermoState { t, mu: m, m, q_total: q_target, reduced_mu: 0.0 };
    let raw = [
        asymptotic_q3(&st, g, scenario)?,
        asymptotic_q2(&st, g, scenario, Q2Cutoff::Own)?,
        asymptotic_q1(&st, g, scenario)?,
    ];
    let mut left = q_target;
    let mut q = [0.0; 4];
    for (k, r) in raw.iter().enumerate() {
        let take = r.max(0.0).min(left);
        q[3 - k] = take;
        left -= take;
    }
    q[0] = left;
    Ok(PartitionedCharge { t, q, q_total: q_target, mu_solved: m, reduced_mu: 0.0, engine: Engine::Asymptotic })
}
