//! Critical temperatures, the analytic condensate fraction and the
//! classification of multistep condensation regimes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::charge::{asymptotic_q2, asymptotic_q3, Q2Cutoff, ThermoState};
use crate::effective_action::charge_coeffs;
use crate::error::{invalid, Error, Result};
use crate::spectral::{heat_kernel_coeffs, CavityGeometry, Scenario};

/// Default factor by which a left-hand side must exceed its right-hand side
/// for a strong inequality to count as satisfied.
pub const DEFAULT_DOMINANCE: f64 = 3.0;
/// Largest relative residual accepted from a critical-temperature root
/// whose bracket has not collapsed to machine precision.
pub const ROOT_TOLERANCE: f64 = 1e-10;

fn check_qm(q: f64, m: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return invalid(format!("charge must be positive, got {q}"));
    }
    if !(m > 0.0) || !m.is_finite() {
        return invalid(format!("mass must be positive, got {m}"));
    }
    Ok(())
}

/// b2 and b32 with μ = m.
fn saturated_coeffs(g: &CavityGeometry, m: f64) -> Result<(f64, f64)> {
    let ce = charge_coeffs(&heat_kernel_coeffs(g), m, m, 1.0)?;
    Ok((ce.b2, ce.b32))
}

/// Bulk critical temperature √(Q/b2) = √(3Q/(mV)).
pub fn bulk_tc(q: f64, g: &CavityGeometry, m: f64) -> Result<f64> {
    check_qm(q, m)?;
    Ok((3.0 * q / (m * g.volume())).sqrt())
}

/// Root of an equation Q = f(T) together with its relative residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub t: f64,
    pub residual: f64,
}

/// Largest positive root of `f(T) = q`, assuming f(T) − q > 0 for large T.
///
/// A geometric scan downward from `seed` brackets the root, then safeguarded
/// Newton steps with a numerical derivative refine it inside the bracket.
fn largest_root(what: &'static str, q: f64, seed: f64, f: impl Fn(f64) -> f64) -> Result<Root> {
    let g = |t: f64| f(t) - q;
    let mut hi = seed;
    let mut k = 0;
    while !(g(hi) > 0.0) {
        hi *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::NoRoot { what, detail: format!("no sign change above T = {seed}") });
        }
    }
    let mut lo = hi;
    k = 0;
    loop {
        lo *= 0.9;
        k += 1;
        if g(lo) < 0.0 {
            break;
        }
        if k > 2000 || lo < 1e-300 {
            return Err(Error::NoRoot { what, detail: format!("no positive root below T = {hi}") });
        }
        hi = lo;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = g(t);
        if (v / q).abs() < 1e-14 {
            break;
        }
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo < 1e-15 * t {
            break;
        }
        let h = 1e-7 * t;
        let d = (g(t + h) - g(t - h)) / (2.0 * h);
        let newton = t - v / d;
        t = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    let residual = (g(t) / q).abs();
    // when the terms of f dwarf q, cancellation bounds the attainable
    // residual; a bracket pinned to near machine precision is then accepted
    let pinned = hi - lo <= 1e-13 * t;
    if residual > ROOT_TOLERANCE && !pinned {
        return Err(Error::NonConvergence { what, detail: format!("relative residual {residual:.2e} at T = {t}") });
    }
    Ok(Root { t, residual })
}

/// Finite-size critical temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteTc {
    pub tc: f64,
    pub residual: f64,
    /// First-order ratio T_c/T_c⁽⁰⁾ = 1 − b32 log(Q L3²/b2)/(4√(b2 Q)).
    pub ratio_perturbative: f64,
    pub tc_bulk: f64,
}

/// Right-hand side b2T² + b32 T log(T L3) of the finite-size condition.
pub fn finite_tc_equation(t: f64, g: &CavityGeometry, m: f64) -> Result<f64> {
    let (b2, b32) = saturated_coeffs(g, m)?;
    Ok(b2 * t * t + b32 * t * (t * longest(g)).ln())
}

fn longest(g: &CavityGeometry) -> f64 {
    g.sorted().l[2]
}

/// Solves Q = b2T² + b32 T log(T L3) with μ = m.
pub fn finite_tc(q: f64, g: &CavityGeometry, m: f64) -> Result<FiniteTc> {
    let tc_bulk = bulk_tc(q, g, m)?;
    let (b2, b32) = saturated_coeffs(g, m)?;
    let l3 = longest(g);
    let root = largest_root("finite-size critical temperature", q, tc_bulk, |t| b2 * t * t + b32 * t * (t * l3).ln())?;
    let ratio_perturbative = 1.0 - b32 * (q * l3 * l3 / b2).ln() / (4.0 * (b2 * q).sqrt());
    Ok(FiniteTc { tc: root.t, residual: root.residual, ratio_perturbative, tc_bulk })
}

/// Analytic condensate fraction Q0/Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondensateFraction {
    pub value: f64,
    /// Unclamped formula value.
    pub raw: f64,
    pub clamped: bool,
}

/// Q0/Q = 1 − t² + c(t² − t) − d·t log t with t = T/T_c⁽⁰⁾,
/// c = b32 log(Q L3²/b2)/(2√(b2Q)) and d = b32/√(b2Q), clamped to [0, 1].
pub fn condensate_fraction(t: f64, q: f64, g: &CavityGeometry, m: f64) -> Result<CondensateFraction> {
    if !(t > 0.0) {
        return invalid(format!("temperature must be positive, got {t}"));
    }
    let tc0 = bulk_tc(q, g, m)?;
    let (b2, b32) = saturated_coeffs(g, m)?;
    let l3 = longest(g);
    let s = (b2 * q).sqrt();
    let c = b32 * (q * l3 * l3 / b2).ln() / (2.0 * s);
    let d = b32 / s;
    let r = t / tc0;
    let raw = 1.0 - r * r + c * (r * r - r) - d * r * r.ln();
    let value = raw.clamp(0.0, 1.0);
    Ok(CondensateFraction { value, raw, clamped: value != raw })
}

/// Bulk fraction 1 − (T/T_c⁽⁰⁾)², zero above T_c⁽⁰⁾.
pub fn bulk_condensate_fraction(t: f64, q: f64, g: &CavityGeometry, m: f64) -> Result<f64> {
    let r = t / bulk_tc(q, g, m)?;
    Ok((1.0 - r * r).max(0.0))
}

/// Right-hand side of the three-dimensional saturation condition at μ = m,
/// b2T² ± (b32T/3) log(TL1/π) + c·m·T log(TL1/π), with the sign and the
/// two-dimensional coefficient c fixed by the scenario.
pub fn t3d_equation(t: f64, g: &CavityGeometry, m: f64, scenario: Scenario) -> Result<f64> {
    let (b2, b32) = saturated_coeffs(g, m)?;
    let [l1, l2, l3] = g.sorted().l;
    let lg = (t * l1 / PI).ln();
    let (sign, area) = match scenario {
        Scenario::OneD => (-1.0, 4.0 * l2 * l3),
        Scenario::TwoD => (1.0, l3 * l3),
        Scenario::ThreeStep => (1.0, l2 * l3),
        Scenario::Isotropic => return Ok(b2 * t * t + b32 * t * (t * l3).ln()),
    };
    Ok(b2 * t * t + sign * b32 * t / 3.0 * lg + area * m * t / PI * lg)
}

/// Temperature at which the three-dimensionally excited modes saturate.
/// For an isotropic cavity this is the finite-size critical temperature.
pub fn t3d(q: f64, g: &CavityGeometry, m: f64, scenario: Scenario) -> Result<Root> {
    let seed = bulk_tc(q, g, m)?;
    let (b2, b32) = saturated_coeffs(g, m)?;
    let [l1, l2, l3] = g.sorted().l;
    let (sign, area) = match scenario {
        Scenario::OneD => (-1.0, 4.0 * l2 * l3),
        Scenario::TwoD => (1.0, l3 * l3),
        Scenario::ThreeStep => (1.0, l2 * l3),
        Scenario::Isotropic => {
            let f = finite_tc(q, g, m)?;
            return Ok(Root { t: f.tc, residual: f.residual });
        }
    };
    largest_root("three-dimensional saturation temperature", q, seed, |t| {
        let lg = (t * l1 / PI).ln();
        b2 * t * t + sign * b32 * t / 3.0 * lg + area * m * t / PI * lg
    })
}

/// Two-dimensional saturation temperature in its three readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T2d {
    /// Root of Q = b̃ T log(L T).
    pub root: f64,
    pub residual: f64,
    /// Leading large-Q solution Q/(b̃ log(QL/b̃)).
    pub closed_form: f64,
    /// Root of Q = Q2(T) with the scenario's own infrared cutoff, when the
    /// edge ratios are integers.
    pub saturation: Option<f64>,
    /// b̃ = m L2 L3/π.
    pub b_tilde: f64,
}

/// Solves Q = b̃ T log(L T) with b̃ = mL2L3/π and L = L2 (three-step) or L3
/// (2D).
pub fn t2d(q: f64, g: &CavityGeometry, m: f64, scenario: Scenario) -> Result<T2d> {
    check_qm(q, m)?;
    let [_, l2, l3] = g.sorted().l;
    let l = match scenario {
        Scenario::ThreeStep => l2,
        Scenario::TwoD => l3,
        _ => {
            return Err(Error::ScenarioMismatch(format!(
                "two-dimensional saturation needs a 2D or 3step cavity, got {scenario}"
            )))
        }
    };
    let bt = m * l2 * l3 / PI;
    let ratio = q / bt;
    // T log(LT) = ratio, increasing for LT > 1/e
    let seed = ratio.max(1.0 / l);
    let root = largest_root("two-dimensional saturation temperature", ratio, seed, |t| t * (l * t).ln())?;
    let arg = q * l / bt;
    if !(arg > 1.0) {
        return invalid(format!("closed form needs Q L/b̃ > 1, got {arg}"));
    }
    let closed_form = q / (bt * arg.ln());
    let q2_at = |t: f64| {
        let st = ThermoState { t, mu: m, m, q_total: q, reduced_mu: 0.0 };
        asymptotic_q2(&st, g, scenario, Q2Cutoff::Own)
    };
    // needs integer edge ratios for the scenario's infrared cutoff
    let saturation = match q2_at(root.t) {
        Ok(_) => {
            Some(largest_root("two-dimensional charge saturation", q, root.t, |t| q2_at(t).unwrap_or(f64::NAN))?.t)
        }
        Err(_) => None,
    };
    Ok(T2d { root: root.t, residual: root.residual, closed_form, saturation, b_tilde: bt })
}

/// One-dimensional saturation temperature πQ/(2mL3² log 2π).
pub fn t1d(q: f64, g: &CavityGeometry, m: f64) -> Result<f64> {
    check_qm(q, m)?;
    let l3 = longest(g);
    Ok(PI * q / (2.0 * m * l3 * l3 * (2.0 * PI).ln()))
}

/// All critical temperatures of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSet {
    pub tc_bulk: f64,
    pub tc_finite: f64,
    pub t3d: f64,
    pub t2d: Option<f64>,
    pub t1d: Option<f64>,
    pub scenario: Scenario,
}

impl CriticalSet {
    /// True when the saturation temperatures are strictly ordered.
    pub fn ordered(&self) -> bool {
        let mut last = 0.0;
        for t in [self.t1d, self.t2d, Some(self.t3d)].into_iter().flatten() {
            if !(t > last) {
                return false;
            }
            last = t;
        }
        true
    }
}

pub fn critical_set(q: f64, g: &CavityGeometry, m: f64) -> Result<CriticalSet> {
    let scenario = Scenario::detect(g);
    let tc_bulk = bulk_tc(q, g, m)?;
    let tc_finite = finite_tc(q, g, m)?.tc;
    let t3 = t3d(q, g, m, scenario)?.t;
    let t2 = match scenario {
        Scenario::TwoD | Scenario::ThreeStep => Some(t2d(q, g, m, scenario)?.root),
        _ => None,
    };
    let t1 = match scenario {
        Scenario::OneD | Scenario::ThreeStep => Some(t1d(q, g, m)?),
        _ => None,
    };
    Ok(CriticalSet { tc_bulk, tc_finite, t3d: t3, t2d: t2, t1d: t1, scenario })
}

/// Ratios Q3/Q2 at T_2D and Q2/Q1 at T_1D from the asymptotic charges.
pub fn dominance_ratios(q: f64, g: &CavityGeometry, m: f64, scenario: Scenario) -> Result<(f64, f64)> {
    let t2 = t2d(q, g, m, scenario)?.root;
    let t1 = t1d(q, g, m)?;
    let st = |t: f64| ThermoState { t, mu: m, m, q_total: q, reduced_mu: 0.0 };
    let q3 = asymptotic_q3(&st(t2), g, scenario)?;
    let q2 = asymptotic_q2(&st(t2), g, scenario, Q2Cutoff::Own)?;
    let q2_low = asymptotic_q2(&st(t1), g, scenario, Q2Cutoff::Own)?;
    let q1 = crate::charge::asymptotic_q1(&st(t1), g, scenario)?;
    Ok((q3 / q2, q2_low / q1))
}

/// Condensation pattern implied by the anisotropy inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    OneStep,
    #[serde(rename = "two-step-1D")]
    TwoStep1D,
    #[serde(rename = "two-step-2D")]
    TwoStep2D,
    ThreeStep,
    Frozen,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::OneStep => "one-step",
            RegimeLabel::TwoStep1D => "two-step-1D",
            RegimeLabel::TwoStep2D => "two-step-2D",
            RegimeLabel::ThreeStep => "three-step",
            RegimeLabel::Frozen => "frozen",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Margins are log(lhs/rhs) of the three anisotropy inequalities:
/// A: L3/L2 ≫ log Q̃/(2 log 2π),
/// B: L3/L1 ≫ πQ̃/(3 (log Q̃)²),
/// C: (L3/L1)(L3/L2)² ≫ πQ̃/(12 (log 2π)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub l3_over_l2: f64,
    pub l3_over_l1: f64,
    pub q_tilde: f64,
    pub condition_a: f64,
    pub condition_b: f64,
    pub condition_c: f64,
    pub dominance: f64,
    /// Largest η_i at T_3D.
    pub eta_max: f64,
    pub t3d: f64,
    pub label: RegimeLabel,
}

impl RegimeReport {
    /// Which of the conditions A, B, C hold at the report's dominance factor.
    pub fn holds(&self) -> [bool; 3] {
        let cut = self.dominance.ln();
        [self.condition_a >= cut, self.condition_b >= cut, self.condition_c >= cut]
    }
}

/// A short edge whose thermal η exceeds one at T_3D no longer carries
/// excitations, and the cavity condenses with fewer than three dimensions.
fn freeze_out(label: RegimeLabel, eta_max: f64) -> RegimeLabel {
    if eta_max > 1.0 {
        RegimeLabel::Frozen
    } else {
        label
    }
}

/// Label for a pattern of satisfied conditions, ignoring freeze-out.
pub fn label_for(a: bool, b: bool, c: bool) -> RegimeLabel {
    match (a, b, c) {
        (true, true, true) => RegimeLabel::ThreeStep,
        (false, true, _) => RegimeLabel::TwoStep2D,
        (_, false, true) => RegimeLabel::TwoStep1D,
        _ => RegimeLabel::OneStep,
    }
}

/// Evaluates the anisotropy inequalities with the default dominance factor.
pub fn classify_regime(q: f64, g: &CavityGeometry, m: f64) -> Result<RegimeReport> {
    classify_regime_with(q, g, m, DEFAULT_DOMINANCE)
}

pub fn classify_regime_with(q: f64, g: &CavityGeometry, m: f64, dominance: f64) -> Result<RegimeReport> {
    check_qm(q, m)?;
    if !(dominance >= 1.0) {
        return invalid(format!("dominance factor must be at least 1, got {dominance}"));
    }
    let s = g.sorted();
    let [l1, l2, l3] = s.l;
    let q_tilde = PI * q / (m * l2);
    if !(q_tilde > 1.0) {
        return invalid(format!("reduced charge πQ/(m L2) = {q_tilde} must exceed 1"));
    }
    let lq = q_tilde.ln();
    let l2pi = (2.0 * PI).ln();
    let (r32, r31) = (l3 / l2, l3 / l1);
    let condition_a = (r32 / (lq / (2.0 * l2pi))).ln();
    let condition_b = (r31 / (PI * q_tilde / (3.0 * lq * lq))).ln();
    let condition_c = (r31 * r32 * r32 / (PI * q_tilde / (12.0 * l2pi * l2pi))).ln();
    let cut = dominance.ln();
    let mut label = label_for(condition_a >= cut, condition_b >= cut, condition_c >= cut);
    let scenario = Scenario::detect(&s);
    let t3 = t3d(q, &s, m, scenario)?.t;
    let eta_max = 1.0 / (2.0 * PI * t3 * l1);
    label = freeze_out(label, eta_max);
    Ok(RegimeReport {
        l3_over_l2: r32,
        l3_over_l1: r31,
        q_tilde,
        condition_a,
        condition_b,
        condition_c,
        dominance,
        eta_max,
        t3d: t3,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::BoundaryCondition::{self, Dirichlet, Neumann};

    fn cav(l: [f64; 3], bc: BoundaryCondition) -> CavityGeometry {
        CavityGeometry::new(l, bc).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bulk_tc_examples() {
        let g = cav([3.0, 3.0, 3.0], Neumann);
        assert!(rel(bulk_tc(100.0, &g, 2.0).unwrap(), (300.0f64 / 54.0).sqrt()) < 1e-14);
        assert!(rel(bulk_tc(400.0, &g, 2.0).unwrap(), 2.0 * bulk_tc(100.0, &g, 2.0).unwrap()) < 1e-14);
        let f2 = cav([1.0, 10.0, 100.0], Neumann);
        assert!(rel(bulk_tc(1e4, &f2, 0.1).unwrap(), 300f64.sqrt()) < 1e-14);
    }

    #[test]
    fn finite_tc_cube() {
        let g = cav([3.0, 3.0, 3.0], Neumann);
        let f = finite_tc(100.0, &g, 2.0).unwrap();
        assert!((f.tc - 1.97).abs() < 0.01, "{}", f.tc);
        assert!(f.residual < 1e-10);
        let d = finite_tc(100.0, &cav([3.0, 3.0, 3.0], Dirichlet), 2.0).unwrap();
        assert!(d.tc > f.tc_bulk);
    }

    #[test]
    fn perturbative_ratio_converges() {
        let g = cav([1.0, 2.0, 3.0], Neumann);
        let dev = |q: f64| {
            let f = finite_tc(q, &g, 1.0).unwrap();
            (f.tc - f.tc_bulk * f.ratio_perturbative).abs() / f.tc_bulk
        };
        let (a, b, c) = (dev(1e3), dev(1e4), dev(1e5));
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn condensate_fraction_limits() {
        let g = cav([1.0, 10.0, 100.0], Neumann);
        let f = condensate_fraction(1e-9, 1e4, &g, 0.1).unwrap();
        assert!((f.value - 1.0).abs() < 1e-6);
        let hot = condensate_fraction(30.0, 1e4, &g, 0.1).unwrap();
        assert!(hot.clamped && hot.value == 0.0);
    }

    #[test]
    fn t3d_scenarios() {
        let b = t3d(2000.0, &cav([2.0, 2.0, 300.0], Neumann), 1.0, Scenario::OneD).unwrap();
        assert!(rel(b.t, 2.03) < 0.02, "{}", b.t);
        let c = t3d(8000.0, &cav([2.0, 200.0, 200.0], Neumann), 0.5, Scenario::TwoD).unwrap();
        let d = t3d(4000.0, &cav([2.0, 100.0, 600.0], Neumann), 0.5, Scenario::ThreeStep).unwrap();
        // independent evaluations of the same equations
        assert!((b.t - 2.02487).abs() < 1e-4);
        assert!((c.t - 0.93348).abs() < 1e-4, "{}", c.t);
        assert!((d.t - 0.71712).abs() < 1e-4, "{}", d.t);
        for (r, g, m, s, q) in [
            (c, cav([2.0, 200.0, 200.0], Neumann), 0.5, Scenario::TwoD, 8000.0),
            (d, cav([2.0, 100.0, 600.0], Neumann), 0.5, Scenario::ThreeStep, 4000.0),
        ] {
            assert!(rel(t3d_equation(r.t, &g, m, s).unwrap(), q) < 1e-10);
        }
    }

    #[test]
    fn t2d_and_t1d() {
        let g = cav([2.0, 100.0, 600.0], Neumann);
        let r = t2d(4000.0, &g, 0.5, Scenario::ThreeStep).unwrap();
        assert!((r.root - 0.15341).abs() < 1e-4, "{}", r.root);
        assert!((r.closed_form - 0.11215).abs() < 1e-4, "{}", r.closed_form);
        assert!(rel(r.b_tilde * r.root * (100.0 * r.root).ln(), 4000.0) < 1e-10);
        let st = ThermoState { t: r.saturation.unwrap(), mu: 0.5, m: 0.5, q_total: 4000.0, reduced_mu: 0.0 };
        assert!(rel(asymptotic_q2(&st, &g, Scenario::ThreeStep, Q2Cutoff::Own).unwrap(), 4000.0) < 1e-10);
        let b = cav([2.0, 2.0, 300.0], Neumann);
        assert!((t1d(2000.0, &b, 1.0).unwrap() - 0.0190).abs() < 1e-4);
        assert!(rel(t1d(4000.0, &b, 1.0).unwrap(), 2.0 * t1d(2000.0, &b, 1.0).unwrap()) < 1e-14);
    }

    #[test]
    fn t2d_closed_form_improves_with_q() {
        let g = cav([2.0, 100.0, 600.0], Neumann);
        let mut last = f64::INFINITY;
        for q in [1e4, 3e4, 1e5, 3e5, 1e6] {
            let r = t2d(q, &g, 0.5, Scenario::ThreeStep).unwrap();
            let d = rel(r.closed_form, r.root);
            assert!(d < last, "{q}: {d}");
            last = d;
        }
    }

    #[test]
    fn t2d_halves_with_mass_at_leading_order() {
        let g = cav([2.0, 100.0, 600.0], Neumann);
        let a = t2d(1e6, &g, 0.5, Scenario::ThreeStep).unwrap();
        let b = t2d(1e6, &g, 1.0, Scenario::ThreeStep).unwrap();
        assert!((a.root / b.root - 2.0).abs() < 0.2);
    }

    #[test]
    fn fig4d_ordering_and_dominance() {
        let g = cav([2.0, 100.0, 600.0], Neumann);
        let cs = critical_set(4000.0, &g, 0.5).unwrap();
        assert!(cs.ordered(), "{cs:?}");
        let (r3, r2) = dominance_ratios(4000.0, &g, 0.5, Scenario::ThreeStep).unwrap();
        assert!(r3 < 0.2 && r2 < 0.2);
    }

    #[test]
    fn regime_labels() {
        let cube = classify_regime(100.0, &cav([3.0, 3.0, 3.0], Neumann), 2.0).unwrap();
        assert_eq!(cube.label, RegimeLabel::OneStep);
        let d = classify_regime(4000.0, &cav([2.0, 100.0, 600.0], Neumann), 0.5).unwrap();
        assert!((d.q_tilde - 80.0 * PI).abs() < 1e-9);
        assert_eq!(d.label, RegimeLabel::ThreeStep);
        let [a, b, c] = d.holds();
        assert_eq!(label_for(a, b, c), d.label);
    }

    #[test]
    fn regime_grid_has_contiguous_three_step_band() {
        // L1 = 1, m = 1 and πQ/(m L2) fixed
        let axis: Vec<f64> = (0..13).map(|k| 10f64.powf(0.5 * k as f64)).collect();
        let mut labels = vec![vec![RegimeLabel::OneStep; axis.len()]; axis.len()];
        for (i, &r21) in axis.iter().enumerate() {
            for (j, &r32) in axis.iter().enumerate() {
                let g = cav([1.0, r21, r21 * r32], Neumann);
                labels[i][j] = classify_regime(1e4 * r21 / PI, &g, 1.0).unwrap().label;
            }
        }
        assert_eq!(labels[0][0], RegimeLabel::OneStep);
        let three = |l: &RegimeLabel| *l == RegimeLabel::ThreeStep;
        assert!(labels.iter().flatten().any(three));
        assert!(!labels.iter().flatten().any(|l| *l == RegimeLabel::Frozen));
        let contiguous = |line: Vec<RegimeLabel>| {
            let idx: Vec<usize> = (0..line.len()).filter(|&k| three(&line[k])).collect();
            idx.windows(2).all(|w| w[1] == w[0] + 1)
        };
        for i in 0..axis.len() {
            assert!(contiguous(labels[i].clone()));
            assert!(contiguous(labels.iter().map(|row| row[i]).collect()));
        }
    }

    #[test]
    fn freeze_out_demotes_any_label() {
        assert_eq!(freeze_out(RegimeLabel::ThreeStep, 1.5), RegimeLabel::Frozen);
        assert_eq!(freeze_out(RegimeLabel::OneStep, 1.0 + 1e-12), RegimeLabel::Frozen);
        assert_eq!(freeze_out(RegimeLabel::TwoStep2D, 0.99), RegimeLabel::TwoStep2D);
    }

    #[test]
    fn short_edge_stays_active_at_t3d() {
        // below T L1 ~ 1 the logarithmic surface term drives the saturation
        // equation negative, so its largest root keeps η well under one
        for bc in [Neumann, Dirichlet] {
            for (l, q) in [([1.0, 1e4, 1e10], 1e8 / PI), ([1.0, 10.0, 1e6], 1e4), ([1.0, 1e3, 1e3], 1e5)] {
                let rep = classify_regime(q, &cav(l, bc), 1.0).unwrap();
                assert!(rep.eta_max < 0.25, "{l:?} {bc}: eta {}", rep.eta_max);
                assert_ne!(rep.label, RegimeLabel::Frozen);
            }
        }
    }
}
