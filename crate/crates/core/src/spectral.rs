//! Spectrum of the Laplacian in a rectangular box, heat kernels and smooth
//! densities of states.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Relative tolerance below which two edge lengths count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

impl BoundaryCondition {
    /// +1 for Neumann, −1 for Dirichlet: the sign carried by the surface
    /// terms of the spectrum.
    pub fn sign(self) -> f64 {
        match self {
            BoundaryCondition::Neumann => 1.0,
            BoundaryCondition::Dirichlet => -1.0,
        }
    }

    /// Smallest admissible quantum number.
    pub fn lowest_index(self) -> u64 {
        match self {
            BoundaryCondition::Neumann => 0,
            BoundaryCondition::Dirichlet => 1,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            other => invalid(format!("unknown boundary condition '{other}'")),
        }
    }
}

/// Rectangular cavity with edges L1, L2, L3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityGeometry {
    pub l: [f64; 3],
    pub bc: BoundaryCondition,
}

impl CavityGeometry {
    pub fn new(l: [f64; 3], bc: BoundaryCondition) -> Result<Self> {
        if l.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return invalid(format!("edge lengths must be positive and finite, got {l:?}"));
        }
        Ok(Self { l, bc })
    }

    pub fn volume(&self) -> f64 {
        self.l.iter().product()
    }

    /// Same cavity with edges in ascending order.
    pub fn sorted(&self) -> Self {
        let mut l = self.l;
        l.sort_by(f64::total_cmp);
        Self { l, bc: self.bc }
    }

    /// Anisotropy integers a1 = L3/L1 and a2 = L3/L2 of the sorted cavity.
    ///
    /// Fails unless both ratios are integers to relative precision 1e-9.
    pub fn anisotropy(&self) -> Result<(u64, u64)> {
        let s = self.sorted().l;
        let to_int = |r: f64| -> Result<u64> {
            let k = r.round();
            if (r - k).abs() > 1e-9 * r {
                return invalid(format!("edge ratio {r} is not an integer"));
            }
            Ok(k as u64)
        };
        Ok((to_int(s[2] / s[0])?, to_int(s[2] / s[1])?))
    }

    /// Lowest single-particle energy √(ω_min + m²).
    pub fn ground_energy(&self, m: f64) -> f64 {
        let n = self.bc.lowest_index() as f64;
        let w: f64 = self.l.iter().map(|&li| (PI * n / li).powi(2)).sum();
        (w + m * m).sqrt()
    }

    /// Whether edges i and j are tied.
    pub fn tied(&self, i: usize, j: usize) -> bool {
        (self.l[i] - self.l[j]).abs() < TIE_TOLERANCE * self.l[i].min(self.l[j])
    }

    pub fn eta(&self, beta: f64) -> EtaVector {
        let bb = beta / (2.0 * PI);
        EtaVector { eta: self.l.map(|li| bb / li) }
    }
}

/// Quantum numbers of a cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ModeIndex {
    pub n: [u64; 3],
}

impl ModeIndex {
    pub fn new(n: [u64; 3]) -> Self {
        Self { n }
    }

    fn check(&self, bc: BoundaryCondition) -> Result<()> {
        if self.n.iter().any(|&k| k < bc.lowest_index()) {
            return invalid(format!("mode {:?} not admissible for {bc} walls", self.n));
        }
        Ok(())
    }

    /// Bit mask of axes that are above their lowest admissible level.
    pub fn excited_mask(&self, bc: BoundaryCondition) -> u8 {
        let lo = bc.lowest_index();
        (0..3).filter(|&i| self.n[i] > lo).fold(0, |m, i| m | 1 << i)
    }
}

/// η_i = β̄/L_i with β̄ = β/2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaVector {
    pub eta: [f64; 3],
}

impl EtaVector {
    /// Components in descending order.
    pub fn sorted_desc(&self) -> [f64; 3] {
        let mut e = self.eta;
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    pub fn max(&self) -> f64 {
        self.eta.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// ω_N = Σ (π n_i / L_i)².
pub fn eigenvalue(n: ModeIndex, g: &CavityGeometry) -> Result<f64> {
    n.check(g.bc)?;
    Ok((0..3).map(|i| (PI * n.n[i] as f64 / g.l[i]).powi(2)).sum())
}

/// Jacobi theta function 1 + 2 Σ_{n≥1} e^{−n²τ} cos(2nz) for τ > 0.
///
/// For τ < π the dual representation √(π/τ) Σ_k e^{−(z−πk)²/τ} is summed
/// instead, so that either series needs only a handful of terms.
pub fn theta3(z: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return invalid(format!("theta3 needs tau > 0, got {tau}"));
    }
    if !z.is_finite() {
        return invalid("theta3 needs finite z");
    }
    if tau >= PI {
        let mut sum = 1.0;
        let mut n = 1.0;
        loop {
            let w = (-n * n * tau).exp();
            sum += 2.0 * w * (2.0 * n * z).cos();
            if w < 1e-18 {
                break;
            }
            n += 1.0;
        }
        Ok(sum)
    } else {
        let z0 = z - PI * (z / PI).round();
        let mut sum = (-z0 * z0 / tau).exp();
        let mut k = 1.0;
        loop {
            let a = (-(z0 - PI * k).powi(2) / tau).exp();
            let b = (-(z0 + PI * k).powi(2) / tau).exp();
            sum += a + b;
            if a + b < 1e-18 * sum {
                break;
            }
            k += 1.0;
        }
        Ok((PI / tau).sqrt() * sum)
    }
}

/// Σ_{n≥n0} e^{−n²t} for t > 0 and n0 ≥ 0.
pub fn theta_tail(t: f64, n0: u64) -> Result<f64> {
    if t >= PI {
        let mut sum = 0.0;
        let mut n = n0;
        loop {
            let w = (-((n * n) as f64) * t).exp();
            sum += w;
            if w <= 1e-18 * sum || w == 0.0 {
                break;
            }
            n += 1;
        }
        Ok(sum)
    } else {
        let full = 0.5 * (theta3(0.0, t)? + 1.0);
        let head: f64 = (0..n0).map(|n| (-((n * n) as f64) * t).exp()).sum();
        Ok(full - head)
    }
}

/// Mode sum of one axis, Σ_n e^{−π²η²τ n²} over the admissible n.
pub fn axis_kernel(eta: f64, tau: f64, bc: BoundaryCondition) -> Result<f64> {
    if !(tau > 0.0) {
        return invalid(format!("heat kernel needs tau > 0, got {tau}"));
    }
    theta_tail(PI * PI * eta * eta * tau, bc.lowest_index())
}

/// K(τ) = Σ_N e^{−β̄²ω_N τ} = (1/8) Π_i [θ₃(0, π²η_i²τ) ± 1].
pub fn heat_kernel_exact(tau: f64, g: &CavityGeometry, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return invalid("beta must be positive");
    }
    let eta = g.eta(beta).eta;
    let mut k = 1.0;
    for e in eta {
        k *= axis_kernel(e, tau, g.bc)?;
    }
    Ok(k)
}

/// Coefficients of K(τ) ≈ Σ_k A_k / (β̄^k τ^{k/2}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatKernelCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub bc_sign: f64,
}

impl HeatKernelCoeffs {
    pub fn as_array(&self) -> [f64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }

    /// Four-term short-time expansion of the heat kernel.
    pub fn expansion(&self, tau: f64, beta: f64) -> f64 {
        let bb = beta / (2.0 * PI);
        self.as_array().iter().enumerate().map(|(k, a)| a / (bb.powi(k as i32) * tau.powf(k as f64 / 2.0))).sum()
    }
}

pub fn heat_kernel_coeffs(g: &CavityGeometry) -> HeatKernelCoeffs {
    let [l1, l2, l3] = g.l;
    let s = g.bc.sign();
    HeatKernelCoeffs {
        a0: s / 8.0,
        a1: (l1 + l2 + l3) / (8.0 * PI.sqrt()),
        a2: s * (l1 * l2 + l2 * l3 + l3 * l1) / (8.0 * PI),
        a3: l1 * l2 * l3 / (8.0 * PI.powf(1.5)),
        bc_sign: s,
    }
}

/// Class of a set of excited axes (bit mask): the number of directions
/// that are at least as soft as the most confined excited one.
///
/// With i* the excited axis of largest η (shortest edge), the class counts
/// the axes with η strictly below η_{i*} plus the excited axes tied with it.
pub fn pattern_class(mask: u8, g: &CavityGeometry) -> u8 {
    if mask & 0b111 == 0 {
        return 0;
    }
    let excited: Vec<usize> = (0..3).filter(|&i| mask >> i & 1 == 1).collect();
    let star = *excited.iter().min_by(|&&i, &&j| g.l[i].total_cmp(&g.l[j])).expect("non-empty");
    let softer = (0..3).filter(|&j| !g.tied(j, star) && g.l[j] > g.l[star]).count();
    let tied = excited.iter().filter(|&&j| g.tied(j, star)).count();
    (softer + tied) as u8
}

/// Excitation class of a mode, 0 for the ground state and 1–3 for modes
/// counted by the one-, two- and three-dimensional kernels.
///
/// For Dirichlet walls an axis counts as excited when n_i > 1.
pub fn classify_mode(n: ModeIndex, g: &CavityGeometry) -> Result<u8> {
    n.check(g.bc)?;
    Ok(pattern_class(n.excited_mask(g.bc), g))
}

/// Heat kernel split by excitation class, [K0, K1, K2, K3].
pub fn partitioned_heat_kernels(tau: f64, g: &CavityGeometry, beta: f64) -> Result<[f64; 4]> {
    if !(beta > 0.0) {
        return invalid("beta must be positive");
    }
    if !(tau > 0.0) {
        return invalid(format!("heat kernel needs tau > 0, got {tau}"));
    }
    let eta = g.eta(beta).eta;
    let lo = g.bc.lowest_index();
    let mut ground = [0.0; 3];
    let mut excited = [0.0; 3];
    for i in 0..3 {
        let t = PI * PI * eta[i] * eta[i] * tau;
        ground[i] = (-((lo * lo) as f64) * t).exp();
        excited[i] = theta_tail(t, lo + 1)?;
    }
    let mut k = [0.0; 4];
    for mask in 0u8..8 {
        let w: f64 = (0..3).map(|i| if mask >> i & 1 == 1 { excited[i] } else { ground[i] }).product();
        k[pattern_class(mask, g) as usize] += w;
    }
    Ok(k)
}

/// Hierarchy of edge lengths assumed by the asymptotic formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// All edges equal.
    #[serde(rename = "isotropic")]
    Isotropic,
    /// L1 = L2 < L3: one long direction.
    #[serde(rename = "1D")]
    OneD,
    /// L1 < L2 = L3: one short direction.
    #[serde(rename = "2D")]
    TwoD,
    /// L1 < L2 < L3.
    #[serde(rename = "3step")]
    ThreeStep,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Isotropic => "isotropic",
            Scenario::OneD => "1D",
            Scenario::TwoD => "2D",
            Scenario::ThreeStep => "3step",
        }
    }

    /// Scenario implied by the tie pattern of the sorted edges.
    pub fn detect(g: &CavityGeometry) -> Scenario {
        let s = g.sorted();
        match (s.tied(0, 1), s.tied(1, 2)) {
            (true, true) => Scenario::Isotropic,
            (true, false) => Scenario::OneD,
            (false, true) => Scenario::TwoD,
            (false, false) => Scenario::ThreeStep,
        }
    }

    /// Fails unless the edge ordering of `g` matches this scenario.
    pub fn check(self, g: &CavityGeometry) -> Result<()> {
        let found = Scenario::detect(g);
        if found != self {
            return Err(Error::ScenarioMismatch(format!(
                "edges {:?} describe a {} cavity, not {}",
                g.l,
                found.as_str(),
                self.as_str()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "isotropic" | "iso" => Ok(Scenario::Isotropic),
            "1d" => Ok(Scenario::OneD),
            "2d" => Ok(Scenario::TwoD),
            "3step" | "3-step" | "three-step" => Ok(Scenario::ThreeStep),
            other => invalid(format!("unknown scenario '{other}'")),
        }
    }
}

/// Smooth densities of states in the dimensionless energy ε = ω L3²/π².
///
/// ρ3(ε) = weyl·√ε + surface for three-dimensionally excited modes, ρ2 is the
/// constant density of the two-dimensionally excited ones, and the cutoffs
/// are the lowest excited levels of each class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothDos {
    pub weyl: f64,
    pub surface: f64,
    pub rho2: Option<f64>,
    pub eps1_3d: f64,
    pub eps1_2d: Option<f64>,
}

impl SmoothDos {
    pub fn rho3(&self, epsilon: f64) -> f64 {
        self.weyl * epsilon.sqrt() + self.surface
    }
}

pub fn smooth_dos(g: &CavityGeometry, scenario: Scenario) -> Result<SmoothDos> {
    scenario.check(g)?;
    let (a1, a2) = g.anisotropy()?;
    let (a1, a2) = (a1 as f64, a2 as f64);
    if scenario != Scenario::Isotropic && g.bc == BoundaryCondition::Dirichlet {
        return Err(Error::ScenarioMismatch("the multistep densities of states are derived for Neumann walls".into()));
    }
    let dos = match scenario {
        Scenario::Isotropic => {
            SmoothDos { weyl: PI / 4.0, surface: g.bc.sign() * 3.0 * PI / 8.0, rho2: None, eps1_3d: 1.0, eps1_2d: None }
        }
        Scenario::OneD => SmoothDos {
            weyl: PI / (4.0 * a1 * a1),
            surface: -PI / 24.0 * (1.0 / (a1 * a1) + 2.0 / a1),
            rho2: Some(PI / (2.0 * a1)),
            eps1_3d: a1 * a1,
            eps1_2d: Some(a1 * a1),
        },
        Scenario::TwoD => SmoothDos {
            weyl: PI / (4.0 * a1 * a1),
            surface: PI / 24.0 * (2.0 / a1 + 1.0),
            rho2: Some(PI / 4.0),
            eps1_3d: a1 * a1,
            eps1_2d: Some(1.0),
        },
        Scenario::ThreeStep => SmoothDos {
            weyl: PI / (4.0 * a1 * a2),
            surface: PI / 24.0 * (1.0 / (a1 * a2) + 1.0 / a1 + 1.0 / a2),
            rho2: Some(PI / (4.0 * a2)),
            eps1_3d: a1 * a1,
            eps1_2d: Some(a2 * a2),
        },
    };
    Ok(dos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use BoundaryCondition::{Dirichlet, Neumann};

    fn cav(l: [f64; 3], bc: BoundaryCondition) -> CavityGeometry {
        CavityGeometry::new(l, bc).unwrap()
    }

    #[test]
    fn eigenvalues() {
        let g = cav([1.0, 1.0, 1.0], Neumann);
        assert_eq!(eigenvalue(ModeIndex::new([0, 0, 0]), &g).unwrap(), 0.0);
        let d = cav([1.0, 1.0, 1.0], Dirichlet);
        assert!((eigenvalue(ModeIndex::new([1, 1, 1]), &d).unwrap() - 3.0 * PI * PI).abs() < 1e-12);
        let g = cav([1.0, 2.0, 3.0], Neumann);
        assert!((eigenvalue(ModeIndex::new([1, 2, 3]), &g).unwrap() - 3.0 * PI * PI).abs() < 1e-12);
        assert!(eigenvalue(ModeIndex::new([0, 1, 1]), &d).is_err());
    }

    #[test]
    fn theta_values() {
        let t = theta3(0.0, 50.0).unwrap();
        assert!((t - (1.0 + 2.0 * (-50f64).exp())).abs() < 1e-15);
        let t = theta3(0.0, 1e-4).unwrap();
        assert!((t / (PI / 1e-4).sqrt() - 1.0).abs() < 1e-12);
        assert!(theta3(0.0, 0.0).is_err());
        assert!(theta3(0.0, -1.0).is_err());
    }

    #[test]
    fn theta_duality_and_crossover() {
        for &tau in &[0.01, 0.3, 1.0, 2.5, 3.0, 4.0, 9.0] {
            let lhs = theta3(0.0, tau).unwrap();
            let rhs = (PI / tau).sqrt() * theta3(0.0, PI * PI / tau).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "tau {tau}");
        }
        // both series agree at the switch, with z ≠ 0 too
        for &z in &[0.0, 0.4, 1.3, -2.0] {
            let below = theta3(z, PI * (1.0 - 1e-12)).unwrap();
            let above = theta3(z, PI).unwrap();
            assert!((below - above).abs() < 1e-11);
        }
    }

    #[test]
    fn heat_kernel_limits() {
        let n = cav([1.0, 2.0, 3.0], Neumann);
        let d = cav([1.0, 2.0, 3.0], Dirichlet);
        assert!((heat_kernel_exact(1e4, &n, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(heat_kernel_exact(1e4, &d, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn heat_kernel_matches_mode_sum() {
        let g = cav([1.0, 1.7, 2.3], Neumann);
        let beta = 2.0;
        let tau = 0.8;
        let bb = beta / (2.0 * PI);
        let mut sum = 0.0;
        for a in 0..40 {
            for b in 0..40 {
                for c in 0..40 {
                    let w = eigenvalue(ModeIndex::new([a, b, c]), &g).unwrap();
                    sum += (-bb * bb * w * tau).exp();
                }
            }
        }
        assert!((heat_kernel_exact(tau, &g, beta).unwrap() / sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficients_unit_cube() {
        let c = heat_kernel_coeffs(&cav([1.0; 3], Neumann));
        assert!((c.a3 - 1.0 / (8.0 * PI.powf(1.5))).abs() < 1e-15);
        assert!((c.a2 - 3.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((c.a1 - 3.0 / (8.0 * PI.sqrt())).abs() < 1e-15);
        assert_eq!(c.a0, 0.125);
        let d = heat_kernel_coeffs(&cav([1.0; 3], Dirichlet));
        assert_eq!(d.a2, -c.a2);
        assert_eq!(d.a0, -0.125);
        assert_eq!(d.a3, c.a3);
        assert_eq!(d.a1, c.a1);
        let big = heat_kernel_coeffs(&cav([1.0, 10.0, 100.0], Neumann));
        assert!((big.a3 - 1000.0 / (8.0 * PI.powf(1.5))).abs() < 1e-12);
    }

    #[test]
    fn expansion_small_eta() {
        // η_i = 0.01 means β̄ = 0.01 L_i
        let g = cav([1.0, 1.0, 1.0], Neumann);
        let beta = 2.0 * PI * 0.01;
        let c = heat_kernel_coeffs(&g);
        for &tau in &[0.5, 1.0, 2.0] {
            let exact = heat_kernel_exact(tau, &g, beta).unwrap();
            assert!((exact - c.expansion(tau, beta)).abs() / exact < 1e-4);
        }
    }

    #[test]
    fn mode_classes() {
        let three = cav([1.0, 2.0, 4.0], Neumann);
        assert_eq!(classify_mode(ModeIndex::new([1, 0, 0]), &three).unwrap(), 3);
        assert_eq!(classify_mode(ModeIndex::new([0, 1, 5]), &three).unwrap(), 2);
        assert_eq!(classify_mode(ModeIndex::new([0, 0, 5]), &three).unwrap(), 1);
        assert_eq!(classify_mode(ModeIndex::new([0, 0, 0]), &three).unwrap(), 0);
        let one = cav([2.0, 2.0, 300.0], Neumann);
        assert_eq!(classify_mode(ModeIndex::new([0, 1, 0]), &one).unwrap(), 2);
        assert_eq!(classify_mode(ModeIndex::new([1, 0, 0]), &one).unwrap(), 2);
        assert_eq!(classify_mode(ModeIndex::new([1, 1, 0]), &one).unwrap(), 3);
        assert_eq!(classify_mode(ModeIndex::new([0, 0, 3]), &one).unwrap(), 1);
        let two = cav([2.0, 200.0, 200.0], Neumann);
        assert_eq!(classify_mode(ModeIndex::new([0, 1, 0]), &two).unwrap(), 1);
        assert_eq!(classify_mode(ModeIndex::new([0, 1, 1]), &two).unwrap(), 2);
        assert_eq!(classify_mode(ModeIndex::new([1, 0, 0]), &two).unwrap(), 3);
        let cube = cav([3.0; 3], Neumann);
        assert_eq!(classify_mode(ModeIndex::new([0, 0, 7]), &cube).unwrap(), 1);
        assert_eq!(classify_mode(ModeIndex::new([2, 0, 7]), &cube).unwrap(), 2);
        let dir = cav([1.0, 2.0, 4.0], Dirichlet);
        assert_eq!(classify_mode(ModeIndex::new([1, 1, 1]), &dir).unwrap(), 0);
        assert_eq!(classify_mode(ModeIndex::new([2, 1, 1]), &dir).unwrap(), 3);
    }

    #[test]
    fn partition_examples() {
        let cube = cav([1.0; 3], Neumann);
        let beta = 3.0;
        let tau = 0.7;
        let k = partitioned_heat_kernels(tau, &cube, beta).unwrap();
        let single = axis_kernel(cube.eta(beta).eta[0], tau, Neumann).unwrap() - 1.0;
        assert!((k[1] - 3.0 * single).abs() < 1e-14);
        assert_eq!(k[0], 1.0);

        let g = cav([1.0, 3.0, 7.0], Neumann);
        let k = partitioned_heat_kernels(tau, &g, beta).unwrap();
        let eta = g.eta(beta).eta;
        let th = |e: f64| theta3(0.0, PI * PI * e * e * tau).unwrap();
        let k2 = 0.25 * (th(eta[1]) - 1.0) * (th(eta[2]) + 1.0);
        assert!((k[2] / k2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_dos_tables() {
        let cube = cav([1.0; 3], Neumann);
        let d = smooth_dos(&cube, Scenario::Isotropic).unwrap();
        assert!((d.weyl - PI / 4.0).abs() < 1e-15);
        assert!((d.surface - 3.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(d.eps1_3d, 1.0);
        let one = cav([2.0, 2.0, 300.0], Neumann);
        let d = smooth_dos(&one, Scenario::OneD).unwrap();
        assert!((d.rho2.unwrap() - PI / 300.0).abs() < 1e-15);
        assert_eq!(d.eps1_3d, 22500.0);
        assert!(smooth_dos(&one, Scenario::TwoD).is_err());
        let three = cav([2.0, 100.0, 600.0], Neumann);
        let d = smooth_dos(&three, Scenario::ThreeStep).unwrap();
        assert_eq!(d.eps1_2d, Some(36.0));
        assert!((d.rho2.unwrap() - PI / 24.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_dos_laplace_transform() {
        // ∫ ρ3(ε) e^{−sε} dε = weyl·Γ(3/2)/s^{3/2} + surface/s, with
        // s = π²η3²τ, reproduces A3 and A2 of the heat kernel.
        let g = cav([1.0; 3], Neumann);
        let d = smooth_dos(&g, Scenario::Isotropic).unwrap();
        let c = heat_kernel_coeffs(&g);
        let (beta, tau) = (0.05, 1.3);
        let bb = beta / (2.0 * PI);
        let s = PI * PI * bb * bb * tau;
        let w = d.weyl * 0.5 * PI.sqrt() / s.powf(1.5);
        let a = d.surface / s;
        assert!((w / (c.a3 / (bb.powi(3) * tau.powf(1.5))) - 1.0).abs() < 1e-12);
        assert!((a / (c.a2 / (bb * bb * tau)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_detection() {
        assert_eq!(Scenario::detect(&cav([3.0; 3], Neumann)), Scenario::Isotropic);
        assert_eq!(Scenario::detect(&cav([300.0, 2.0, 2.0], Neumann)), Scenario::OneD);
        assert_eq!(Scenario::detect(&cav([2.0, 200.0, 200.0], Neumann)), Scenario::TwoD);
        assert_eq!(Scenario::detect(&cav([2.0, 100.0, 600.0], Neumann)), Scenario::ThreeStep);
        assert_eq!("3step".parse::<Scenario>().unwrap(), Scenario::ThreeStep);
    }

    proptest! {
        #[test]
        fn partition_sums_to_total(
            l1 in 0.5f64..20.0, l2 in 0.5f64..20.0, l3 in 0.5f64..20.0,
            beta in 0.05f64..5.0, tau in 0.05f64..5.0, dir in proptest::bool::ANY,
        ) {
            let bc = if dir { Dirichlet } else { Neumann };
            let g = cav([l1, l2, l3], bc);
            let k = partitioned_heat_kernels(tau, &g, beta).unwrap();
            let total = heat_kernel_exact(tau, &g, beta).unwrap();
            let s: f64 = k.iter().sum();
            prop_assert!((s - total).abs() <= 1e-12 * total);
            prop_assert!(k.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn dirichlet_kernel_below_neumann(
            l1 in 0.5f64..20.0, l2 in 0.5f64..20.0, l3 in 0.5f64..20.0, tau in 0.01f64..10.0,
        ) {
            let kn = heat_kernel_exact(tau, &cav([l1, l2, l3], Neumann), 1.0).unwrap();
            let kd = heat_kernel_exact(tau, &cav([l1, l2, l3], Dirichlet), 1.0).unwrap();
            prop_assert!(kd <= kn);
        }

        #[test]
        fn class_invariant_under_relabeling(n0 in 0u64..4, n1 in 0u64..4, n2 in 0u64..4) {
            let g = cav([2.0, 2.0, 9.0], Neumann);
            let a = classify_mode(ModeIndex::new([n0, n1, n2]), &g).unwrap();
            let b = classify_mode(ModeIndex::new([n1, n0, n2]), &g).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
