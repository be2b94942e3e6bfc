//! Fast evaluation of the Bose–Einstein charge at fixed temperature.
//!
//! Modes close to the ground level are kept individually. Every other mode
//! has β(E − E₀) ≥ 1, so its occupation is expanded in powers of the
//! Boltzmann factor, and the weights of that expansion are lattice sums
//! Σ e^{−jβ(E − E₀)}. Directions that are long compared with the thermal
//! length are summed by Poisson resummation into Bessel functions; the rest
//! are enumerated.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::bessel_k_scaled;
use crate::spectral::{pattern_class, BoundaryCondition, CavityGeometry};

/// Modes with β(E − E₀) below this are summed individually, unless there
/// are too many of them.
const NEAR_GAP: f64 = 1.0;
/// Smallest near gap; the Boltzmann expansion then needs FAR_CUT/gap terms.
const MIN_NEAR_GAP: f64 = 0.02;
/// Estimated near-mode count above which the near gap is narrowed.
const NEAR_TARGET: f64 = 4e6;
/// Exponent cutoff inside the lattice sums and of the Boltzmann expansion.
pub const FAR_CUT: f64 = 40.0;
/// Upper limit on enumerated near modes.
const NEAR_BUDGET: u64 = 60_000_000;
/// Upper limit on enumerated lattice points across all expansion terms.
const FAR_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, Copy)]
struct NearMode {
    /// β(E − E₀).
    u: f64,
    class: u8,
}

/// Spectrum of a cavity prepared for repeated charge evaluation at one
/// temperature.
///
/// The chemical potential enters only through the reduced variable
/// x = β(E₀ − μ) > 0.
#[derive(Debug, Clone)]
pub struct ThermalSpectrum {
    beta: f64,
    e0: f64,
    near: Vec<NearMode>,
    far: [Vec<f64>; 4],
}

struct Axes {
    l: [f64; 3],
    w: [f64; 3],
    lo: u64,
    dirichlet: bool,
    m: f64,
    omega0: f64,
    e0: f64,
}

impl Axes {
    /// E − E₀ for a mode of eigenvalue ω, without cancellation.
    fn gap(&self, omega: f64) -> f64 {
        (omega - self.omega0) / ((omega + self.m * self.m).sqrt() + self.e0)
    }

    fn level(&self, i: usize, n: u64) -> f64 {
        self.w[i] * (n * n) as f64
    }
}

impl ThermalSpectrum {
    pub fn new(g: &CavityGeometry, m: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("temperature must be positive, got {t}")));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidInput(format!("mass must be non-negative, got {m}")));
        }
        let lo = g.bc.lowest_index();
        let w = g.l.map(|li| (PI / li).powi(2));
        let omega0: f64 = w.iter().map(|wi| wi * (lo * lo) as f64).sum();
        let axes =
            Axes { l: g.l, w, lo, dirichlet: g.bc == BoundaryCondition::Dirichlet, m, omega0, e0: g.ground_energy(m) };
        let beta = 1.0 / t;
        let classes: [u8; 8] = std::array::from_fn(|mask| pattern_class(mask as u8, g));

        let delta = near_gap(&axes, beta);
        let j_max = (FAR_CUT / delta).ceil() as usize;
        let near = near_modes(&axes, beta, delta, &classes)?;
        let mut far: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; j_max]);
        let mut work = 0u64;
        for j in 1..=j_max {
            let b = beta * j as f64;
            for mask in 1u8..8 {
                far[classes[mask as usize] as usize][j - 1] += pattern_sum(&axes, mask, b, &mut work)?;
            }
        }
        for mode in &near {
            if mode.class == 0 {
                continue;
            }
            let r = (-mode.u).exp();
            let mut p = r;
            let row = &mut far[mode.class as usize];
            for wj in row.iter_mut() {
                *wj -= p;
                p *= r;
            }
        }
        Ok(Self { beta, e0: axes.e0, near, far })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Lowest single-particle energy E₀.
    pub fn ground_energy(&self) -> f64 {
        self.e0
    }

    /// Number of modes summed individually.
    pub fn near_mode_count(&self) -> usize {
        self.near.len()
    }

    /// Net charge split by excitation class at reduced chemical potential x.
    pub fn charges(&self, x: f64) -> [f64; 4] {
        let two = 2.0 * self.beta * self.e0;
        let mut q = [0.0; 4];
        for mode in &self.near {
            let v = mode.u + two;
            q[mode.class as usize] += 1.0 / (mode.u + x).exp_m1() - 1.0 / (v - x).exp_m1();
        }
        let damp = two - 2.0 * x;
        for (c, row) in self.far.iter().enumerate().skip(1) {
            let r = (-x).exp();
            let mut p = r;
            let mut s = 0.0;
            for (j, wj) in row.iter().enumerate() {
                let jj = (j + 1) as f64;
                s += wj * p * -(-jj * damp).exp_m1();
                p *= r;
            }
            q[c] += s;
        }
        q
    }

    pub fn charge(&self, x: f64) -> f64 {
        self.charges(x).iter().sum()
    }
}

/// Width of the individually summed band, narrowed when the estimated
/// number of modes in it exceeds the target.
fn near_gap(axes: &Axes, beta: f64) -> f64 {
    let estimate = |delta: f64| -> f64 {
        let e = axes.e0 + delta / beta;
        let k = (e * e - axes.m * axes.m).max(0.0).sqrt();
        axes.l.iter().map(|&li| li * k / PI + 1.0).product::<f64>() * PI / 6.0
    };
    let mut delta = NEAR_GAP;
    while delta > MIN_NEAR_GAP && estimate(delta) > NEAR_TARGET {
        delta = (delta * 0.7).max(MIN_NEAR_GAP);
    }
    delta
}

fn near_modes(axes: &Axes, beta: f64, delta: f64, classes: &[u8; 8]) -> Result<Vec<NearMode>> {
    let e_max = axes.e0 + delta / beta;
    let omega_max = e_max * e_max - axes.m * axes.m;
    let lo = axes.lo;
    let base = [axes.level(0, lo), axes.level(1, lo), axes.level(2, lo)];
    let mut out = Vec::new();
    let mut n0 = lo;
    loop {
        let o0 = axes.level(0, n0);
        if o0 + base[1] + base[2] > omega_max && n0 > lo {
            break;
        }
        let mut n1 = lo;
        loop {
            let o1 = o0 + axes.level(1, n1);
            if o1 + base[2] > omega_max && n1 > lo {
                break;
            }
            let mut n2 = lo;
            loop {
                let o = o1 + axes.level(2, n2);
                let u = beta * axes.gap(o);
                if u >= delta && (n0, n1, n2) != (lo, lo, lo) {
                    break;
                }
                if out.len() as u64 >= NEAR_BUDGET {
                    return Err(Error::BudgetExceeded { needed: out.len() as f64, budget: NEAR_BUDGET });
                }
                let mask = (n0 > lo) as u8 | ((n1 > lo) as u8) << 1 | ((n2 > lo) as u8) << 2;
                out.push(NearMode { u: u.max(0.0), class: classes[mask as usize] });
                n2 += 1;
            }
            n1 += 1;
        }
        n0 += 1;
    }
    Ok(out)
}

/// Σ e^{−b(E − E₀)} over all modes whose excited axes are exactly `mask`.
fn pattern_sum(axes: &Axes, mask: u8, b: f64, work: &mut u64) -> Result<f64> {
    let lo = axes.lo;
    let first = lo + 1;
    let mut fixed = 0.0;
    let mut discrete = Vec::with_capacity(3);
    let mut continuum = Vec::with_capacity(3);
    for i in 0..3 {
        if mask >> i & 1 == 0 {
            fixed += axes.level(i, lo);
        } else if is_continuum(axes, i, b) {
            continuum.push(i);
        } else {
            discrete.push(i);
        }
    }
    let cont_min: f64 = continuum.iter().map(|&i| axes.level(i, first)).sum();
    let mut total = 0.0;
    walk(axes, &discrete, fixed, cont_min, b, work, &mut |omega, work| {
        total += continuum_sum(axes, &continuum, omega, b, work)?;
        Ok(())
    })?;
    Ok(total)
}

/// Whether axis i is long enough at inverse temperature b for Poisson
/// resummation to need far fewer terms than direct summation.
fn is_continuum(axes: &Axes, i: usize, b: f64) -> bool {
    if axes.m <= 0.0 {
        return false;
    }
    let e_top = axes.e0 + FAR_CUT / b;
    let n_direct = axes.l[i] / PI * (e_top * e_top - axes.m * axes.m).max(0.0).sqrt() - axes.lo as f64;
    let reach = b + FAR_CUT / axes.m;
    let n_dual = (reach * reach - b * b).sqrt() / (2.0 * axes.l[i]);
    n_dual < n_direct / 4.0 && (!axes.dirichlet || n_direct >= 20.0)
}

/// Visits every excited index combination of `axes_left` whose energy lies
/// within the exponent cutoff, passing the accumulated eigenvalue.
fn walk(
    axes: &Axes,
    axes_left: &[usize],
    omega: f64,
    rest_min: f64,
    b: f64,
    work: &mut u64,
    leaf: &mut dyn FnMut(f64, &mut u64) -> Result<()>,
) -> Result<()> {
    let Some((&i, tail)) = axes_left.split_first() else {
        return leaf(omega, work);
    };
    let first = axes.lo + 1;
    let tail_min: f64 = tail.iter().map(|&k| axes.level(k, first)).sum();
    let mut n = first;
    loop {
        let o = omega + axes.level(i, n);
        if b * axes.gap(o + tail_min + rest_min) > FAR_CUT {
            break;
        }
        *work += 1;
        if *work > FAR_BUDGET {
            return Err(Error::BudgetExceeded { needed: *work as f64, budget: FAR_BUDGET });
        }
        walk(axes, tail, o, rest_min, b, work, leaf)?;
        n += 1;
    }
    Ok(())
}

/// Sum over excited indices of the continuum axes, n_i > lo, written as
/// signed combinations of full-lattice sums.
///
/// Σ_{n>0} f = ½(Σ_ℤ f − f(0)) for Neumann walls; Dirichlet walls also drop
/// n = 1.
fn continuum_sum(axes: &Axes, cont: &[usize], omega: f64, b: f64, work: &mut u64) -> Result<f64> {
    if cont.is_empty() {
        return Ok((-b * axes.gap(omega)).exp());
    }
    let choices: usize = if axes.dirichlet { 3 } else { 2 };
    let combos = choices.pow(cont.len() as u32);
    let mut total = 0.0;
    for code in 0..combos {
        let mut c = code;
        let mut weight = 1.0;
        let mut extra = 0.0;
        let mut free = Vec::with_capacity(cont.len());
        for &i in cont {
            match c % choices {
                0 => {
                    weight *= 0.5;
                    free.push(i);
                }
                1 => weight *= -0.5,
                _ => {
                    weight = -weight;
                    extra += axes.level(i, 1);
                }
            }
            c /= choices;
        }
        let o = omega + extra;
        let s = if free.is_empty() { (-b * axes.gap(o)).exp() } else { poisson_sum(axes, &free, o, b, work)? };
        total += weight * s;
    }
    Ok(total)
}

/// e^{bE₀} Σ_{n ∈ ℤ^p} e^{−b√(Σ(πn_i/L_i)² + M²)} with M² = m² + ω, via the
/// dual lattice K = 2L·k.
fn poisson_sum(axes: &Axes, free: &[usize], omega: f64, b: f64, work: &mut u64) -> Result<f64> {
    let p = free.len();
    let mass = (axes.m * axes.m + omega).sqrt();
    let nu = (p as f64 + 1.0) / 2.0;
    let pref: f64 =
        free.iter().map(|&i| axes.l[i] / PI).product::<f64>() * 2.0 * b * (2.0 * PI).powf((p as f64 - 1.0) / 2.0);
    let shift = -b * axes.gap(omega);
    let reach = b + FAR_CUT / mass;
    let k2_max = reach * reach - b * b;
    let term = |k2: f64| -> f64 {
        let rho = (b * b + k2).sqrt();
        let z = mass * rho;
        (mass / rho).powf(nu) * bessel_k_scaled(nu, z) * (shift - mass * k2 / (rho + b)).exp()
    };
    let mut total = 0.0;
    let dual = |i: usize, k: u64| -> f64 { (2.0 * axes.l[free[i]] * k as f64).powi(2) };
    let mut k0 = 0u64;
    loop {
        let q0 = dual(0, k0);
        if q0 > k2_max && k0 > 0 {
            break;
        }
        let m0 = if k0 == 0 { 1.0 } else { 2.0 };
        if p == 1 {
            total += m0 * term(q0);
        } else {
            let mut k1 = 0u64;
            loop {
                let q1 = q0 + dual(1, k1);
                if q1 > k2_max && k1 > 0 {
                    break;
                }
                let m1 = m0 * if k1 == 0 { 1.0 } else { 2.0 };
                if p == 2 {
                    total += m1 * term(q1);
                } else {
                    let mut k2 = 0u64;
                    loop {
                        let q2 = q1 + dual(2, k2);
                        if q2 > k2_max && k2 > 0 {
                            break;
                        }
                        let m2 = m1 * if k2 == 0 { 1.0 } else { 2.0 };
                        total += m2 * term(q2);
                        k2 += 1;
                    }
                }
                k1 += 1;
            }
        }
        *work += 1;
        if *work > FAR_BUDGET {
            return Err(Error::BudgetExceeded { needed: *work as f64, budget: FAR_BUDGET });
        }
        k0 += 1;
    }
    Ok(pref * total)
}
