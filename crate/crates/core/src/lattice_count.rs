//! Lattice points inside anisotropic ellipsoids Σ a_i² n_i² ≤ ε.
//!
//! Because every a_i is an integer, the quadratic form takes integer values on
//! the lattice, so a count at real ε equals the count at ⌊ε⌋. Points lying
//! exactly on the shell are inside (closed ellipsoid) everywhere in this
//! module.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::special::{bessel_j_half, gamma};
use crate::spectral::BoundaryCondition;

/// Default cap on enumerated candidate points.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Default lower edge of the fit window for the supremum exponent.
pub const DEFAULT_FIT_FLOOR: f64 = 10.0;

/// Integer scale factors a_1 … a_d of the ellipsoid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnisotropyVector {
    a: Vec<u64>,
}

impl AnisotropyVector {
    pub fn new(a: Vec<u64>) -> Result<Self> {
        if a.is_empty() {
            return invalid("anisotropy vector must have at least one component");
        }
        if a.contains(&0) {
            return invalid("anisotropy components must be >= 1");
        }
        Ok(Self { a })
    }

    /// Three-dimensional vector (a1, a2, 1) used for the cavity with
    /// a1 L1 = a2 L2 = L3.
    pub fn cavity(a1: u64, a2: u64) -> Result<Self> {
        Self::new(vec![a1, a2, 1])
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.a
    }

    /// Π a_i.
    pub fn product(&self) -> f64 {
        self.a.iter().map(|&x| x as f64).product()
    }

    fn subset(&self, mask: usize) -> Vec<u64> {
        (0..self.dim()).filter(|i| mask >> i & 1 == 1).map(|i| self.a[i]).collect()
    }
}

/// Exact and smooth counts at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountResult {
    pub epsilon: f64,
    pub exact_count: u64,
    pub smooth_part: f64,
    pub residual: f64,
}

/// Power-law fit of the running supremum of a residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupFit {
    pub exponent_gamma: f64,
    pub prefactor: f64,
    pub sample_range: (f64, f64),
    /// Number of strict increases of the supremum used in the fit.
    pub increases: usize,
}

impl SupFit {
    pub fn eval(&self, epsilon: f64) -> f64 {
        self.prefactor * epsilon.powf(self.exponent_gamma)
    }
}

fn floor_energy(epsilon: f64) -> Result<u64> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return invalid(format!("epsilon must be finite and >= 0, got {epsilon}"));
    }
    Ok(epsilon.floor() as u64)
}

/// Number of n ∈ ℤ^d with Σ a_i² n_i² ≤ ε, by direct enumeration.
pub fn count_bruteforce(a: &AnisotropyVector, epsilon: f64) -> Result<u64> {
    count_bruteforce_with_budget(a, epsilon, DEFAULT_BUDGET)
}

/// As [`count_bruteforce`] with an explicit budget on candidate points.
///
/// The last axis is closed analytically, so the work is the size of the
/// bounding box over the remaining axes.
pub fn count_bruteforce_with_budget(a: &AnisotropyVector, epsilon: f64, budget: u64) -> Result<u64> {
    let e = floor_energy(epsilon)?;
    let d = a.dim();
    let extents: Vec<u64> = a.as_slice().iter().map(|&ai| (e / (ai * ai)).isqrt()).collect();
    let needed: f64 = extents[..d - 1].iter().map(|&k| (2 * k + 1) as f64).product();
    if needed > budget as f64 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(count_rec(a.as_slice(), e))
}

fn count_rec(a: &[u64], rem: u64) -> u64 {
    let (&last, rest) = a.split_last().expect("non-empty");
    if rest.is_empty() {
        return 2 * (rem / (last * last)).isqrt() + 1;
    }
    let (&head, _) = rest.split_first().expect("non-empty");
    let a2 = head * head;
    let kmax = (rem / a2).isqrt();
    let mut total = count_rec(&a[1..], rem);
    for k in 1..=kmax {
        total += 2 * count_rec(&a[1..], rem - a2 * k * k);
    }
    total
}

fn full_count_subset(a: &AnisotropyVector, mask: usize, epsilon: f64) -> Result<i64> {
    if mask == 0 {
        return Ok(1);
    }
    let sub = AnisotropyVector::new(a.subset(mask))?;
    Ok(count_bruteforce(&sub, epsilon)? as i64)
}

/// Number of cavity modes with dimensionless energy Σ a_i² n_i² ≤ ε.
///
/// Neumann admits n_i ≥ 0, Dirichlet n_i ≥ 1. Computed by inclusion and
/// exclusion over full-lattice counts of every coordinate subspace.
pub fn cumulative_dos(a: &AnisotropyVector, epsilon: f64, bc: BoundaryCondition) -> Result<u64> {
    let d = a.dim();
    if d > 3 {
        return invalid("cumulative_dos is defined for d <= 3");
    }
    floor_energy(epsilon)?;
    let mut acc: i64 = 0;
    for mask in 0..(1usize << d) {
        let n = full_count_subset(a, mask, epsilon)?;
        let missing = d - mask.count_ones() as usize;
        let sign = match bc {
            BoundaryCondition::Neumann => 1,
            BoundaryCondition::Dirichlet => {
                if missing.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
        };
        acc += sign * n;
    }
    let denom = 1i64 << d;
    debug_assert_eq!(acc % denom, 0);
    Ok((acc / denom) as u64)
}

/// Rebuilds the full-lattice count N_d(ε) from the mode counts of every
/// coordinate subspace: N = Σ_S (±1)^{d−|S|} 2^{|S|} N̄_S, upper sign for
/// Dirichlet.
pub fn recombine_full_count(a: &AnisotropyVector, epsilon: f64, bc: BoundaryCondition) -> Result<u64> {
    let d = a.dim();
    let mut acc: i64 = 0;
    for mask in 0..(1usize << d) {
        let k = mask.count_ones() as usize;
        let nbar =
            if mask == 0 { 1 } else { cumulative_dos(&AnisotropyVector::new(a.subset(mask))?, epsilon, bc)? as i64 };
        let sign = match bc {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Neumann => {
                if (d - k).is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
        };
        acc += sign * (1i64 << k) * nbar;
    }
    Ok(acc as u64)
}

/// Volume and surface terms of the three-dimensional mode count,
/// (π/6) ε^{3/2}/(a1a2a3) ∓ (πε/8) Σ_{i<j} 1/(a_i a_j), upper sign Dirichlet.
pub fn smooth_count(a: &AnisotropyVector, epsilon: f64, bc: BoundaryCondition) -> Result<f64> {
    let s = a.as_slice();
    if s.len() != 3 {
        return invalid("smooth count needs a three-component anisotropy vector");
    }
    let (a1, a2, a3) = (s[0] as f64, s[1] as f64, s[2] as f64);
    let volume = PI / 6.0 * epsilon.powf(1.5) / (a1 * a2 * a3);
    let surface = PI * epsilon / 8.0 * (1.0 / (a1 * a2) + 1.0 / (a1 * a3) + 1.0 / (a2 * a3));
    Ok(volume + bc.sign() * surface)
}

/// Splits the mode count at ε into its smooth part and the residual Δ(ε).
pub fn residual_delta(a: &AnisotropyVector, epsilon: f64, bc: BoundaryCondition) -> Result<CountResult> {
    let smooth_part = smooth_count(a, epsilon, bc)?;
    let exact_count = cumulative_dos(a, epsilon, bc)?;
    Ok(CountResult { epsilon, exact_count, smooth_part, residual: exact_count as f64 - smooth_part })
}

/// Mode counts at every integer energy 0..=eps_max in one enumeration pass.
pub fn cumulative_dos_table(a: &AnisotropyVector, eps_max: u64, bc: BoundaryCondition) -> Result<Vec<u64>> {
    let s = a.as_slice();
    let lo = match bc {
        BoundaryCondition::Neumann => 0u64,
        BoundaryCondition::Dirichlet => 1,
    };
    let points: f64 = s.iter().map(|&ai| ((eps_max / (ai * ai)).isqrt() + 1) as f64).product();
    if points > DEFAULT_BUDGET as f64 {
        return Err(Error::BudgetExceeded { needed: points, budget: DEFAULT_BUDGET });
    }
    let mut hist = vec![0u64; eps_max as usize + 1];
    fill_orthant(s, lo, eps_max, 0, &mut hist);
    let mut run = 0;
    for h in hist.iter_mut() {
        run += *h;
        *h = run;
    }
    Ok(hist)
}

fn fill_orthant(a: &[u64], lo: u64, limit: u64, acc: u64, hist: &mut [u64]) {
    let (&head, rest) = a.split_first().expect("non-empty");
    let a2 = head * head;
    let mut n = lo;
    loop {
        let v = acc + a2 * n * n;
        if v > limit {
            break;
        }
        if rest.is_empty() {
            hist[v as usize] += 1;
        } else {
            fill_orthant(rest, lo, limit, v, hist);
        }
        n += 1;
    }
}

/// Residuals at every integer ε in 1..=eps_max.
pub fn residual_sweep(a: &AnisotropyVector, eps_max: u64, bc: BoundaryCondition) -> Result<Vec<CountResult>> {
    let table = cumulative_dos_table(a, eps_max, bc)?;
    (1..=eps_max)
        .map(|e| {
            let epsilon = e as f64;
            let smooth_part = smooth_count(a, epsilon, bc)?;
            let exact_count = table[e as usize];
            Ok(CountResult { epsilon, exact_count, smooth_part, residual: exact_count as f64 - smooth_part })
        })
        .collect()
}

/// `n` points spaced geometrically from `eps_min` to `eps_max` inclusive.
pub fn geometric_grid(eps_min: f64, eps_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(eps_min > 0.0 && eps_max > eps_min) || n < 2 {
        return invalid("geometric grid needs 0 < eps_min < eps_max and n >= 2");
    }
    let r = (eps_max / eps_min).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| eps_min * (r * i as f64).exp()).collect())
}

/// Fits sup_{ε′≤ε} Δ(ε′) ∼ C ε^γ over ε ≥ 10.
pub fn fit_sup_exponent(samples: &[(f64, f64)]) -> Result<SupFit> {
    fit_sup_exponent_from(samples, DEFAULT_FIT_FLOOR)
}

/// As [`fit_sup_exponent`] with the lower edge of the fit window set by
/// `floor`. The supremum itself runs over all samples; only its strict
/// increases at ε ≥ floor enter the log-log least squares.
pub fn fit_sup_exponent_from(samples: &[(f64, f64)], floor: f64) -> Result<SupFit> {
    if samples.len() < 100 {
        return invalid(format!("need at least 100 samples, got {}", samples.len()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (lo, hi) = (sorted[0].0, sorted[sorted.len() - 1].0);
    if !(lo > 0.0) || hi / lo < 100.0 {
        return invalid("samples must be positive and span at least two decades");
    }
    let mut sup = f64::NEG_INFINITY;
    let mut pts = Vec::new();
    for &(e, r) in &sorted {
        if r > sup {
            sup = r;
            if e >= floor && sup > 0.0 {
                pts.push((e.ln(), sup.ln()));
            }
        }
    }
    if pts.len() < 10 {
        return Err(Error::DegenerateFit { increases: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { increases: pts.len() });
    }
    let slope = sxy / sxx;
    Ok(SupFit {
        exponent_gamma: slope,
        prefactor: (my - slope * mx).exp(),
        sample_range: (floor.max(lo), hi),
        increases: pts.len(),
    })
}

/// Outcome of a Fourier–Bessel count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierCount {
    /// ε at which the series was evaluated.
    pub epsilon_eval: f64,
    pub value: f64,
    /// Gaussian width in units of √ε; zero for the bare series.
    pub sigma: f64,
    /// Frequency radius |l/a| of the truncated sum.
    pub cutoff: f64,
    /// Bound on the discarded terms beyond the cutoff.
    pub tail_estimate: f64,
}

impl FourierCount {
    pub fn rounded(&self) -> u64 {
        self.value.round().max(0.0) as u64
    }
}

/// Volume of the unit ball in d dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Truncated Fourier–Bessel series for the lattice count without smoothing:
/// V_d ε^{d/2}/A plus the Bessel terms with |l/a| ≤ l_max.
///
/// The bare series converges only conditionally; it is exposed for
/// inspection, the smoothed variants are what agree with the exact count.
pub fn count_fourier(a: &AnisotropyVector, epsilon: f64, l_max: u32) -> Result<f64> {
    Ok(fourier_sum(a, epsilon, 0.0, l_max as f64)?.value)
}

/// Fourier–Bessel count of the Gaussian-smoothed ellipsoid indicator.
///
/// Each term is damped by exp(−2π²σ²|k|²), k = l/a; the sum runs to
/// |k| ≤ cutoff and fails when the bound on the discarded tail exceeds `tol`.
pub fn count_fourier_smoothed(
    a: &AnisotropyVector,
    epsilon: f64,
    sigma: f64,
    cutoff: f64,
    tol: f64,
) -> Result<FourierCount> {
    if !(sigma > 0.0) {
        return invalid("smoothing width must be positive");
    }
    let fc = fourier_sum(a, epsilon, sigma, cutoff)?;
    if !(fc.tail_estimate <= tol) {
        return Err(Error::NonConvergence {
            what: "Fourier-Bessel lattice count",
            detail: format!("tail estimate {:.3e} exceeds tolerance {tol:.1e}", fc.tail_estimate),
        });
    }
    Ok(fc)
}

/// Smoothed Fourier–Bessel count with automatic parameters.
///
/// The series is evaluated midway between the shells ⌊ε⌋ and ⌊ε⌋+1 (in √ε),
/// with σ one seventh of the half gap, so that no lattice shell lies within
/// seven widths of the evaluation radius and the smoothed count rounds to
/// the exact one.
pub fn count_fourier_auto(a: &AnisotropyVector, epsilon: f64) -> Result<FourierCount> {
    let e = floor_energy(epsilon)? as f64;
    let r_lo = e.sqrt();
    let r_hi = (e + 1.0).sqrt();
    let r = 0.5 * (r_lo + r_hi);
    let sigma = 0.5 * (r_hi - r_lo) / 7.0;
    // damping exp(-2π²σ²K²) = e^{-32}
    let cutoff = (32.0 / (2.0 * PI * PI)).sqrt() / sigma;
    count_fourier_smoothed(a, r * r, sigma, cutoff, 0.05)
}

/// Largest histogram of squared frequencies kept in memory.
const HIST_LIMIT: u64 = 30_000_000;

fn fourier_sum(a: &AnisotropyVector, epsilon: f64, sigma: f64, cutoff: f64) -> Result<FourierCount> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return invalid("epsilon must be positive");
    }
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return invalid("cutoff must be finite and >= 0");
    }
    let s = a.as_slice();
    let d = s.len();
    let area = a.product();
    let r = epsilon.sqrt();
    let volume = unit_ball_volume(d) * epsilon.powf(d as f64 / 2.0) / area;
    let damp = 2.0 * PI * PI * sigma * sigma;

    // squared frequency |l/a|² = key / lcm with key = Σ l_i² (lcm / a_i²)
    let lcm = s.iter().fold(1u64, |acc, &ai| num_lcm(acc, ai * ai));
    let weights: Vec<u64> = s.iter().map(|&ai| lcm / (ai * ai)).collect();
    let key_max_f = cutoff * cutoff * lcm as f64;
    let points: f64 = s.iter().map(|&ai| cutoff * ai as f64 + 1.0).product();
    if points > 50.0 * DEFAULT_BUDGET as f64 {
        return Err(Error::BudgetExceeded { needed: points, budget: 50 * DEFAULT_BUDGET });
    }

    let nu_power = d as f64 / 2.0;
    let pref = epsilon.powf(d as f64 / 4.0);
    let term =
        |k: f64| -> f64 { pref * bessel_j_half(d as u32, 2.0 * PI * r * k) / k.powf(nu_power) * (-damp * k * k).exp() };

    let mut oscillating = 0.0;
    if key_max_f >= 1.0 {
        if key_max_f <= HIST_LIMIT as f64 {
            let key_max = key_max_f.floor() as u64;
            let mut hist = vec![0u64; key_max as usize + 1];
            orthant_keys(&weights, key_max, 0, 1, &mut hist);
            for (key, &c) in hist.iter().enumerate().skip(1) {
                if c != 0 {
                    let k = (key as f64 / lcm as f64).sqrt();
                    oscillating += c as f64 * term(k);
                }
            }
        } else {
            let inv: Vec<f64> = s.iter().map(|&ai| 1.0 / (ai * ai) as f64).collect();
            orthant_direct(&inv, cutoff * cutoff, 0.0, 1, &mut |k2, mult| {
                if k2 > 0.0 {
                    oscillating += mult as f64 * term(k2.sqrt());
                }
            });
        }
    }
    let value = volume + oscillating / area;

    let tail_estimate = if cutoff == 0.0 || damp == 0.0 {
        f64::INFINITY
    } else {
        // |J_ν(x)| ≤ (2/πx)^{1/2} and a lattice density A in k-space give
        // S_{d−1} ε^{(d−1)/4}/π ∫_K k^{(d−3)/2} e^{−αk²} dk.
        let p = (d as f64 - 3.0) / 2.0;
        let k = cutoff;
        let integral = k.powf(p) * (-damp * k * k).exp() / (2.0 * damp * k - p.max(0.0) / k).max(1e-300);
        unit_sphere_area(d) * epsilon.powf((d as f64 - 1.0) / 4.0) / PI * integral
    };
    Ok(FourierCount { epsilon_eval: epsilon, value, sigma, cutoff, tail_estimate })
}

fn num_lcm(x: u64, y: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    x / gcd(x, y) * y
}

/// Histogram of keys Σ w_i l_i² ≤ key_max over l ∈ ℤ^d, folding signs into
/// multiplicities.
fn orthant_keys(w: &[u64], key_max: u64, acc: u64, mult: u64, hist: &mut [u64]) {
    let (&wi, rest) = w.split_first().expect("non-empty");
    let mut l = 0u64;
    loop {
        let v = acc + wi * l * l;
        if v > key_max {
            break;
        }
        let m = if l == 0 { mult } else { 2 * mult };
        if rest.is_empty() {
            hist[v as usize] += m;
        } else {
            orthant_keys(rest, key_max, v, m, hist);
        }
        l += 1;
    }
}

fn orthant_direct(inv: &[f64], k2_max: f64, acc: f64, mult: u64, f: &mut impl FnMut(f64, u64)) {
    let (&wi, rest) = inv.split_first().expect("non-empty");
    let mut l = 0u64;
    loop {
        let v = acc + wi * (l * l) as f64;
        if v > k2_max {
            break;
        }
        let m = if l == 0 { mult } else { 2 * mult };
        if rest.is_empty() {
            f(v, m);
        } else {
            orthant_direct(rest, k2_max, v, m, f);
        }
        l += 1;
    }
}
