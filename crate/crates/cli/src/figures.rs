//! Data behind the four figures.

use rayon::prelude::*;

use cavity_bec::charge::{asymptotic_partition, partition_with, ThermalSpectrum, EXPONENT_CUTOFF, MAX_BISECTIONS};
use cavity_bec::critical::{
    bulk_condensate_fraction, bulk_tc, classify_regime_with, condensate_fraction, critical_set, finite_tc, t2d,
    RegimeLabel, ROOT_TOLERANCE,
};
use cavity_bec::lattice_count::{fit_sup_exponent_from, residual_sweep, AnisotropyVector, DEFAULT_FIT_FLOOR};
use cavity_bec::spectral::{CavityGeometry, Scenario};

use crate::config::RunConfig;
use crate::output::{fmt_num, Cell, Table};
use crate::CliError;

fn missing(key: &str) -> CliError {
    CliError::Validation(format!("missing value for {key}"))
}

pub(crate) fn cavity(cfg: &RunConfig) -> Result<(CavityGeometry, f64, f64), CliError> {
    let l = cfg.l.ok_or_else(|| missing("L1, L2, L3"))?;
    let g = CavityGeometry::new(l, cfg.bc)?;
    Ok((g, cfg.m.ok_or_else(|| missing("m"))?, cfg.q.ok_or_else(|| missing("Q"))?))
}

fn engine_meta(t: &mut Table) {
    t.meta_num("exponent_cutoff", EXPONENT_CUTOFF);
    t.meta("bisection_cap", MAX_BISECTIONS.to_string());
    t.meta_num("root_tolerance", ROOT_TOLERANCE);
}

pub(crate) fn fig1(cfg: &RunConfig) -> Result<Table, CliError> {
    let a = cfg.a.as_deref().ok_or_else(|| missing("a"))?;
    let av = AnisotropyVector::cavity(a[0], a[1])?;
    let sweep = residual_sweep(&av, cfg.epsilon_max, cfg.bc)?;
    // below the largest a_i² the stiff direction has no excited level yet
    let a2 = a.iter().map(|&x| (x * x) as f64).fold(0.0, f64::max);
    let floor = cfg.fit_floor.unwrap_or(DEFAULT_FIT_FLOOR.max(a2));
    // the supremum runs from ε = 1, the fit only above the floor
    let samples: Vec<(f64, f64)> = sweep.iter().map(|r| (r.epsilon, r.residual.abs())).collect();
    let fit = fit_sup_exponent_from(&samples, floor);

    let mut t = Table::new(&["epsilon", "N", "smooth", "delta", "running_sup", "fit"]);
    t.meta_num("fit_floor", floor);
    match &fit {
        Ok(f) => {
            t.meta_num("gamma", f.exponent_gamma);
            t.meta_num("prefactor", f.prefactor);
            t.meta("fit_increases", f.increases.to_string());
            t.meta("summary", format!("gamma = {}", fmt_num(f.exponent_gamma)));
        }
        Err(e) => {
            t.meta("gamma", format!("unavailable: {e}"));
            t.meta("summary", format!("gamma unavailable: {e}"));
        }
    }
    let mut sup = 0.0f64;
    for r in &sweep {
        sup = sup.max(r.residual.abs());
        let f = fit.as_ref().ok().filter(|_| r.epsilon >= floor).map(|f| f.eval(r.epsilon));
        t.push(vec![
            r.epsilon.into(),
            Cell::Text(r.exact_count.to_string()),
            r.smooth_part.into(),
            r.residual.into(),
            sup.into(),
            f.into(),
        ]);
    }
    Ok(t)
}

pub(crate) fn fig2(cfg: &RunConfig) -> Result<Table, CliError> {
    let (g, m, q) = cavity(cfg)?;
    let tc0 = bulk_tc(q, &g, m)?;
    let tc = finite_tc(q, &g, m)?;
    let tmin = cfg.sweep.tmin.unwrap_or(0.02 * tc0);
    let tmax = cfg.sweep.tmax.unwrap_or(1.2 * tc0);
    let temps = cfg.sweep.temperatures(tmin, tmax);
    let engine = cfg.engine;
    let rows = temps
        .par_iter()
        .map(|&t| -> Result<Vec<Cell>, CliError> {
            let bulk = bulk_condensate_fraction(t, q, &g, m)?;
            let mut row = vec![t.into(), (t / tc0).into(), bulk.into()];
            if engine.asymptotic() {
                row.push(condensate_fraction(t, q, &g, m)?.value.into());
            }
            if engine.exact() {
                let spec = ThermalSpectrum::new(&g, m, t)?;
                row.push(partition_with(&spec, t, q, &g, m)?.fractions()[0].into());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cols = vec!["T", "T/Tc0", "bulk"];
    if engine.asymptotic() {
        cols.push("corrected");
    }
    if engine.exact() {
        cols.push("exact");
    }
    let mut table = Table::new(&cols);
    table.meta_num("T_c0", tc0);
    table.meta_num("T_c", tc.tc);
    table.meta_num("T_c_residual", tc.residual);
    table.meta_num("T_c_perturbative_ratio", tc.ratio_perturbative);
    table.meta_num("tmin_used", tmin);
    table.meta_num("tmax_used", tmax);
    if engine.exact() {
        engine_meta(&mut table);
    }
    table.meta("summary", format!("T_c0 = {}, T_c = {}", fmt_num(tc0), fmt_num(tc.tc)));
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub(crate) fn fig3(cfg: &RunConfig) -> Result<Table, CliError> {
    let l1 = cfg.l1.ok_or_else(|| missing("L1"))?;
    let m = cfg.m.ok_or_else(|| missing("m"))?;
    let q_tilde = cfg.q_tilde.ok_or_else(|| missing("q-tilde"))?;
    let n = cfg.sweep.points;
    let axis: Vec<f64> = (0..n).map(|i| 10f64.powf(cfg.decades * i as f64 / (n - 1) as f64)).collect();
    let grid: Vec<(f64, f64)> = axis.iter().flat_map(|&r21| axis.iter().map(move |&r32| (r21, r32))).collect();
    let (bc, dominance) = (cfg.bc, cfg.dominance);
    let rows = grid
        .par_iter()
        .map(|&(r21, r32)| -> Result<(RegimeLabel, Vec<Cell>), CliError> {
            let l2 = l1 * r21;
            let l3 = l2 * r32;
            let q = q_tilde * m * l2 / std::f64::consts::PI;
            let g = CavityGeometry::new([l1, l2, l3], bc)?;
            let r = classify_regime_with(q, &g, m, dominance)?;
            let row = vec![
                r21.into(),
                r32.into(),
                l2.into(),
                l3.into(),
                q.into(),
                r.label.as_str().into(),
                r.condition_a.into(),
                r.condition_b.into(),
                r.condition_c.into(),
                r.eta_max.into(),
                r.t3d.into(),
            ];
            Ok((r.label, row))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(&[
        "L2/L1", "L3/L2", "L2", "L3", "Q", "label", "margin_A", "margin_B", "margin_C", "eta_max", "T_3D",
    ]);
    t.meta("grid", format!("{n} x {n}, log-spaced over {} decades per axis", fmt_num(cfg.decades)));
    let labels = [
        RegimeLabel::OneStep,
        RegimeLabel::TwoStep1D,
        RegimeLabel::TwoStep2D,
        RegimeLabel::ThreeStep,
        RegimeLabel::Frozen,
    ];
    let counts: Vec<String> =
        labels.iter().map(|l| format!("{l} {}", rows.iter().filter(|(x, _)| x == l).count())).collect();
    t.meta("label_counts", counts.join(", "));
    t.meta("summary", format!("regimes: {}", counts.join(", ")));
    rows.into_iter().for_each(|(_, r)| t.push(r));
    Ok(t)
}

pub(crate) fn fig4(cfg: &RunConfig) -> Result<Table, CliError> {
    let (g, m, q) = cavity(cfg)?;
    let scenario = Scenario::detect(&g);
    if cfg.engine.asymptotic() && scenario == Scenario::Isotropic {
        return Err(CliError::Validation(
            "an isotropic cavity has no asymptotic class split; use --engine exact".into(),
        ));
    }
    let cs = critical_set(q, &g, m)?;
    let tmin = cfg.sweep.tmin.unwrap_or(0.02 * cs.t3d);
    let tmax = cfg.sweep.tmax.unwrap_or(1.5 * cs.t3d);
    let temps = cfg.sweep.temperatures(tmin, tmax);
    let engine = cfg.engine;
    let rows = temps
        .par_iter()
        .map(|&t| -> Result<Vec<Cell>, CliError> {
            let mut row = vec![t.into()];
            if engine.exact() {
                let spec = ThermalSpectrum::new(&g, m, t)?;
                let p = partition_with(&spec, t, q, &g, m)?;
                row.push(p.mu_solved.into());
                row.extend(p.fractions().map(Cell::from));
            }
            if engine.asymptotic() {
                let p = asymptotic_partition(t, q, &g, m, scenario)?;
                row.extend(p.fractions().map(Cell::from));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cols = vec!["T"];
    if engine.exact() {
        cols.extend(["mu", "Q0/Q", "Q1/Q", "Q2/Q", "Q3/Q"]);
    }
    if engine.asymptotic() {
        cols.extend(["asym_Q0/Q", "asym_Q1/Q", "asym_Q2/Q", "asym_Q3/Q"]);
    }
    let mut t = Table::new(&cols);
    t.meta("scenario", scenario.as_str());
    t.meta_num("T_c_bulk", cs.tc_bulk);
    t.meta_num("T_c_finite", cs.tc_finite);
    t.meta_num("T_3D", cs.t3d);
    if let Some(t2) = cs.t2d {
        t.meta_num("T_2D", t2);
        if let Ok(r) = t2d(q, &g, m, scenario) {
            t.meta_num("T_2D_closed_form", r.closed_form);
            t.meta("T_2D_saturation", r.saturation.map_or("unavailable".into(), fmt_num));
        }
    }
    if let Some(t1) = cs.t1d {
        t.meta_num("T_1D", t1);
    }
    t.meta_num("tmin_used", tmin);
    t.meta_num("tmax_used", tmax);
    if engine.exact() {
        engine_meta(&mut t);
    }
    t.meta("summary", format!("scenario {}, T_3D = {}", scenario.as_str(), fmt_num(cs.t3d)));
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}
