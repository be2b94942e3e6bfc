//! Single-point reports: critical temperatures, lattice counts and regime
//! classification.

use cavity_bec::critical::{classify_regime_with, critical_set, finite_tc};
use cavity_bec::lattice_count::{count_bruteforce, count_fourier_auto, unit_ball_volume, AnisotropyVector};

use crate::config::RunConfig;
use crate::figures::cavity;
use crate::output::{fmt_num, Cell, Table};
use crate::CliError;

fn report() -> Table {
    Table::new(&["quantity", "value"])
}

fn row(t: &mut Table, name: &str, v: impl Into<Cell>) {
    t.push(vec![name.into(), v.into()]);
}

pub(crate) fn tc(cfg: &RunConfig) -> Result<Table, CliError> {
    let (g, m, q) = cavity(cfg)?;
    let f = finite_tc(q, &g, m)?;
    let cs = critical_set(q, &g, m)?;
    let mut t = report();
    row(&mut t, "T_c", f.tc);
    row(&mut t, "residual", f.residual);
    row(&mut t, "T_c_bulk", f.tc_bulk);
    row(&mut t, "perturbative_ratio", f.ratio_perturbative);
    row(&mut t, "scenario", cs.scenario.as_str());
    row(&mut t, "T_3D", cs.t3d);
    row(&mut t, "T_2D", cs.t2d);
    row(&mut t, "T_1D", cs.t1d);
    row(&mut t, "ordered", if cs.ordered() { "yes" } else { "no" });
    t.meta("summary", format!("T_c = {} (residual {})", fmt_num(f.tc), fmt_num(f.residual)));
    Ok(t)
}

pub(crate) fn count(cfg: &RunConfig) -> Result<Table, CliError> {
    let a = cfg.a.clone().ok_or_else(|| CliError::Validation("missing value for a".into()))?;
    let eps = cfg.epsilon.ok_or_else(|| CliError::Validation("missing value for epsilon".into()))?;
    let av = AnisotropyVector::new(a)?;
    let exact = count_bruteforce(&av, eps)?;
    let d = av.dim();
    let weyl = unit_ball_volume(d) * eps.powf(d as f64 / 2.0) / av.product();
    let mut t = report();
    row(&mut t, "dimension", d.to_string());
    row(&mut t, "count", exact.to_string());
    row(&mut t, "volume_term", weyl);
    row(&mut t, "residual", exact as f64 - weyl);
    match count_fourier_auto(&av, eps) {
        Ok(f) => {
            row(&mut t, "fourier", f.value);
            row(&mut t, "fourier_tail_bound", f.tail_estimate);
        }
        Err(e) => row(&mut t, "fourier", format!("unavailable: {e}")),
    }
    t.meta("summary", format!("N = {exact}"));
    Ok(t)
}

pub(crate) fn classify(cfg: &RunConfig) -> Result<Table, CliError> {
    let (g, m, q) = cavity(cfg)?;
    let r = classify_regime_with(q, &g, m, cfg.dominance)?;
    let mut t = report();
    row(&mut t, "label", r.label.as_str());
    row(&mut t, "L3/L2", r.l3_over_l2);
    row(&mut t, "L3/L1", r.l3_over_l1);
    row(&mut t, "Q_tilde", r.q_tilde);
    row(&mut t, "margin_A", r.condition_a);
    row(&mut t, "margin_B", r.condition_b);
    row(&mut t, "margin_C", r.condition_c);
    row(&mut t, "dominance", r.dominance);
    row(&mut t, "eta_max", r.eta_max);
    row(&mut t, "T_3D", r.t3d);
    t.meta("summary", format!("regime {}", r.label));
    Ok(t)
}
