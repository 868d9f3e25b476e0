//! The estimation commands. Each returns its table and a JSON summary; the
//! caller prints, appends and logs them.

use serde_json::{json, Value};
use voronoi_rsw::mc::{run_trials, sub_seed};
use voronoi_rsw::rsw::{alpha_hat, arm_decay_fit, good_scale_scan, phi_curve, quasi_independence_probe};

use crate::config::RunConfig;
use crate::error::{usage, Result};
use crate::output::{fmt_f64, Table, ESTIMATE_HEADER};

pub struct Output {
    pub table: Table,
    pub results: Value,
}

/// One event estimated under the configured plan. The row's seed is the
/// master seed.
pub fn cmd_estimate(config: &RunConfig) -> Result<Output> {
    let spec = config.event_spec()?;
    let plan = config.plan()?;
    let e = run_trials(&spec, &plan, config.seed())?;
    let mut table = Table::new(&ESTIMATE_HEADER);
    table.push_estimate(&e);
    Ok(Output {
        table,
        results: json!([e]),
    })
}

/// The configured event over every combination of `p_list`, `s_list` and
/// `rho_list` (each defaulting to the single configured value). Each row
/// carries its own derived seed, so `estimate` with the row's parameters
/// and seed reproduces it.
pub fn cmd_sweep(config: &RunConfig) -> Result<Output> {
    if config.p_list.is_none() && config.s_list.is_none() && config.rho_list.is_none() {
        return Err(usage("sweep needs at least one of --p-list, --s-list, --rho-list"));
    }
    let single = |v: Option<f64>| v.map(|x| vec![Some(x)]).unwrap_or_else(|| vec![None]);
    let lift = |l: &Option<Vec<f64>>, v: Option<f64>| match l {
        Some(l) if l.is_empty() => Err(usage("sweep lists must not be empty")),
        Some(l) => Ok(l.iter().map(|&x| Some(x)).collect()),
        None => Ok(single(v)),
    };
    let ps = lift(&config.p_list, config.p)?;
    let ss = lift(&config.s_list, config.s)?;
    let rhos = lift(&config.rho_list, config.rho)?;
    let plan = config.plan()?;

    // Validate every grid point before sampling any of them.
    let mut specs = Vec::new();
    for &s in &ss {
        for &rho in &rhos {
            for &p in &ps {
                let point = RunConfig {
                    p,
                    s,
                    rho,
                    ..config.clone()
                };
                specs.push(point.event_spec()?);
            }
        }
    }
    let mut table = Table::new(&ESTIMATE_HEADER);
    let mut results = Vec::new();
    for spec in specs {
        let seed = sub_seed(config.seed(), &format!("sweep/{};p={}", spec.label(), spec.p));
        let e = run_trials(&spec, &plan, seed)?;
        table.push_estimate(&e);
        results.push(e);
    }
    Ok(Output {
        table,
        results: json!(results),
    })
}

pub const PHI_HEADER: [&str; 13] = [
    "s", "alpha", "low", "high", "phi", "std_error", "ci_lo", "ci_hi", "n", "p", "intensity", "seed", "aborts",
];

/// `φ̂_s(α)` on `--grid`, all points on shared configurations.
pub fn cmd_phi(config: &RunConfig) -> Result<Output> {
    let s = config.require_s()?;
    let grid = config.grid.as_deref().unwrap_or_default();
    if grid.is_empty() {
        return Err(usage("phi needs a non-empty --grid of alpha values"));
    }
    let model = config.model()?;
    let curve = phi_curve(s, grid, model, &config.fixed_plan()?, config.seed())?;
    let mut table = Table::new(&PHI_HEADER);
    for pt in &curve.points {
        table.push(vec![
            fmt_f64(s),
            fmt_f64(pt.alpha),
            fmt_f64(pt.low),
            fmt_f64(pt.high),
            fmt_f64(pt.phi),
            fmt_f64(pt.std_error),
            fmt_f64(pt.ci.0),
            fmt_f64(pt.ci.1),
            pt.n.to_string(),
            fmt_f64(model.p),
            fmt_f64(model.intensity),
            curve.master_seed.to_string(),
            curve.aborted.to_string(),
        ]);
    }
    Ok(Output {
        table,
        results: json!(curve),
    })
}

pub const ALPHA_HEADER: [&str; 12] = [
    "s",
    "c0",
    "alpha_hat",
    "bracket_lo",
    "bracket_hi",
    "clipped",
    "inconclusive",
    "n",
    "p",
    "intensity",
    "seed",
    "aborts",
];

/// `α̂_s` for `--s` or for every scale of `--s-list`.
pub fn cmd_alpha(config: &RunConfig) -> Result<Output> {
    let scales = match (&config.s_list, config.s) {
        (Some(l), _) if !l.is_empty() => l.clone(),
        (_, Some(s)) => vec![s],
        _ => return Err(usage("alpha needs --s or a non-empty --s-list")),
    };
    let model = config.model()?;
    let c0 = config.c0()?;
    let plan = config.fixed_plan()?;
    let mut table = Table::new(&ALPHA_HEADER);
    let mut results = Vec::new();
    for s in scales {
        let seed = if config.s_list.is_some() {
            sub_seed(config.seed(), &format!("alpha/{s}"))
        } else {
            config.seed()
        };
        let a = alpha_hat(s, c0, model, &plan, seed)?;
        table.push(vec![
            fmt_f64(s),
            fmt_f64(c0),
            fmt_f64(a.value),
            fmt_f64(a.bracket.0),
            fmt_f64(a.bracket.1),
            a.clipped.to_string(),
            a.inconclusive.to_string(),
            a.n.to_string(),
            fmt_f64(model.p),
            fmt_f64(model.intensity),
            seed.to_string(),
            a.aborted.to_string(),
        ]);
        results.push(a);
    }
    Ok(Output {
        table,
        results: json!(results),
    })
}

pub const SCAN_HEADER: [&str; 17] = [
    "s",
    "alpha_s",
    "alpha_s_inconclusive",
    "alpha_2s3",
    "alpha_2s3_inconclusive",
    "good",
    "circuit_n",
    "circuit_p_hat",
    "circuit_ci_lo",
    "circuit_ci_hi",
    "x_n",
    "x_p_hat",
    "x_ci_lo",
    "x_ci_hi",
    "c0",
    "p",
    "seed",
];

/// The good-scale scan over `--s-list`. Each row echoes both `α̂` values
/// its flag was computed from.
pub fn cmd_scan(config: &RunConfig) -> Result<Output> {
    let scales = config
        .s_list
        .clone()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| usage("scan needs a non-empty --s-list"))?;
    let model = config.model()?;
    let c0 = config.c0()?;
    let report = good_scale_scan(&scales, c0, model, &config.plan()?, config.seed())?;
    let mut table = Table::new(&SCAN_HEADER);
    for r in &report.rows {
        table.push(vec![
            fmt_f64(r.s),
            fmt_f64(r.alpha.value),
            r.alpha.inconclusive.to_string(),
            fmt_f64(r.alpha_two_thirds.value),
            r.alpha_two_thirds.inconclusive.to_string(),
            r.good.to_string(),
            r.circuit.n.to_string(),
            fmt_f64(r.circuit.p_hat),
            fmt_f64(r.circuit.ci.0),
            fmt_f64(r.circuit.ci.1),
            r.x_event.n.to_string(),
            fmt_f64(r.x_event.p_hat),
            fmt_f64(r.x_event.ci.0),
            fmt_f64(r.x_event.ci.1),
            fmt_f64(c0),
            fmt_f64(model.p),
            config.seed().to_string(),
        ]);
    }
    Ok(Output {
        table,
        results: json!(report),
    })
}

/// `π̂₁(s0, t)` for every `t` of `--t-list`, then a summary row with the
/// fitted exponent in the `p_hat` column.
pub fn cmd_arm(config: &RunConfig) -> Result<Output> {
    let t_list = config
        .t_list
        .clone()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| usage("arm needs a non-empty --t-list"))?;
    let s0 = config.s0.unwrap_or(1.0);
    let model = config.model()?;
    let fit = arm_decay_fit(s0, &t_list, model, &config.fixed_plan()?, config.seed())?;
    let mut table = Table::new(&ESTIMATE_HEADER);
    for e in &fit.estimates {
        table.push_estimate(e);
    }
    let ts: Vec<String> = t_list.iter().map(|t| t.to_string()).collect();
    let n = fit.estimates.first().map_or(0, |e| e.n);
    let aborted = fit.estimates.first().map_or(0, |e| e.aborted);
    table.push(vec![
        "arm_fit".into(),
        format!("s0={s0};t={};eta", ts.join("|")),
        fmt_f64(model.p),
        fmt_f64(model.intensity),
        n.to_string(),
        String::new(),
        fit.eta.map(fmt_f64).unwrap_or_default(),
        String::new(),
        String::new(),
        config.seed().to_string(),
        aborted.to_string(),
    ]);
    Ok(Output {
        table,
        results: json!(fit),
    })
}

pub const QI_HEADER: [&str; 13] = [
    "s", "event_b", "p_a", "p_b", "p_ab", "gap", "sigma", "probe", "p", "intensity", "n", "seed", "aborts",
];

/// The quasi-independence probe at `--s` or every scale of `--s-list`.
pub fn cmd_qi(config: &RunConfig) -> Result<Output> {
    let scales = match (&config.s_list, config.s) {
        (Some(l), _) if !l.is_empty() => l.clone(),
        (_, Some(s)) => vec![s],
        _ => return Err(usage("qi needs --s or a non-empty --s-list")),
    };
    let model = config.model()?;
    let plan = config.fixed_plan()?;
    let mut table = Table::new(&QI_HEADER);
    let mut results = Vec::new();
    for s in scales {
        let seed = sub_seed(config.seed(), &format!("qi/{s}"));
        let r = quasi_independence_probe(s, model, &plan, seed)?;
        for pair in &r.pairs {
            table.push(vec![
                fmt_f64(s),
                pair.event_b.clone(),
                fmt_f64(pair.p_a),
                fmt_f64(pair.p_b),
                fmt_f64(pair.p_ab),
                fmt_f64(pair.gap),
                fmt_f64(pair.sigma),
                fmt_f64(r.probe),
                fmt_f64(model.p),
                fmt_f64(model.intensity),
                r.n.to_string(),
                seed.to_string(),
                r.aborted.to_string(),
            ]);
        }
        results.push(json!({ "s": s, "seed": seed, "report": r }));
    }
    Ok(Output {
        table,
        results: json!(results),
    })
}
