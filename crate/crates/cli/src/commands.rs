//! The five subcommands. Each returns its exit code; errors are classified by the caller.

use std::path::Path;

use anyhow::Context;
use warpcmc::cmc::{amplitude_cap, find_cmc_with, random_perturbations, umbilicity_verdict, CmcOptions};
use warpcmc::flow::{
    area_floor_check, monotonicity_audit, run_flow_observed, swept_weighted_volumes, AreaFloorReport, FlowControls,
    TOL_SWEPT, TOL_RICCATI, TOL_STEP_MONOTONE,
};
use warpcmc::identities::{hk_check, minkowski_check, minkowski_weighted_check, IdentityReport};
use warpcmc::sphere::GridMode;
use warpcmc::surface::Mode;
use warpcmc::{check_conditions, scan_h3_extrema, ConditionSet, GeomError, ModelRegistry, Variant};

use crate::config::{RunConfig, VariantArg};
use crate::output::{Cell, Emitter, Table};
use crate::{EXIT_AUDIT, EXIT_HYPOTHESIS, EXIT_OK};

/// Default output step of the flow.
const DEFAULT_FLOW_DT: f64 = 0.01;

fn yes_no(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn modes_label(modes: &[Mode]) -> String {
    modes.iter().map(|(l, m, a)| format!("{l}:{m}:{a}")).collect::<Vec<_>>().join(";")
}

pub fn models(cfg: &RunConfig, out: &Path) -> anyhow::Result<u8> {
    let registry = ModelRegistry::with_builtins();
    let mut t = Table::new("models", &["family", "variant", "summary"]);
    for f in registry.families() {
        let variant = match f.variant() {
            Variant::Boundary => "boundary",
            Variant::Ball => "ball",
        };
        println!("{:<24} {:<9} {}", f.name(), variant, f.summary());
        t.push(vec![f.name().into(), variant.into(), f.summary().into()]);
    }
    Emitter::new(out, cfg.format, "models", "built-in registry", "none")?.write(&t)?;
    Ok(EXIT_OK)
}

pub fn check(cfg: &RunConfig, out: &Path) -> anyhow::Result<u8> {
    let registry = ModelRegistry::with_builtins();
    let w = cfg.build_model(&registry)?;
    let n = cfg.model.n;
    let variant = cfg.variant.unwrap_or(match w.variant() {
        Variant::Boundary => VariantArg::Boundary,
        Variant::Ball => VariantArg::Ball,
    });
    let set = match variant {
        VariantArg::Boundary => ConditionSet::H,
        VariantArg::Ball => ConditionSet::Hprime,
    };
    let report = check_conditions(&w, n, set, cfg.grid.check_size)?;
    let extrema = scan_h3_extrema(&w, n, cfg.grid.extrema_size)?;
    let resolution = format!("radial chebyshev {} / extrema scan {}", cfg.grid.check_size, cfg.grid.extrema_size);
    let em = Emitter::new(out, cfg.format, "check", &cfg.model.describe(), &resolution)?;

    let mut conds = Table::new(
        "conditions",
        &["condition", "min_margin", "worst_radius", "verdict", "strict", "degenerate", "required"],
    );
    for e in &report.entries {
        conds.push(vec![
            e.label.into(),
            e.min_margin.into(),
            e.worst_radius.into(),
            e.verdict.into(),
            e.strict.into(),
            e.degenerate.into(),
            e.required.into(),
        ]);
    }
    em.write(&conds)?;

    let labels: Vec<&'static str> = report.entries.iter().skip(1).map(|e| e.label).collect();
    let mut cols = vec!["r"];
    cols.extend(&labels);
    let mut margins = Table::new("margins", &cols);
    for (i, &r) in report.grid.iter().enumerate() {
        let mut row = vec![Cell::Num(r)];
        row.extend(report.entries.iter().skip(1).map(|e| Cell::Num(e.margins.get(i).copied().unwrap_or(f64::NAN))));
        margins.push(row);
    }
    em.write(&margins)?;

    let mut ext = Table::new("extrema", &["radius", "kind", "ricci_distinct"]);
    for e in &extrema {
        let kind = match e.kind {
            warpcmc::conditions::ExtremumType::Min => "min",
            warpcmc::conditions::ExtremumType::Max => "max",
        };
        ext.push(vec![e.radius.into(), kind.into(), e.ricci_distinct.into()]);
    }
    em.write(&ext)?;

    if let Some(profile) = registry.omega_profile(&cfg.model)? {
        let mut om = Table::new("omega_margins", &["r", "s", "h3", "dh3", "h4"]);
        for &r in &report.grid {
            let s = w.eval(r)?.h;
            let (a, b, c) = profile.omega_form_margins(s);
            om.push(vec![r.into(), s.into(), a.into(), b.into(), c.into()]);
        }
        em.write(&om)?;
    }

    println!("{}", em.header());
    for e in &report.entries {
        let tag = match (e.degenerate, e.required) {
            (true, _) => " (degenerate)",
            (false, false) => " (optional)",
            _ => "",
        };
        println!("{:<4} {} min margin {:+.6e} at r = {:.6}{tag}", e.label, yes_no(e.verdict), e.min_margin, e.worst_radius);
    }
    if let Some(note) = report.rigidity_note() {
        println!("note: {} {note}", report.entry(warpcmc::Condition::H4).label);
    }
    if report.degraded_accuracy {
        println!("note: tabulated profile, accuracy degraded");
    }
    if let Some(t) = report.truncated_at {
        println!("note: domain truncated at r = {t}");
    }
    println!("scalar-curvature extrema: {}", extrema.len());
    Ok(if report.required_pass() { EXIT_OK } else { EXIT_HYPOTHESIS })
}

fn identity_row(r: &IdentityReport) -> Vec<Cell> {
    vec![
        r.name.clone().into(),
        r.lhs.into(),
        r.rhs.into(),
        r.residual.into(),
        r.relative_residual.into(),
        r.tolerance_used.into(),
        r.verdict.label().into(),
    ]
}

const IDENTITY_COLUMNS: [&str; 7] = ["identity", "lhs", "rhs", "residual", "relative_residual", "tolerance", "verdict"];

pub fn verify(cfg: &RunConfig, out: &Path) -> anyhow::Result<u8> {
    let registry = ModelRegistry::with_builtins();
    let w = cfg.build_model(&registry)?;
    let grid = cfg.build_grid()?;
    let surface = cfg.build_surface(&w, grid.clone(), &cfg.surface.perturb)?;
    let geometry = surface.geometry()?;

    let mut reports = vec![minkowski_check(&surface)?];
    match minkowski_weighted_check(&surface) {
        Ok(r) => reports.push(r),
        Err(e @ (GeomError::NotApplicable(_) | GeomError::Hypothesis(_))) => {
            println!("weighted Minkowski skipped: {e}");
        }
        Err(e) => return Err(e.into()),
    }
    reports.push(hk_check(&surface)?);

    let em = Emitter::new(out, cfg.format, "verify", &cfg.model.describe(), &grid.resolution_label())?;
    let mut t = Table::new("identities", &IDENTITY_COLUMNS);
    for r in &reports {
        t.push(identity_row(r));
    }
    em.write(&t)?;
    let mut snap = Table::new("surface", &["colatitude", "longitude", "rho", "H", "deficit"]);
    for row in surface.snapshot(&geometry) {
        snap.push(row.iter().map(|&v| Cell::Num(v)).collect());
    }
    em.write(&snap)?;

    println!("{}", em.header());
    for r in &reports {
        println!("{:<20} {:<21} lhs {:.12e} rhs {:.12e} rel {:+.3e}", r.name, r.verdict.label(), r.lhs, r.rhs, r.relative_residual);
    }
    Ok(if reports.iter().all(|r| r.verdict.holds()) { EXIT_OK } else { EXIT_AUDIT })
}

pub fn flow(cfg: &RunConfig, out: &Path) -> anyhow::Result<u8> {
    let registry = ModelRegistry::with_builtins();
    let w = cfg.build_model(&registry)?;
    let grid = cfg.build_grid()?;
    let surface = cfg.build_surface(&w, grid.clone(), &cfg.surface.perturb)?;
    let controls = FlowControls {
        dt: cfg.flow.dt.unwrap_or(DEFAULT_FLOW_DT),
        t_end: cfg.flow.t_end,
        epsilon_cut: cfg.flow.epsilon_cut,
        stride: cfg.flow.stride,
    };
    let boundary = w.variant() == Variant::Boundary;
    let mut floors: Vec<AreaFloorReport> = Vec::new();
    let mut floor_err = None;
    let run = run_flow_observed(&surface, &controls, |s| {
        if boundary && floor_err.is_none() {
            match area_floor_check(s) {
                Ok(r) => floors.push(r),
                Err(e) => floor_err = Some(e),
            }
        }
    })?;
    if let Some(e) = floor_err {
        return Err(e.into());
    }
    let trace = &run.trace;
    let swept = swept_weighted_volumes(trace);
    let audit = monotonicity_audit(trace, &swept);

    let em = Emitter::new(out, cfg.format, "flow", &cfg.model.describe(), &grid.resolution_label())?;
    let mut t = Table::new(
        "flow_trace",
        &["t", "Q", "area", "min_alignment", "swept_weighted_volume", "active_count", "f2_integral", "riccati_excess"],
    );
    for i in 0..trace.len() {
        t.push(vec![
            trace.times[i].into(),
            trace.q_values[i].into(),
            trace.areas[i].into(),
            trace.min_alignment[i].into(),
            swept[i].into(),
            trace.active_count[i].into(),
            trace.f2_integrals[i].into(),
            trace.riccati_excess[i].into(),
        ]);
    }
    em.write(&t)?;

    let mut a = Table::new("flow_audit", &["quantity", "value", "tolerance", "holds"]);
    a.push(vec!["q_step_increase".into(), audit.q_step_increase.into(), TOL_STEP_MONOTONE.into(), audit.q_monotone.into()]);
    a.push(vec!["swept_slack".into(), audit.swept_slack.into(), (-TOL_SWEPT).into(), audit.swept_holds.into()]);
    a.push(vec!["riccati_excess".into(), audit.riccati_excess.into(), TOL_RICCATI.into(), audit.riccati_holds.into()]);
    a.push(vec![
        "area_step_increase".into(),
        audit.area_step_increase.into(),
        TOL_STEP_MONOTONE.into(),
        audit.area_monotone.into(),
    ]);
    let mut floors_hold = true;
    if !floors.is_empty() {
        let worst = |pick: fn(&AreaFloorReport) -> &IdentityReport| {
            floors.iter().map(|f| pick(f)).min_by(|x, y| margin(x).total_cmp(&margin(y))).cloned()
        };
        for (name, rep) in [
            ("area_floor", worst(|f| &f.area_floor)),
            ("weighted_minkowski", worst(|f| &f.weighted_minkowski)),
            ("q_floor", worst(|f| &f.q_floor)),
        ] {
            let rep = rep.expect("non-empty");
            floors_hold &= rep.verdict.holds();
            a.push(vec![format!("{name}_worst_margin").into(), margin(&rep).into(), (-rep.tolerance_used).into(), rep.verdict.holds().into()]);
        }
    }
    if let Some(dev) = run.last.slice_deviation() {
        a.push(vec!["slice_deviation".into(), dev.into(), Cell::Num(f64::NAN), true.into()]);
    }
    a.push(vec!["speed_drift".into(), run.last.speed_drift.into(), Cell::Num(f64::NAN), true.into()]);
    a.push(vec!["exhausted".into(), Cell::Num(if run.exhausted { 1.0 } else { 0.0 }), Cell::Num(f64::NAN), true.into()]);
    em.write(&a)?;

    let mut fin = Table::new("flow_final", &["node", "r", "x", "y", "z", "H", "f_over_H", "active"]);
    let fh = run.last.f_over_h();
    for (k, p) in run.last.points().iter().enumerate() {
        let d = match grid.mode() {
            GridMode::Full => p.direction,
            GridMode::Axisymmetric => [p.direction[0].sin(), 0.0, p.direction[0].cos()],
        };
        fin.push(vec![
            k.into(),
            p.r.into(),
            d[0].into(),
            d[1].into(),
            d[2].into(),
            run.last.report.mean_curvature[k].into(),
            fh[k].into(),
            run.last.active[k].into(),
        ]);
    }
    em.write(&fin)?;

    println!("{}", em.header());
    println!(
        "t = {} Q: {:.10e} -> {:.10e}  area: {:.10e} -> {:.10e}  active {}/{}{}",
        run.last.t,
        trace.q_values[0],
        run.last.q_value,
        trace.areas[0],
        run.last.area,
        run.last.active_count(),
        grid.len(),
        if run.exhausted { " (exhausted)" } else { "" }
    );
    println!("Q monotone          {} ({:+.3e})", yes_no(audit.q_monotone), audit.q_step_increase);
    println!("swept-volume bound  {} ({:+.3e})", yes_no(audit.swept_holds), audit.swept_slack);
    println!("Riccati inequality  {} ({:+.3e})", yes_no(audit.riccati_holds), audit.riccati_excess);
    println!("area monotone       {} ({:+.3e})", yes_no(audit.area_monotone), audit.area_step_increase);
    if !floors.is_empty() {
        println!("area/Q floors       {}", yes_no(floors_hold));
    }
    Ok(if audit.all_hold() && floors_hold { EXIT_OK } else { EXIT_AUDIT })
}

/// Signed slack in the direction of the inequality.
fn margin(r: &IdentityReport) -> f64 {
    match r.expectation {
        warpcmc::identities::Expectation::AtMost => -r.residual,
        _ => r.residual,
    }
}

pub fn cmc(cfg: &RunConfig, out: &Path) -> anyhow::Result<u8> {
    let registry = ModelRegistry::with_builtins();
    let w = cfg.build_model(&registry)?;
    let grid = cfg.build_grid()?;
    let n = cfg.model.n;
    let r0 = cfg.base_radius(&w)?;
    let runs: Vec<Vec<Mode>> = if cfg.cmc.corpus.runs > 0 {
        random_perturbations(&cfg.cmc.corpus, grid.mode())
    } else {
        vec![cfg.surface.perturb.clone()]
    };
    let cap = amplitude_cap(r0);
    for modes in &runs {
        let total: f64 = modes.iter().map(|m| m.2.abs()).sum();
        if total > cap {
            return Err(GeomError::Parameter { family: "cmc".into(), bound: format!("total amplitude {total} <= {cap}") }.into());
        }
    }
    let opts = CmcOptions { cmc_tol: cfg.cmc.cmc_tol, max_iter: cfg.cmc.max_iter, dt_factor: cfg.cmc.dt_factor };

    let mut t = Table::new(
        "cmc_results",
        &[
            "run",
            "modes",
            "converged",
            "iterations",
            "mean_H",
            "cmc_residual",
            "umbilicity_deficit",
            "is_slice",
            "slice_spread",
            "mean_radius",
            "h4_margin",
            "ricci_gap",
            "alarm",
            "reason",
        ],
    );
    let (mut converged, mut alarms) = (0usize, 0usize);
    for (i, modes) in runs.iter().enumerate() {
        let start = cfg.build_surface(&w, grid.clone(), modes).with_context(|| format!("run {i}"))?;
        let res = find_cmc_with(&start, &opts)?;
        let verdict = if res.converged { Some(umbilicity_verdict(&res, &w, n)?) } else { None };
        converged += usize::from(res.converged);
        let alarm = verdict.as_ref().is_some_and(|v| v.alarm);
        alarms += usize::from(alarm);
        let nan = f64::NAN;
        t.push(vec![
            i.into(),
            modes_label(modes).into(),
            res.converged.into(),
            res.iterations.into(),
            res.mean_h.into(),
            res.cmc_residual.into(),
            res.umbilicity_deficit.into(),
            res.is_slice.into(),
            res.slice_spread.into(),
            verdict.as_ref().map_or(res.surface.mean_rho(), |v| v.mean_radius).into(),
            verdict.as_ref().map_or(nan, |v| v.h4_margin).into(),
            verdict.as_ref().map_or(nan, |v| v.ricci_gap).into(),
            alarm.into(),
            res.reason.clone().unwrap_or_default().into(),
        ]);
    }
    let em = Emitter::new(out, cfg.format, "cmc", &cfg.model.describe(), &grid.resolution_label())?;
    em.write(&t)?;
    println!("{}", em.header());
    println!("runs {}  converged {}  alarms {}", runs.len(), converged, alarms);
    if converged < runs.len() {
        println!("note: {} run(s) did not converge; see cmc_results", runs.len() - converged);
    }
    Ok(if alarms == 0 { EXIT_OK } else { EXIT_AUDIT })
}
