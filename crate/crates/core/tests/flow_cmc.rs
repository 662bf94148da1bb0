use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use warpcmc::cmc::{amplitude_cap, find_cmc, random_perturbations, umbilicity_verdict, CorpusSpec};
use warpcmc::flow::{
    area_floor_check, init_flow, monotonicity_audit, run_flow, run_flow_observed, swept_weighted_volumes,
    FlowControls,
};
use warpcmc::sphere::{GridMode, SphereGrid};
use warpcmc::surface::GraphSurface;
use warpcmc::{make_model, GeomError, ModelSpec, WarpingFunction};

fn full(nlat: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::full(nlat, 2 * nlat).unwrap())
}

fn schwarzschild() -> WarpingFunction {
    make_model(&ModelSpec::new("schwarzschild", 3).with_m(1.0)).unwrap()
}

fn slice_at_height(w: &WarpingFunction, nlat: usize, s: f64) -> GraphSurface {
    GraphSurface::slice(w, full(nlat), w.radius_for_height(s).unwrap()).unwrap()
}

#[test]
fn initial_q_values() {
    let e = WarpingFunction::euclidean(3, 4.0).unwrap();
    let st = init_flow(&GraphSurface::slice(&e, full(12), 1.0).unwrap()).unwrap();
    assert_relative_eq!(st.q_value, 4.0 * PI, epsilon = 1e-10);
    let st = init_flow(&slice_at_height(&schwarzschild(), 12, 2.0)).unwrap();
    assert_relative_eq!(st.q_value, 32.0 * PI, epsilon = 1e-8);
    assert_eq!(st.active_count(), st.grid().len());
}

#[test]
fn flow_needs_mean_convex_start() {
    let e = WarpingFunction::euclidean(3, 4.0).unwrap();
    let s = GraphSurface::slice(&e, full(32), 1.0).unwrap().perturb(&[(6, 0, 0.15)]).unwrap();
    assert!(matches!(init_flow(&s), Err(GeomError::Hypothesis(_))));
}

#[test]
fn schwarzschild_slice_flows_through_slices() {
    let w = schwarzschild();
    let start = slice_at_height(&w, 8, 2.0);
    let mut floors = Vec::new();
    let run = run_flow_observed(&start, &FlowControls::new(0.02, 1.0), |st| {
        floors.push(area_floor_check(st).map(|r| r.all_hold()));
    })
    .unwrap();
    assert!(floors.iter().all(|v| matches!(v, Ok(true))));
    let last = &run.last;
    assert!(last.slice_deviation().unwrap() < 1e-9);
    assert!(last.speed_drift < 1e-8);
    // The area of a slice only depends on its radius.
    let r = last.radii()[0];
    let h = w.eval(r).unwrap().h;
    assert_relative_eq!(last.area, 4.0 * PI * h * h, epsilon = 1e-8 * last.area);

    let vols = swept_weighted_volumes(&run.trace);
    let audit = monotonicity_audit(&run.trace, &vols);
    assert!(audit.all_hold(), "{audit:?}");
    assert!(audit.swept_slack.abs() < 1e-6, "slack {}", audit.swept_slack);
}

#[test]
fn perturbed_euclidean_run_loses_nodes_monotonically() {
    let e = WarpingFunction::euclidean(3, 4.0).unwrap();
    let start = GraphSurface::slice(&e, full(16), 1.0).unwrap().perturb(&[(2, 0, 0.08), (3, 1, 0.03)]).unwrap();
    // A coarse cut retires nodes well before the focal time, where the grid still resolves the surface.
    let controls = FlowControls { epsilon_cut: 0.3, ..FlowControls::new(0.01, 0.7) };
    let run = run_flow(&start, &controls).unwrap();
    let counts = &run.trace.active_count;
    assert!(counts.windows(2).all(|p| p[1] <= p[0]), "{counts:?}");
    assert!(*counts.last().unwrap() < counts[0]);
    assert!(run.trace.times.windows(2).all(|p| p[1] > p[0]));
    let vols = swept_weighted_volumes(&run.trace);
    let audit = monotonicity_audit(&run.trace, &vols);
    assert!(audit.all_hold(), "{audit:?}");
    // Umbilic-free start: the swept-volume bound holds strictly somewhere along the run.
    let q0 = run.trace.q_values[0];
    let best = run.trace.q_values.iter().zip(&vols).map(|(q, v)| (q0 - q - v) / q0).fold(f64::NEG_INFINITY, f64::max);
    assert!(best > 1e-4, "{best}");
}

#[test]
fn ball_variant_has_no_area_floor() {
    let e = WarpingFunction::euclidean(3, 4.0).unwrap();
    let st = init_flow(&GraphSurface::slice(&e, full(8), 1.0).unwrap()).unwrap();
    assert!(matches!(area_floor_check(&st), Err(GeomError::NotApplicable(_))));
}

#[test]
fn cmc_rounds_off_a_euclidean_bump() {
    let e = WarpingFunction::euclidean(3, 4.0).unwrap();
    let start = GraphSurface::slice(&e, full(24), 1.0).unwrap().perturb(&[(2, 0, 0.05)]).unwrap();
    let vol0 = start.enclosed_weighted_volume();
    let res = find_cmc(&start, 1e-7, 2000).unwrap();
    assert!(res.converged, "{:?}", res.reason);
    assert!(res.is_slice);
    assert!(res.umbilicity_deficit < 1e-6);
    assert!(res.volume_drift < 1e-8, "{}", res.volume_drift);
    assert_relative_eq!(res.surface.enclosed_weighted_volume(), vol0, epsilon = 1e-8 * vol0);
    // The round sphere of the same volume.
    let radius = (3.0 * vol0 / (4.0 * PI)).cbrt();
    assert_relative_eq!(res.mean_h, 2.0 / radius, epsilon = 1e-6);
}

#[test]
fn cmc_in_schwarzschild_returns_a_slice() {
    let w = schwarzschild();
    let start = slice_at_height(&w, 24, 2.0).perturb(&[(2, 0, 0.05)]).unwrap();
    let res = find_cmc(&start, 1e-7, 2000).unwrap();
    assert!(res.converged, "{:?}", res.reason);
    assert!(res.is_slice && res.slice_spread <= res.slice_tol);
    let tail = &res.residual_history[res.residual_history.len() / 5..];
    assert!(tail.windows(2).filter(|p| p[1] > p[0] * (1.0 + 1e-9)).count() == 0);
    let v = umbilicity_verdict(&res, &w, 3).unwrap();
    assert!(v.h4_margin > 0.0 && !v.alarm);
}

#[test]
fn corpus_respects_grid_mode_and_amplitude() {
    let spec = CorpusSpec { runs: 30, seed: 7, max_degree: 5, amplitude: 0.08, modes_per_run: 4 };
    for run in random_perturbations(&spec, GridMode::Axisymmetric) {
        assert!(run.iter().all(|&(l, m, _)| m == 0 && (1..=5).contains(&l)));
        assert!(run.iter().map(|m| m.2.abs()).sum::<f64>() <= 0.08 + 1e-15);
    }
    for run in random_perturbations(&spec, GridMode::Full) {
        assert!(run.iter().all(|&(l, m, _)| m.unsigned_abs() as usize <= l));
    }
    assert!(amplitude_cap(2.0) > amplitude_cap(1.0));
}
