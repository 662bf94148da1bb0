//! Normal exponential flow of a graph surface by unit-speed geodesics of `f⁻² g`,
//! with the quantity `Q(t) = (n-1) ∫ f/H dμ` and audits of its monotonicity.
//!
//! Each node carries a point `(r, d)` and a `g`-velocity `(ṙ, ḋ)`; the geodesic
//! equations of the conformal metric, written in `g`-coordinates, are
//!
//! ```text
//! r̈ = h h' |ḋ|² + (h''/h') (ṙ² − h²|ḋ|²)
//! d̈ = −2 (h'/h) ṙ ḋ − |ḋ|² d + 2 (h''/h') ṙ ḋ
//! ```
//!
//! with `|ḋ|` measured on the unit sphere. In axisymmetric mode `d` is replaced by
//! the meridian angle `θ` and the centripetal term drops out.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::geometry::{axi_geometry, full_geometry, DirectionJet, GeometryReport, Orientation};
use crate::identities::{weighted_from_report, Expectation, IdentityReport};
use crate::sphere::{GridMode, Parity, SphereGrid};
use crate::surface::GraphSurface;
use crate::warping::{Variant, WarpingFunction};

/// Nodes are retired once their area element shrinks below this fraction of the initial one.
pub const EPSILON_CUT: f64 = 1e-4;
/// Default maximal substep, as a fraction of `r̄`.
pub const DT_MAX_FACTOR: f64 = 1e-3;
/// Allowed drift of the `f⁻²g`-speed from 1.
pub const SPEED_TOL: f64 = 1e-8;
/// Allowed excess in `d/dt (f/H) + f²/(n-1) ≤ 0`.
pub const TOL_RICCATI: f64 = 1e-5;
/// Allowed per-step increase of `Q` and of the area, relative to their initial values.
pub const TOL_STEP_MONOTONE: f64 = 1e-7;
/// Allowed deficit in `Q(0) − Q(τ) ≥ n ∫_{u≤τ} f dvol`, relative to `Q(0)`.
pub const TOL_SWEPT: f64 = 1e-6;
/// Minimal radial alignment at which the late-time regime is considered reached.
pub const ALIGNMENT_ONSET: f64 = 0.5;

const MAX_REFINEMENTS: u32 = 6;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmbientPoint {
    pub r: f64,
    pub direction: [f64; 3],
}

#[derive(Debug, Clone)]
struct Nodes {
    r: Vec<f64>,
    vr: Vec<f64>,
    /// Unit direction (full mode) or `[θ, 0, 0]` (axisymmetric mode).
    d: Vec<[f64; 3]>,
    vd: Vec<[f64; 3]>,
    frozen: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    grid: Arc<SphereGrid>,
    ambient: WarpingFunction,
    nodes: Nodes,
    initial_area: Vec<f64>,
    dt_max: f64,
    epsilon_cut: f64,
    radial_reference: Option<f64>,
    pub t: f64,
    pub report: GeometryReport,
    pub q_value: f64,
    pub area: f64,
    pub jacobian_factor: Vec<f64>,
    pub active: Vec<bool>,
    /// Largest `| |v|_g / f − 1 |` over active nodes.
    pub speed_drift: f64,
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn tangent_reference(mode: GridMode, h: f64, vr: f64, d: [f64; 3], vd: [f64; 3]) -> [f64; 4] {
    match mode {
        GridMode::Full => [vr, h * vd[0], h * vd[1], h * vd[2]],
        GridMode::Axisymmetric => {
            let _ = d;
            [vr, h * vd[0], 0.0, 0.0]
        }
    }
}

/// Geometry of the transported parametrization.
fn transported_geometry(
    grid: &SphereGrid,
    ambient: &WarpingFunction,
    nodes: &Nodes,
    orientation_from_velocity: bool,
) -> Result<GeometryReport> {
    let refs: Vec<[f64; 4]> = (0..grid.len())
        .map(|k| {
            let h = ambient.jet(nodes.r[k]).h;
            tangent_reference(grid.mode(), h, nodes.vr[k], nodes.d[k], nodes.vd[k])
        })
        .collect();
    let orientation = if orientation_from_velocity { Orientation::AgainstVelocity(&refs) } else { Orientation::Outward };
    match grid.mode() {
        GridMode::Full => {
            let r = grid.derivatives_full(&nodes.r)?;
            let comp = |i: usize| -> Result<_> {
                let c: Vec<f64> = nodes.d.iter().map(|v| v[i]).collect();
                grid.derivatives_full(&c)
            };
            let c = [comp(0)?, comp(1)?, comp(2)?];
            let dirs: Vec<DirectionJet> = (0..grid.len()).map(|k| DirectionJet::from_components(&c, k)).collect();
            Ok(full_geometry(grid, ambient, &r, &dirs, orientation))
        }
        GridMode::Axisymmetric => {
            let (r1, r2) = grid.derivatives_axi(&nodes.r, Parity::Even)?;
            let u = grid.colatitudes();
            let theta: Vec<f64> = nodes.d.iter().map(|v| v[0]).collect();
            let psi: Vec<f64> = theta.iter().zip(u).map(|(t, u)| t - u).collect();
            let (p1, p2) = grid.derivatives_axi(&psi, Parity::Odd)?;
            let t1: Vec<f64> = p1.iter().map(|v| 1.0 + v).collect();
            Ok(axi_geometry(grid, ambient, [&nodes.r, &r1, &r2], [&theta, &t1, &p2], orientation))
        }
    }
}

type NodeState = [f64; 8];

fn rhs(ambient: &WarpingFunction, mode: GridMode, y: &NodeState) -> NodeState {
    let j = ambient.jet(y[0]);
    let (h, dh, d2h) = (j.h, j.dh, j.d2h);
    let vr = y[1];
    let q = d2h / dh;
    match mode {
        GridMode::Full => {
            let d = [y[2], y[3], y[4]];
            let vd = [y[5], y[6], y[7]];
            let w2 = dot(vd, vd);
            let ar = h * dh * w2 + q * (vr * vr - h * h * w2);
            let c = -2.0 * (dh / h) * vr + 2.0 * q * vr;
            [
                vr,
                ar,
                vd[0],
                vd[1],
                vd[2],
                c * vd[0] - w2 * d[0],
                c * vd[1] - w2 * d[1],
                c * vd[2] - w2 * d[2],
            ]
        }
        GridMode::Axisymmetric => {
            let vt = y[5];
            let w2 = vt * vt;
            let ar = h * dh * w2 + q * (vr * vr - h * h * w2);
            let at = (-2.0 * (dh / h) + 2.0 * q) * vr * vt;
            [vr, ar, vt, 0.0, 0.0, at, 0.0, 0.0]
        }
    }
}

fn inside(ambient: &WarpingFunction, r: f64) -> bool {
    let r_bar = ambient.r_bar();
    let floor = match ambient.variant() {
        Variant::Ball => 1e-6 * r_bar,
        Variant::Boundary => 0.0,
    };
    r > floor && r < r_bar && r.is_finite()
}

/// One RK4 step for a single node; `None` if a stage leaves the domain.
fn rk4(ambient: &WarpingFunction, mode: GridMode, y: NodeState, dt: f64) -> Option<NodeState> {
    let add = |a: &NodeState, b: &NodeState, s: f64| -> NodeState {
        let mut o = *a;
        for i in 0..8 {
            o[i] += s * b[i];
        }
        o
    };
    let k1 = rhs(ambient, mode, &y);
    let y2 = add(&y, &k1, 0.5 * dt);
    if !inside(ambient, y2[0]) {
        return None;
    }
    let k2 = rhs(ambient, mode, &y2);
    let y3 = add(&y, &k2, 0.5 * dt);
    if !inside(ambient, y3[0]) {
        return None;
    }
    let k3 = rhs(ambient, mode, &y3);
    let y4 = add(&y, &k3, dt);
    if !inside(ambient, y4[0]) {
        return None;
    }
    let k4 = rhs(ambient, mode, &y4);
    let mut out = y;
    for i in 0..8 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if !inside(ambient, out[0]) || out.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if mode == GridMode::Full {
        // Back onto the unit sphere, velocity tangent to it.
        let d = [out[2], out[3], out[4]];
        let nd = dot(d, d).sqrt();
        let d = [d[0] / nd, d[1] / nd, d[2] / nd];
        let vd = [out[5], out[6], out[7]];
        let p = dot(vd, d);
        out[2..5].copy_from_slice(&d);
        out[5] = vd[0] - p * d[0];
        out[6] = vd[1] - p * d[1];
        out[7] = vd[2] - p * d[2];
    }
    Some(out)
}

fn speed_ratio(ambient: &WarpingFunction, mode: GridMode, r: f64, vr: f64, vd: [f64; 3]) -> f64 {
    let j = ambient.jet(r);
    let w2 = match mode {
        GridMode::Full => dot(vd, vd),
        GridMode::Axisymmetric => vd[0] * vd[0],
    };
    (vr * vr + j.h * j.h * w2).sqrt() / j.dh
}

impl FlowState {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn ambient(&self) -> &WarpingFunction {
        &self.ambient
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    pub fn epsilon_cut(&self) -> f64 {
        self.epsilon_cut
    }

    pub fn radii(&self) -> &[f64] {
        &self.nodes.r
    }

    pub fn points(&self) -> Vec<AmbientPoint> {
        (0..self.nodes.r.len())
            .map(|k| {
                let d = self.nodes.d[k];
                let direction = match self.grid.mode() {
                    GridMode::Full => d,
                    GridMode::Axisymmetric => [d[0].sin(), 0.0, d[0].cos()],
                };
                AmbientPoint { r: self.nodes.r[k], direction }
            })
            .collect()
    }

    /// Velocities as `[ṙ, angular part in the orthonormal frame]`.
    pub fn velocities(&self) -> Vec<[f64; 4]> {
        (0..self.nodes.r.len())
            .map(|k| {
                let h = self.ambient.jet(self.nodes.r[k]).h;
                tangent_reference(self.grid.mode(), h, self.nodes.vr[k], self.nodes.d[k], self.nodes.vd[k])
            })
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// `f/H` on active nodes, `NaN` elsewhere.
    pub fn f_over_h(&self) -> Vec<f64> {
        (0..self.active.len())
            .map(|k| if self.active[k] { self.report.f[k] / self.report.mean_curvature[k] } else { f64::NAN })
            .collect()
    }

    /// `∫_{Σ_t*} f² dμ`.
    pub fn f2_integral(&self) -> f64 {
        let f2: Vec<f64> = self.report.f.iter().map(|f| f * f).collect();
        self.report.integrate_masked(&f2, &self.active)
    }

    /// Largest deviation of a slice flow from the scalar solution of `dr/dt = −h'(r)`
    /// integrated alongside; `None` unless the flow started from a slice.
    pub fn slice_deviation(&self) -> Option<f64> {
        self.radial_reference.map(|r0| self.nodes.r.iter().map(|r| (r - r0).abs()).fold(0.0, f64::max))
    }

    /// Minimum of `⟨∂r, ν⟩` over active nodes.
    pub fn min_alignment(&self) -> f64 {
        (0..self.active.len())
            .filter(|&k| self.active[k])
            .map(|k| self.report.normal_r[k])
            .fold(f64::INFINITY, f64::min)
    }

    fn finalize(&mut self) {
        let n = self.ambient.dim() as f64;
        for k in 0..self.active.len() {
            let jf = self.report.area_element[k] / self.initial_area[k];
            self.jacobian_factor[k] = jf;
            let h = self.report.mean_curvature[k];
            if self.active[k] && (self.nodes.frozen[k] || !(jf > self.epsilon_cut) || !(h > 0.0) || !h.is_finite()) {
                self.active[k] = false;
            }
        }
        let fh = self.f_over_h();
        let fh: Vec<f64> = fh.iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect();
        self.q_value = (n - 1.0) * self.report.integrate_masked(&fh, &self.active);
        self.area = self.report.integrate_masked(&vec![1.0; self.active.len()], &self.active);
        self.speed_drift = (0..self.active.len())
            .filter(|&k| self.active[k])
            .map(|k| {
                (speed_ratio(&self.ambient, self.grid.mode(), self.nodes.r[k], self.nodes.vr[k], self.nodes.vd[k]) - 1.0)
                    .abs()
            })
            .fold(0.0, f64::max);
    }

    /// Advances the flow by `dt`, subdividing into substeps no longer than `dt_max`
    /// and refining further while the speed drift exceeds a tenth of [`SPEED_TOL`].
    pub fn step(&self, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(GeomError::Parameter { family: "flow".into(), bound: format!("dt > 0 (got {dt})") });
        }
        if self.active_count() == 0 {
            return Err(GeomError::FlowExhausted { t: self.t });
        }
        let mode = self.grid.mode();
        let mut subs = (dt / self.dt_max).ceil().max(1.0) as usize;
        let mut refinements = 0;
        loop {
            let h = dt / subs as f64;
            let mut next = self.nodes.clone();
            let ambient = &self.ambient;
            let results: Vec<(NodeState, bool)> = (0..next.r.len())
                .into_par_iter()
                .map(|k| {
                    let d = next.d[k];
                    let vd = next.vd[k];
                    let mut y: NodeState = [next.r[k], next.vr[k], d[0], d[1], d[2], vd[0], vd[1], vd[2]];
                    if next.frozen[k] {
                        return (y, true);
                    }
                    for _ in 0..subs {
                        match rk4(ambient, mode, y, h) {
                            Some(v) => y = v,
                            None => return (y, true),
                        }
                    }
                    (y, false)
                })
                .collect();
            for (k, (y, frozen)) in results.into_iter().enumerate() {
                next.r[k] = y[0];
                next.vr[k] = y[1];
                next.d[k] = [y[2], y[3], y[4]];
                next.vd[k] = [y[5], y[6], y[7]];
                next.frozen[k] = frozen;
            }
            let drift = (0..next.r.len())
                .filter(|&k| self.active[k] && !next.frozen[k])
                .map(|k| (speed_ratio(ambient, mode, next.r[k], next.vr[k], next.vd[k]) - 1.0).abs())
                .fold(0.0, f64::max);
            if drift > 0.1 * SPEED_TOL && refinements < MAX_REFINEMENTS {
                subs *= 2;
                refinements += 1;
                continue;
            }
            let radial_reference = self.radial_reference.map(|mut r| {
                let g = |r: f64| -ambient.jet(r).dh;
                for _ in 0..subs {
                    let k1 = g(r);
                    let k2 = g(r + 0.5 * h * k1);
                    let k3 = g(r + 0.5 * h * k2);
                    let k4 = g(r + h * k3);
                    r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                r
            });
            let report = transported_geometry(&self.grid, ambient, &next, true)?;
            let mut state = FlowState {
                grid: self.grid.clone(),
                ambient: self.ambient.clone(),
                nodes: next,
                initial_area: self.initial_area.clone(),
                dt_max: self.dt_max,
                epsilon_cut: self.epsilon_cut,
                radial_reference,
                t: self.t + dt,
                report,
                q_value: 0.0,
                area: 0.0,
                jacobian_factor: self.jacobian_factor.clone(),
                active: self.active.clone(),
                speed_drift: 0.0,
            };
            state.finalize();
            return Ok(state);
        }
    }
}

/// Starts the flow with velocity `−f ν`.
pub fn init_flow(surface: &GraphSurface) -> Result<FlowState> {
    init_flow_with(surface, DT_MAX_FACTOR * surface.ambient().r_bar(), EPSILON_CUT)
}

pub fn init_flow_with(surface: &GraphSurface, dt_max: f64, epsilon_cut: f64) -> Result<FlowState> {
    if !(dt_max > 0.0) || !(epsilon_cut > 0.0 && epsilon_cut < 1.0) {
        return Err(GeomError::Parameter {
            family: "flow".into(),
            bound: "dt_max > 0 and 0 < epsilon_cut < 1".into(),
        });
    }
    let grid = surface.grid().clone();
    let ambient = surface.ambient().clone();
    let len = grid.len();
    let mode = grid.mode();
    let d: Vec<[f64; 3]> = match mode {
        GridMode::Full => (0..len).map(|k| grid.direction(k)).collect(),
        GridMode::Axisymmetric => grid.colatitudes().iter().map(|t| [*t, 0.0, 0.0]).collect(),
    };
    let mut nodes = Nodes {
        r: surface.rho().to_vec(),
        vr: vec![0.0; len],
        d,
        vd: vec![[0.0; 3]; len],
        frozen: vec![false; len],
    };
    let report = transported_geometry(&grid, &ambient, &nodes, false)?;
    if let Some(&k) = report.degenerate_nodes().first() {
        return Err(GeomError::Geometry(format!("degenerate induced metric at node {k}")));
    }
    if !(report.min_h > 0.0) {
        return Err(GeomError::Hypothesis(format!(
            "the flow needs positive mean curvature (min H = {:e})",
            report.min_h
        )));
    }
    for k in 0..len {
        let j = ambient.jet(nodes.r[k]);
        let f = j.dh;
        nodes.vr[k] = -f * report.normal_r[k];
        let a = report.normal_ang[k];
        nodes.vd[k] = match mode {
            GridMode::Full => [-f * a[0] / j.h, -f * a[1] / j.h, -f * a[2] / j.h],
            GridMode::Axisymmetric => [-f * a[0] / j.h, 0.0, 0.0],
        };
    }
    let first = nodes.r[0];
    let radial_reference = nodes.r.iter().all(|r| *r == first).then_some(first);
    let mut state = FlowState {
        grid,
        ambient,
        initial_area: report.area_element.clone(),
        nodes,
        dt_max,
        epsilon_cut,
        radial_reference,
        t: 0.0,
        report,
        q_value: 0.0,
        area: 0.0,
        jacobian_factor: vec![1.0; len],
        active: vec![true; len],
        speed_drift: 0.0,
    };
    state.finalize();
    Ok(state)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowControls {
    pub dt: f64,
    pub t_end: f64,
    pub epsilon_cut: f64,
    /// Record `f/H` snapshots every `stride` steps.
    pub stride: usize,
}

impl FlowControls {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, epsilon_cut: EPSILON_CUT, stride: 10 }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FlowTrace {
    pub dim: usize,
    pub times: Vec<f64>,
    pub q_values: Vec<f64>,
    pub areas: Vec<f64>,
    pub min_alignment: Vec<f64>,
    pub active_count: Vec<usize>,
    /// `∫_{Σ_t*} f² dμ` at each time.
    pub f2_integrals: Vec<f64>,
    /// Largest `d/dt (f/H) + f²/(n-1)` over nodes active at three consecutive samples,
    /// attributed to the middle sample (`NaN` at the ends).
    pub riccati_excess: Vec<f64>,
    /// Snapshots of `f/H` every `stride` steps, with their times.
    pub snapshot_times: Vec<f64>,
    pub per_node_fh: Vec<Vec<f64>>,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub initial: FlowState,
    pub last: FlowState,
    pub exhausted: bool,
}

/// Advances `surface` to `t_end` (or until every node has been retired), recording the trace.
pub fn run_flow(surface: &GraphSurface, controls: &FlowControls) -> Result<FlowRun> {
    run_flow_observed(surface, controls, |_| {})
}

/// As [`run_flow`], calling `observe` on every state (including the initial one).
pub fn run_flow_observed(
    surface: &GraphSurface,
    controls: &FlowControls,
    mut observe: impl FnMut(&FlowState),
) -> Result<FlowRun> {
    if !(controls.t_end > 0.0) || !(controls.dt > 0.0) || controls.stride == 0 {
        return Err(GeomError::Parameter {
            family: "flow".into(),
            bound: "dt > 0, t_end > 0 and stride >= 1".into(),
        });
    }
    let dt_max = (DT_MAX_FACTOR * surface.ambient().r_bar()).min(controls.dt);
    let initial = init_flow_with(surface, dt_max, controls.epsilon_cut)?;
    let n = initial.ambient.dim() as f64;
    let mut trace = FlowTrace { dim: initial.ambient.dim(), ..Default::default() };
    let record = |trace: &mut FlowTrace, s: &FlowState, step: usize| {
        trace.times.push(s.t);
        trace.q_values.push(s.q_value);
        trace.areas.push(s.area);
        trace.min_alignment.push(s.min_alignment());
        trace.active_count.push(s.active_count());
        trace.f2_integrals.push(s.f2_integral());
        trace.riccati_excess.push(f64::NAN);
        if step % controls.stride == 0 {
            trace.snapshot_times.push(s.t);
            trace.per_node_fh.push(s.f_over_h());
        }
    };
    record(&mut trace, &initial, 0);
    observe(&initial);
    let steps = (controls.t_end / controls.dt - 1e-9).ceil().max(1.0) as usize;
    let mut window: Vec<(f64, Vec<f64>, Vec<f64>)> = vec![(initial.t, initial.f_over_h(), initial.report.f.clone())];
    let mut state = initial.clone();
    let mut exhausted = false;
    for i in 1..=steps {
        let target = (i as f64 * controls.dt).min(controls.t_end);
        let next = match state.step(target - state.t) {
            Ok(s) => s,
            Err(GeomError::FlowExhausted { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        record(&mut trace, &next, i);
        observe(&next);
        window.push((next.t, next.f_over_h(), next.report.f.clone()));
        if window.len() > 3 {
            window.remove(0);
        }
        if window.len() == 3 {
            let excess = riccati_excess(&window, n);
            let idx = trace.riccati_excess.len() - 2;
            trace.riccati_excess[idx] = excess;
        }
        state = next;
        if state.active_count() == 0 {
            exhausted = true;
            break;
        }
    }
    Ok(FlowRun { trace, initial, last: state, exhausted })
}

/// Three-point nonuniform derivative of `f/H` at the middle sample plus `f²/(n-1)`.
fn riccati_excess(w: &[(f64, Vec<f64>, Vec<f64>)], n: f64) -> f64 {
    let (t0, a, _) = &w[0];
    let (t1, b, f) = &w[1];
    let (t2, c, _) = &w[2];
    let h0 = t1 - t0;
    let h1 = t2 - t1;
    let ca = -h1 / (h0 * (h0 + h1));
    let cb = (h1 - h0) / (h0 * h1);
    let cc = h0 / (h1 * (h0 + h1));
    let mut worst = f64::NEG_INFINITY;
    for k in 0..b.len() {
        if a[k].is_nan() || b[k].is_nan() || c[k].is_nan() {
            continue;
        }
        let d = ca * a[k] + cb * b[k] + cc * c[k];
        worst = worst.max(d + f[k] * f[k] / (n - 1.0));
    }
    worst
}

/// `n ∫_0^{t_k} ∫_{Σ_t*} f² dμ dt` at every trace time, by piecewise cubic interpolation.
pub fn swept_weighted_volumes(trace: &FlowTrace) -> Vec<f64> {
    let t = &trace.times;
    let g = &trace.f2_integrals;
    let m = t.len();
    let mut out = vec![0.0; m];
    if m < 2 {
        return out;
    }
    let gl = crate::quadrature::GaussLegendre::new(3);
    let mut acc = 0.0;
    for i in 0..m - 1 {
        let lo = if m < 4 { 0 } else { i.saturating_sub(1).min(m - 4) };
        let hi = (lo + 4).min(m);
        let xs = &t[lo..hi];
        let ys = &g[lo..hi];
        let interp = |x: f64| -> f64 {
            let mut s = 0.0;
            for (j, (xj, yj)) in xs.iter().zip(ys).enumerate() {
                let mut l = 1.0;
                for (q, xq) in xs.iter().enumerate() {
                    if q != j {
                        l *= (x - xq) / (xj - xq);
                    }
                }
                s += yj * l;
            }
            s
        };
        acc += gl.integrate(t[i], t[i + 1], interp);
        out[i + 1] = acc;
    }
    let n = trace.dim as f64;
    out.iter().map(|v| n * v).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityAudit {
    /// Largest per-step increase of `Q`, relative to `Q(0)` (non-positive when monotone).
    pub q_step_increase: f64,
    /// `min_k (Q(0) − Q(t_k) − V_k) / Q(0)` with `V_k` the swept weighted volume.
    pub swept_slack: f64,
    /// Largest `d/dt (f/H) + f²/(n-1)` over the run.
    pub riccati_excess: f64,
    /// Largest per-step increase of the area, relative to the initial area.
    pub area_step_increase: f64,
    pub q_monotone: bool,
    pub swept_holds: bool,
    pub riccati_holds: bool,
    pub area_monotone: bool,
}

impl MonotonicityAudit {
    pub fn all_hold(&self) -> bool {
        self.q_monotone && self.swept_holds && self.riccati_holds && self.area_monotone
    }
}

pub fn monotonicity_audit(trace: &FlowTrace, weighted_volumes: &[f64]) -> MonotonicityAudit {
    let q0 = trace.q_values.first().copied().unwrap_or(0.0);
    let a0 = trace.areas.first().copied().unwrap_or(0.0);
    let max_increase = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let q_step_increase = max_increase(&trace.q_values) / q0;
    let area_step_increase = max_increase(&trace.areas) / a0;
    let swept_slack = trace
        .q_values
        .iter()
        .zip(weighted_volumes)
        .map(|(q, v)| (q0 - q - v) / q0)
        .fold(f64::INFINITY, f64::min);
    let riccati_excess = trace.riccati_excess.iter().filter(|v| !v.is_nan()).copied().fold(f64::NEG_INFINITY, f64::max);
    MonotonicityAudit {
        q_step_increase,
        swept_slack,
        riccati_excess,
        area_step_increase,
        q_monotone: !(q_step_increase > TOL_STEP_MONOTONE),
        swept_holds: swept_slack >= -TOL_SWEPT,
        riccati_holds: !(riccati_excess > TOL_RICCATI),
        area_monotone: !(area_step_increase > TOL_STEP_MONOTONE),
    }
}

/// `min ⟨∂r, ν⟩` over active nodes; only meaningful with an inner boundary.
pub fn radial_alignment(state: &FlowState) -> Result<f64> {
    if state.ambient.variant() != Variant::Boundary {
        return Err(GeomError::NotApplicable("radial alignment needs an inner boundary".into()));
    }
    Ok(state.min_alignment())
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaFloorReport {
    pub t: f64,
    pub alignment: f64,
    /// `μ(Σ_t*) ≥ h(0)^{n-1} vol(N)`.
    pub area_floor: IdentityReport,
    /// `∫ (H/f)⟨X,ν⟩ dμ ≤ (n-1) μ(Σ_t*)` over active nodes.
    pub weighted_minkowski: IdentityReport,
    /// `Q(t) ≥ λ h(0)ⁿ vol(N)` with `λ` the current alignment.
    pub q_floor: IdentityReport,
}

impl AreaFloorReport {
    pub fn all_hold(&self) -> bool {
        self.area_floor.verdict.holds() && self.weighted_minkowski.verdict.holds() && self.q_floor.verdict.holds()
    }
}

/// Absolute tolerance for the area floor.
pub const TOL_AREA_FLOOR: f64 = 1e-6;
/// Tolerance for the weighted Minkowski bound on flow surfaces, relative to the area.
pub const TOL_FLOW_WEIGHTED: f64 = 1e-6;

pub fn area_floor_check(state: &FlowState) -> Result<AreaFloorReport> {
    if state.ambient.variant() != Variant::Boundary {
        return Err(GeomError::NotApplicable("the area floor needs an inner boundary".into()));
    }
    let n = state.ambient.dim() as i32;
    let h0 = state.ambient.jet(0.0).h;
    let vol = state.grid.volume();
    let area_floor =
        IdentityReport::new("area-floor", Expectation::AtLeast, state.area, h0.powi(n - 1) * vol, TOL_AREA_FLOOR);
    let wm = weighted_from_report(&state.report, Some(&state.active));
    let weighted_minkowski =
        IdentityReport::new("minkowski-weighted", Expectation::AtMost, wm.lhs, wm.rhs, TOL_FLOW_WEIGHTED * state.area);
    let alignment = state.min_alignment();
    let q_floor = IdentityReport::new(
        "q-floor",
        Expectation::AtLeast,
        state.q_value,
        alignment.max(0.0) * h0.powi(n) * vol,
        TOL_AREA_FLOOR * state.q_value.abs(),
    );
    Ok(AreaFloorReport { t: state.t, alignment, area_floor, weighted_minkowski, q_floor })
}
