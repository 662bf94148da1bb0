//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::error::Error;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpcmc::cmc::{find_cmc, random_perturbations, umbilicity_verdict, CorpusSpec, CMC_TOL};
use warpcmc::conditions::chebyshev_grid;
use warpcmc::flow::{
    area_floor_check, monotonicity_audit, run_flow, run_flow_observed, swept_weighted_volumes, FlowControls, FlowRun,
};
use warpcmc::identities::{hk_check, minkowski_check, Verdict};
use warpcmc::sphere::{GridMode, SphereGrid};
use warpcmc::surface::{GraphSurface, Mode};
use warpcmc::{check_conditions, make_model, Condition, ConditionSet, ModelRegistry, ModelSpec, Variant, WarpingFunction};

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temporary directory");
    dir
}

fn sch(n: usize, m: f64) -> ModelSpec {
    ModelSpec::new("schwarzschild", n).with_m(m)
}

fn dss(kappa: f64) -> ModelSpec {
    ModelSpec::new("desitter-schwarzschild", 3).with_m(1.0).with_kappa(kappa)
}

fn rn(q: f64) -> ModelSpec {
    ModelSpec::new("reissner-nordstrom", 3).with_m(1.0).with_q(q)
}

/// Largest admissible κ for `n = 3, m = 1` is `4/27`.
fn dss_kappas() -> [f64; 3] {
    [-0.1, 0.0, 0.2 * 4.0 / 27.0]
}

fn black_holes() -> Vec<ModelSpec> {
    let mut v = Vec::new();
    for n in [3, 4, 5] {
        for m in [0.5, 1.0, 2.0] {
            v.push(sch(n, m));
        }
    }
    v.extend(dss_kappas().map(dss));
    v.extend([0.1, 0.25, 0.45].map(rn));
    v
}

fn space_forms() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new("euclidean", 3),
        ModelSpec::new("sphere", 3).with_curvature(1.0),
        ModelSpec::new("hyperbolic", 3).with_curvature(1.0),
        ModelSpec::new("hyperbolic", 5).with_curvature(1.0),
    ]
}

fn full(nlat: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::full(nlat, 2 * nlat).expect("grid"))
}

fn grid_for(n: usize, nlat: usize) -> Arc<SphereGrid> {
    if n == 3 {
        full(nlat)
    } else {
        Arc::new(SphereGrid::axisymmetric(n, 4 * nlat).expect("grid"))
    }
}

/// Slice at area radius `s` for boundary models, at `r = s` otherwise.
fn slice_at(w: &WarpingFunction, grid: Arc<SphereGrid>, s: f64) -> Res<GraphSurface> {
    let r = match w.variant() {
        Variant::Boundary => w.radius_for_height(s)?,
        Variant::Ball => s,
    };
    Ok(GraphSurface::slice(w, grid, r)?)
}

fn criterion_1(t: &mut Tally) -> Res<String> {
    let mut worst_space: f64 = 0.0;
    let mut count = 0;
    for spec in black_holes() {
        let w = make_model(&spec)?;
        let rep = check_conditions(&w, spec.n, ConditionSet::H, 256)?;
        count += 1;
        for c in [Condition::H1, Condition::H2, Condition::H3, Condition::H4] {
            let e = rep.entry(c);
            t.expect(e.verdict, || format!("{} fails {} (min margin {:e})", spec.describe(), e.label, e.min_margin));
        }
    }
    for spec in space_forms() {
        let w = make_model(&spec)?;
        let rep = check_conditions(&w, spec.n, ConditionSet::Hprime, 256)?;
        count += 1;
        for c in [Condition::H1, Condition::H2, Condition::H3] {
            let e = rep.entry(c);
            t.expect(e.verdict, || format!("{} fails {}", spec.describe(), e.label));
        }
        let h4 = rep.entry(Condition::H4);
        let m = h4.margins.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        worst_space = worst_space.max(m);
        t.expect(m <= 1e-12, || format!("{}: |H4'| margin {m:e}", spec.describe()));
        t.expect(!h4.verdict && h4.degenerate, || format!("{}: H4' should fail as degenerate", spec.describe()));
    }
    Ok(format!("{count} models, max |H4'| on space forms {worst_space:.1e}"))
}

fn criterion_2(t: &mut Tally) -> Res<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_r: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut specs = black_holes();
    specs.extend(space_forms());
    specs.push(ModelSpec::new("desitter-schwarzschild", 3).with_m(0.1).with_kappa(0.2));
    for spec in specs {
        let w = make_model(&spec)?;
        let n = spec.n as f64;
        let expected = match spec.family.as_str() {
            "desitter-schwarzschild" => Some(n * (n - 1.0) * spec.kappa.unwrap_or(0.0)),
            "schwarzschild" => Some(0.0),
            _ => None,
        };
        for _ in 0..200 {
            let r = w.r_bar() * rng.gen_range(0.01..0.99);
            let scalar = w.scalar_curvature(r, spec.n)?;
            if let Some(e) = expected {
                let d = (scalar - e).abs();
                worst_r = worst_r.max(d);
                t.expect(d <= 1e-9, || format!("{} R({r}) = {scalar}, expected {e}", spec.describe()));
            }
            let (rad, tan) = w.ricci_split(r, spec.n)?;
            let d = (rad + (n - 1.0) * tan - scalar).abs() / scalar.abs().max(1.0);
            worst_trace = worst_trace.max(d);
            t.expect(d <= 1e-10, || format!("{} trace identity off by {d:e} at r = {r}", spec.describe()));
        }
    }
    Ok(format!("max |R - n(n-1)κ| {worst_r:.1e}, max trace defect {worst_trace:.1e}"))
}

/// `(Δf) g - D²f + f Ric` assembled from fourth-order centred differences of `f = h'`.
fn static_tensor_fd(w: &WarpingFunction, r: f64, n: usize) -> Res<(f64, f64)> {
    let d = 2e-3;
    let f = |x: f64| -> Res<f64> { Ok(w.eval(x)?.dh) };
    let (f2m, fm, f0, fp, f2p) = (f(r - 2.0 * d)?, f(r - d)?, f(r)?, f(r + d)?, f(r + 2.0 * d)?);
    let df = (f2m - 8.0 * fm + 8.0 * fp - f2p) / (12.0 * d);
    let d2f = (-f2m + 16.0 * fm - 30.0 * f0 + 16.0 * fp - f2p) / (12.0 * d * d);
    let h = w.eval(r)?.h;
    let nn = n as f64;
    let d2h = df;
    let ric_rad = -(nn - 1.0) * d2h / h;
    let ric_tan = -d2h / h + (nn - 2.0) * (w.rho() - f0 * f0) / (h * h);
    let hess_rad = d2f;
    let hess_tan = f0 / h * df;
    let lap = hess_rad + (nn - 1.0) * hess_tan;
    Ok((lap - hess_rad + f0 * ric_rad, lap - hess_tan + f0 * ric_tan))
}

fn criterion_3(t: &mut Tally) -> Res<String> {
    let mut specs = black_holes();
    specs.extend(space_forms());
    let (mut tested, mut worst_neg, mut worst_fd) = (0, f64::INFINITY, 0.0f64);
    let mut worst_at = String::new();
    for spec in specs {
        let w = make_model(&spec)?;
        let set = if w.variant() == Variant::Boundary { ConditionSet::H } else { ConditionSet::Hprime };
        let rep = check_conditions(&w, spec.n, set, 256)?;
        if !rep.verdict(Condition::H3) {
            continue;
        }
        tested += 1;
        let rb = w.r_bar();
        for &r in &chebyshev_grid(rb, 256) {
            let (rad, tan) = w.static_tensor(r, spec.n)?;
            worst_neg = worst_neg.min(tan);
            t.expect(tan >= -1e-9, || format!("{}: tangential static eigenvalue {tan:e} at r = {r}", spec.describe()));
            let half_hw = 0.5 * w.eval(r)?.h * w.h3_quantity(r, spec.n)?.1;
            t.expect((tan - half_hw).abs() <= 1e-9 * half_hw.abs().max(1.0), || {
                format!("{}: tangential {tan} vs h W'/2 {half_hw}", spec.describe())
            });
            if r < 0.01 * rb || r > 0.99 * rb {
                continue;
            }
            let (frad, ftan) = static_tensor_fd(&w, r, spec.n)?;
            let d = (frad - rad).abs().max((ftan - tan).abs()) / tan.abs().max(1.0);
            if d > worst_fd {
                worst_fd = d;
                worst_at = format!("{} r = {r:.4}", spec.describe());
            }
            t.expect(d <= 1e-6, || format!("{}: FD static tensor off by {d:e} at r = {r}", spec.describe()));
        }
    }
    Ok(format!("{tested} (H3)-passing models, min tangential {worst_neg:.2e}, max FD defect {worst_fd:.1e} ({worst_at})"))
}

fn criterion_4(t: &mut Tally) -> Res<String> {
    let registry = ModelRegistry::with_builtins();
    let mut worst: f64 = 0.0;
    for spec in black_holes() {
        let w = registry.make_model(&spec)?;
        let profile = registry.omega_profile(&spec)?.ok_or("black-hole family without an omega profile")?;
        let n = spec.n as f64;
        for &r in &chebyshev_grid(w.r_bar(), 256) {
            let j = w.eval(r)?;
            let (ws, dws, h4s) = profile.omega_form_margins(j.h);
            let (wr, dwr) = w.h3_quantity(r, spec.n)?;
            let h4r = j.d2h / j.h + (w.rho() - j.dh * j.dh) / (j.h * j.h);
            let h3r = 2.0 * j.d2h / j.h - (n - 2.0) * (w.rho() - j.dh * j.dh) / (j.h * j.h);
            for (a, b, what) in [(ws, wr, "W"), (ws, h3r, "W (jet)"), (dws * j.dh, dwr, "W'"), (h4s, h4r, "H4")] {
                let d = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
                worst = worst.max(d);
                t.expect(d <= 1e-7, || format!("{}: {what} omega-form {a} vs r-form {b} at r = {r}", spec.describe()));
            }
        }
    }
    let profile = registry.omega_profile(&sch(3, 1.0))?.ok_or("no profile")?;
    let f2 = profile.arclength(2.0)?;
    let exact = 2f64.sqrt() + (1.0 + 2f64.sqrt()).ln();
    t.expect((f2 - exact).abs() <= 1e-10, || format!("F(2) = {f2}, expected {exact}"));
    Ok(format!("max margin mismatch {worst:.1e}, |F(2) - exact| {:.1e}", (f2 - exact).abs()))
}

fn tabulated_spec(dir: &Path) -> Res<ModelSpec> {
    let path = dir.join("omega.txt");
    let mut text = String::from("# s omega (Schwarzschild, m = 1)\n");
    for i in 0..=400 {
        let s = 1.0 + 9.0 * i as f64 / 400.0;
        text.push_str(&format!("{s} {}\n", 1.0 - 1.0 / s));
    }
    std::fs::write(&path, text)?;
    Ok(ModelSpec::new("tabulated", 3).with_table(path))
}

fn high_degree_graph(w: &WarpingFunction, grid: Arc<SphereGrid>, s: f64) -> Res<GraphSurface> {
    Ok(slice_at(w, grid, s)?.perturb(&[(8, 3, 0.05), (6, 0, 0.08), (3, -2, 0.05)])?)
}

fn criterion_5(t: &mut Tally) -> Res<String> {
    let dir = tmp_dir("c5");
    let mut specs = vec![sch(3, 1.0), dss(0.1), rn(0.25), tabulated_spec(&dir)?, sch(5, 1.0)];
    specs.extend(space_forms());
    let mut worst_slice: f64 = 0.0;
    for spec in &specs {
        let w = make_model(spec)?;
        let grid = grid_for(spec.n, 16);
        for i in 0..20 {
            let r = w.r_bar() * (0.05 + 0.9 * i as f64 / 19.0);
            let rep = minkowski_check(&GraphSurface::slice(&w, grid.clone(), r)?)?;
            worst_slice = worst_slice.max(rep.relative_residual.abs());
            t.expect(rep.relative_residual.abs() < 1e-12, || {
                format!("{} slice r = {r}: relative residual {:e}", spec.describe(), rep.relative_residual)
            });
        }
    }

    let grid = full(64);
    let corpus = CorpusSpec { runs: 10, seed: 5, ..CorpusSpec::default() };
    let fixtures = [(sch(3, 1.0), 2.0), (rn(0.45), 2.5), (dss(0.002), 2.5), (ModelSpec::new("euclidean", 3), 1.0)];
    let mut worst_graph: f64 = 0.0;
    for (i, modes) in random_perturbations(&corpus, GridMode::Full).iter().enumerate() {
        let (spec, s) = &fixtures[i % fixtures.len()];
        let w = make_model(spec)?;
        let rep = minkowski_check(&slice_at(&w, grid.clone(), *s)?.perturb(modes)?)?;
        worst_graph = worst_graph.max(rep.relative_residual.abs());
        t.expect(rep.relative_residual.abs() < 1e-8, || {
            format!("{} graph {modes:?}: relative residual {:e}", spec.describe(), rep.relative_residual)
        });
    }

    let mut min_ratio = f64::INFINITY;
    for (spec, s) in [(ModelSpec::new("euclidean", 3), 1.0), (sch(3, 1.0), 2.0)] {
        let w = make_model(&spec)?;
        let coarse = minkowski_check(&high_degree_graph(&w, full(32), s)?)?.relative_residual.abs();
        let fine = minkowski_check(&high_degree_graph(&w, full(64), s)?)?.relative_residual.abs();
        let ratio = coarse / fine.max(f64::MIN_POSITIVE);
        min_ratio = min_ratio.min(ratio);
        t.expect(ratio >= 1e2, || format!("{}: 32x64 {coarse:e} vs 64x128 {fine:e}", spec.describe()));
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!(
        "slices {worst_slice:.1e}, perturbed graphs {worst_graph:.1e}, refinement ratio >= {min_ratio:.1e}"
    ))
}

fn criterion_6(t: &mut Tally) -> Res<String> {
    let mut worst_eq: f64 = 0.0;
    let specs = [sch(3, 1.0), sch(4, 1.0), dss(0.1), rn(0.45), ModelSpec::new("euclidean", 3), ModelSpec::new("hyperbolic", 3)];
    for spec in &specs {
        let w = make_model(spec)?;
        let grid = grid_for(spec.n, 16);
        for frac in [0.2, 0.5, 0.8] {
            let rep = hk_check(&GraphSurface::slice(&w, grid.clone(), frac * w.r_bar())?)?;
            worst_eq = worst_eq.max(rep.relative_residual.abs());
            t.expect(rep.relative_residual.abs() <= 1e-9, || {
                format!("{} slice: HK relative residual {:e}", spec.describe(), rep.relative_residual)
            });
        }
    }
    let w = make_model(&sch(3, 1.0))?;
    let rep = hk_check(&slice_at(&w, full(16), 2.0)?)?;
    for side in [rep.lhs, rep.rhs] {
        t.expect((side - 32.0 * PI).abs() <= 1e-9 * 32.0 * PI, || format!("Schwarzschild s = 2: side {side} vs 32π"));
    }

    let mut min_strict = f64::INFINITY;
    for (spec, s) in [(ModelSpec::new("euclidean", 3), 1.0), (sch(3, 1.0), 2.0), (rn(0.25), 2.5), (ModelSpec::new("hyperbolic", 3), 1.0)] {
        let w = make_model(&spec)?;
        let mut prev = 0.0;
        for a in [0.02, 0.05, 0.1] {
            let surf = slice_at(&w, full(32), s)?.perturb(&[(2, 0, a)])?;
            let rep = hk_check(&surf)?;
            min_strict = min_strict.min(rep.residual);
            t.expect(rep.verdict == Verdict::InequalitySatisfied && rep.residual > 0.0, || {
                format!("{} amplitude {a}: verdict {} residual {:e}", spec.describe(), rep.verdict.label(), rep.residual)
            });
            t.expect(rep.residual > prev, || format!("{} amplitude {a}: residual {:e} not above {prev:e}", spec.describe(), rep.residual));
            prev = rep.residual;
        }
    }
    Ok(format!("slice equality within {worst_eq:.1e}, smallest strict residual {min_strict:.2e}"))
}

fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn flow_controls(dt: f64, t_end: f64) -> FlowControls {
    FlowControls::new(dt, t_end)
}

fn criterion_7(t: &mut Tally) -> Res<String> {
    let euc = make_model(&ModelSpec::new("euclidean", 3))?;
    let run = run_flow(&GraphSurface::slice(&euc, full(32), 1.0)?, &flow_controls(0.01, 0.5))?;
    let mut worst_q: f64 = 0.0;
    for target in [0.25, 0.5] {
        let k = run.trace.times.iter().position(|&x| (x - target).abs() < 1e-12).ok_or("missing sample time")?;
        let exact = 4.0 * PI * (1.0 - target).powi(3);
        let d = (run.trace.q_values[k] - exact).abs();
        worst_q = worst_q.max(d);
        t.expect(d <= 1e-6, || format!("Euclidean Q({target}) = {} vs {exact}", run.trace.q_values[k]));
    }

    let hyp3 = ModelSpec::new("hyperbolic", 3).with_curvature(1.0);
    let corpus: Vec<(ModelSpec, usize, f64, Vec<Mode>, f64)> = vec![
        (ModelSpec::new("euclidean", 3), 32, 1.0, vec![], 0.5),
        (ModelSpec::new("euclidean", 3), 32, 1.0, vec![(2, 0, 0.1)], 0.5),
        (ModelSpec::new("euclidean", 3), 32, 1.0, vec![(1, 1, 0.05), (3, -2, 0.05)], 0.5),
        (sch(3, 1.0), 32, 2.0, vec![], 2.0),
        (sch(3, 1.0), 32, 2.5, vec![(2, 0, 0.1)], 2.0),
        (rn(0.45), 32, 2.5, vec![(3, 1, 0.08)], 2.0),
        (dss(0.002), 32, 2.5, vec![(2, -1, 0.08)], 2.0),
        (hyp3, 32, 1.0, vec![(2, 0, 0.05)], 0.5),
        (ModelSpec::new("hyperbolic", 5).with_curvature(1.0), 32, 1.0, vec![], 0.5),
        (sch(4, 1.0), 32, 2.0, vec![(2, 0, 0.05)], 1.0),
    ];
    let (mut worst_slack, mut worst_ric, mut worst_ode) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (spec, nlat, s, modes, t_end) in corpus {
        let w = make_model(&spec)?;
        let surf = slice_at(&w, grid_for(spec.n, nlat), s)?.perturb(&modes)?;
        let run = run_flow(&surf, &flow_controls(0.01, t_end))?;
        let vols = swept_weighted_volumes(&run.trace);
        let audit = monotonicity_audit(&run.trace, &vols);
        let label = format!("{} {modes:?}", spec.describe());
        worst_slack = worst_slack.min(audit.swept_slack);
        worst_ric = worst_ric.max(audit.riccati_excess);
        t.expect(audit.swept_slack >= -1e-6, || format!("{label}: swept-volume slack {:e}", audit.swept_slack));
        t.expect(audit.riccati_excess <= 1e-5, || format!("{label}: Riccati excess {:e}", audit.riccati_excess));
        t.expect(audit.area_monotone, || format!("{label}: area increased by {:e}", audit.area_step_increase));
        t.expect(audit.q_monotone, || format!("{label}: Q increased by {:e}", audit.q_step_increase));
        if modes.is_empty() {
            let d = slice_oracle_deviation(&spec, &w, &run, &surf)?;
            worst_ode = worst_ode.max(d);
            t.expect(d <= 1e-8, || format!("{label}: slice deviates from the radial ODE by {d:e}"));
        }
    }
    Ok(format!(
        "|Q - 4π(1-t)³| {worst_q:.1e}, min slack {worst_slack:.1e}, max Riccati excess {worst_ric:.1e}, slice ODE {worst_ode:.1e}"
    ))
}

/// Distance between the flowed slice and the closed-form solution of `dr/dt = -h'(r)`.
fn slice_oracle_deviation(spec: &ModelSpec, w: &WarpingFunction, run: &FlowRun, surf: &GraphSurface) -> Res<f64> {
    let t = run.last.t;
    let r0 = surf.rho()[0];
    let exact = match spec.family.as_str() {
        "euclidean" => r0 - t,
        "hyperbolic" => {
            let gd = |x: f64| 2.0 * (x / 2.0).tanh().atan();
            2.0 * ((gd(r0) - t) / 2.0).tan().atanh()
        }
        "schwarzschild" if spec.n == 3 => {
            // ds/dt = -(1 - 1/s), integrated in closed form.
            let s0 = w.eval(r0)?.h;
            let s = bisect(1.0 + 1e-14, s0, |s| (s0 - s) + ((s0 - 1.0) / (s - 1.0)).ln() - t);
            w.radius_for_height(s)?
        }
        other => return Err(format!("no slice oracle for {other}").into()),
    };
    Ok(run.last.radii().iter().map(|r| (r - exact).abs()).fold(0.0, f64::max))
}

fn criterion_8(t: &mut Tally) -> Res<String> {
    let w = make_model(&sch(3, 1.0))?;
    let floor = 4.0 * PI;
    let (mut min_area, mut min_wm, mut min_rise) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for modes in [vec![], vec![(2, 0, 0.1)], vec![(1, 1, 0.1), (3, -2, 0.05)]] {
        let surf = slice_at(&w, full(32), 2.5)?.perturb(&modes)?;
        let mut reports = Vec::new();
        let run = run_flow_observed(&surf, &flow_controls(0.02, 8.0), |s| reports.push(area_floor_check(s)))?;
        for rep in reports {
            let rep = rep?;
            min_area = min_area.min(rep.area_floor.lhs - floor);
            t.expect(rep.area_floor.lhs >= floor - 1e-6, || format!("{modes:?}: area {} at t = {}", rep.area_floor.lhs, rep.t));
            let wm = &rep.weighted_minkowski;
            min_wm = min_wm.min(-wm.residual);
            t.expect(wm.verdict.holds(), || format!("{modes:?}: weighted Minkowski {} > {} at t = {}", wm.lhs, wm.rhs, rep.t));
            t.expect((wm.tolerance_used - 1e-6 * rep.area_floor.lhs).abs() <= 1e-18, || "weighted Minkowski tolerance".into());
        }
        let a = &run.trace.min_alignment;
        let half = a.len() / 2;
        for k in half..a.len() - 1 {
            let rise = a[k + 1] - a[k];
            min_rise = min_rise.min(rise);
            t.expect(rise >= -1e-12, || format!("{modes:?}: alignment drops by {:e} at t = {}", -rise, run.trace.times[k + 1]));
        }
    }
    Ok(format!(
        "min area - 4π {min_area:.3e}, min weighted-Minkowski slack {min_wm:.2e}, min late alignment step {min_rise:.1e}"
    ))
}

fn criterion_9(t: &mut Tally) -> Res<String> {
    let grid = full(64);
    let (mut runs, mut alarms) = (0, 0);
    let (mut worst_res, mut worst_def): (f64, f64) = (0.0, 0.0);
    for (i, spec) in [sch(3, 1.0), dss(0.002), rn(0.25)].iter().enumerate() {
        let w = make_model(spec)?;
        let base = slice_at(&w, grid.clone(), 2.5)?;
        let corpus = CorpusSpec { runs: 8, seed: 900 + i as u64, ..CorpusSpec::default() };
        for modes in random_perturbations(&corpus, GridMode::Full) {
            let res = find_cmc(&base.perturb(&modes)?, CMC_TOL, 2000)?;
            runs += 1;
            let label = format!("{} {modes:?}", spec.describe());
            t.expect(res.converged, || format!("{label}: no convergence ({:?})", res.reason));
            if !res.converged {
                continue;
            }
            worst_res = worst_res.max(res.cmc_residual);
            worst_def = worst_def.max(res.umbilicity_deficit);
            t.expect(res.cmc_residual < 1e-7, || format!("{label}: residual {:e}", res.cmc_residual));
            t.expect(res.umbilicity_deficit < 1e-5, || format!("{label}: deficit {:e}", res.umbilicity_deficit));
            t.expect(res.is_slice, || format!("{label}: not a slice (spread {:e})", res.slice_spread));
            let v = umbilicity_verdict(&res, &w, spec.n)?;
            alarms += usize::from(v.alarm);
            t.expect(!v.alarm, || format!("{label}: rigidity alarm"));
        }
    }
    t.expect(runs >= 20, || format!("only {runs} runs"));

    let euc = make_model(&ModelSpec::new("euclidean", 3))?;
    let base = GraphSurface::slice(&euc, grid.clone(), 1.0)?;
    let corpus = CorpusSpec { runs: 4, seed: 77, ..CorpusSpec::default() };
    for modes in random_perturbations(&corpus, GridMode::Full) {
        let res = find_cmc(&base.perturb(&modes)?, CMC_TOL, 2000)?;
        t.expect(res.converged && res.umbilicity_deficit < 1e-6, || {
            format!("Euclidean control {modes:?}: converged {} deficit {:e}", res.converged, res.umbilicity_deficit)
        });
        if res.converged {
            let v = umbilicity_verdict(&res, &euc, 3)?;
            t.expect(!v.alarm, || format!("Euclidean control {modes:?}: alarm"));
        }
    }
    Ok(format!("{runs} black-hole runs, max residual {worst_res:.1e}, max deficit {worst_def:.1e}, {alarms} alarms; 4 Euclidean controls"))
}

fn criterion_10(t: &mut Tally) -> Res<String> {
    let dir = tmp_dir("c10");
    let cfg = dir.join("flow.toml");
    std::fs::write(
        &cfg,
        "[model]\nfamily = \"schwarzschild\"\nm = 1.0\n\n[grid]\nnlat = 16\nnlon = 32\n\n\
         [surface]\nheight = 2.5\nperturb = [[2, 0, 0.1], [3, 1, 0.04]]\n\n[flow]\ndt = 0.02\nt_end = 1.0\n",
    )?;
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("run{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_warpcmc"))
            .args(["flow", "--config"])
            .arg(&cfg)
            .arg("--output-dir")
            .arg(&out)
            .env_remove("WARPCMC_OUTPUT_DIR")
            .output()?;
        t.expect(status.status.success(), || format!("flow run {k} exited with {:?}", status.status.code()));
        outputs.push(out);
    }
    let mut compared = 0;
    for name in ["flow_trace.csv", "flow_audit.csv", "flow_final.csv"] {
        let a = std::fs::read(outputs[0].join(name))?;
        let b = std::fs::read(outputs[1].join(name))?;
        compared += a.len();
        t.expect(!a.is_empty() && a == b, || format!("{name} differs between identical runs"));
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!("{compared} bytes compared across 3 files"))
}

type Criterion = fn(&mut Tally) -> Res<String>;

fn main() {
    let suite: [(&str, Duration, Criterion); 10] = [
        ("condition suite", Duration::from_secs(5), criterion_1),
        ("curvature identities", Duration::from_secs(2), criterion_2),
        ("static tensor", Duration::from_secs(5), criterion_3),
        ("omega-form equivalence", Duration::from_secs(5), criterion_4),
        ("Minkowski identity", Duration::from_secs(30), criterion_5),
        ("Heintze-Karcher", Duration::from_secs(60), criterion_6),
        ("flow monotonicity", Duration::from_secs(300), criterion_7),
        ("boundary asymptotics", Duration::from_secs(300), criterion_8),
        ("rigidity experiment", Duration::from_secs(900), criterion_9),
        ("determinism", Duration::from_secs(300), criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in suite.iter().enumerate() {
        let mut tally = Tally::default();
        let start = Instant::now();
        let summary = run(&mut tally);
        let elapsed = start.elapsed();
        let mut problems = tally.failures;
        let summary = match summary {
            Ok(s) => s,
            Err(e) => {
                problems.push(format!("error: {e}"));
                String::from("aborted")
            }
        };
        if elapsed > *budget {
            problems.push(format!("runtime {:.1} s over budget {} s", elapsed.as_secs_f64(), budget.as_secs()));
        }
        let verdict = if problems.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {summary} [{} checks, {:.2} s]",
            i + 1,
            tally.checks,
            elapsed.as_secs_f64()
        );
        for p in problems.iter().take(10) {
            println!("    {p}");
        }
        if problems.len() > 10 {
            println!("    ... {} more", problems.len() - 10);
        }
        failed += usize::from(!problems.is_empty());
    }
    println!("acceptance: {} of {} criteria passed", suite.len() - failed, suite.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
