//! Structure-condition checks, the r₁ radius and the scalar-curvature extremum scan.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::warping::{check_dim, Kind, Variant, WarpingFunction};

/// Absolute tolerance applied to every condition margin.
pub const TOL_CONDITION: f64 = 1e-9;

/// Which family of hypotheses to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionSet {
    /// (H1)-(H4): boundary variant, general `ρ`.
    H,
    /// (H1')-(H4'): ball variant, `ρ = 1`.
    Hprime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    H1,
    H2,
    H3,
    H4,
}

impl Condition {
    pub fn label(self, set: ConditionSet) -> &'static str {
        match (self, set) {
            (Condition::H1, ConditionSet::H) => "H1",
            (Condition::H2, ConditionSet::H) => "H2",
            (Condition::H3, ConditionSet::H) => "H3",
            (Condition::H4, ConditionSet::H) => "H4",
            (Condition::H1, ConditionSet::Hprime) => "H1'",
            (Condition::H2, ConditionSet::Hprime) => "H2'",
            (Condition::H3, ConditionSet::Hprime) => "H3'",
            (Condition::H4, ConditionSet::Hprime) => "H4'",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub condition: Condition,
    pub label: &'static str,
    /// Signed margins on the report grid (a single value at `r = 0` for H1).
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub worst_radius: f64,
    pub verdict: bool,
    /// Strict conditions need `min_margin > tol`; weak ones `min_margin > -tol`.
    pub strict: bool,
    /// Margin identically zero on the grid.
    pub degenerate: bool,
    /// Part of the hypotheses needed for umbilicity; H4 only upgrades the conclusion.
    pub required: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub set: ConditionSet,
    pub dim: usize,
    pub grid: Vec<f64>,
    pub entries: Vec<ConditionEntry>,
    pub tolerance: f64,
    pub degraded_accuracy: bool,
    /// Working bound when the domain was truncated.
    pub truncated_at: Option<f64>,
}

impl ConditionReport {
    pub fn entry(&self, c: Condition) -> &ConditionEntry {
        self.entries.iter().find(|e| e.condition == c).expect("all conditions are evaluated")
    }

    pub fn verdict(&self, c: Condition) -> bool {
        self.entry(c).verdict
    }

    /// True when every required condition passes.
    pub fn required_pass(&self) -> bool {
        self.entries.iter().filter(|e| e.required).all(|e| e.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict)
    }

    /// Human-readable note for a degenerate H4-type margin.
    pub fn rigidity_note(&self) -> Option<&'static str> {
        let e = self.entry(Condition::H4);
        e.degenerate
            .then_some("fails strict positivity, rigidity conclusion weakens to umbilic-only")
    }
}

/// Chebyshev points of the first kind mapped to `(0, r_bar)`.
pub fn chebyshev_grid(r_bar: f64, size: usize) -> Vec<f64> {
    (0..size)
        .map(|i| {
            let t = std::f64::consts::PI * (i as f64 + 0.5) / size as f64;
            0.5 * r_bar * (1.0 - t.cos())
        })
        .collect()
}

fn entry(
    condition: Condition,
    set: ConditionSet,
    grid: &[f64],
    margins: Vec<f64>,
    strict: bool,
    required: bool,
    tol: f64,
) -> ConditionEntry {
    let (mut worst, mut min) = (0usize, f64::INFINITY);
    for (i, &m) in margins.iter().enumerate() {
        if m < min || m.is_nan() {
            min = m;
            worst = i;
        }
    }
    let verdict = if strict { min > tol } else { min > -tol };
    let degenerate = margins.iter().all(|m| m.abs() <= tol);
    ConditionEntry {
        condition,
        label: condition.label(set),
        worst_radius: grid.get(worst).copied().unwrap_or(0.0),
        margins,
        min_margin: min,
        verdict: verdict && !min.is_nan(),
        strict,
        degenerate,
        required,
    }
}

/// Evaluates all four conditions of the chosen set on a Chebyshev grid of `grid_size` radii.
pub fn check_conditions(
    w: &WarpingFunction,
    n: usize,
    set: ConditionSet,
    grid_size: usize,
) -> Result<ConditionReport> {
    check_dim(n)?;
    if grid_size < 16 {
        return Err(GeomError::InvalidArgument(format!("grid_size = {grid_size} must be at least 16")));
    }
    let tol = TOL_CONDITION;
    let grid = chebyshev_grid(w.r_bar(), grid_size);
    let rho = match set {
        ConditionSet::H => w.rho(),
        ConditionSet::Hprime => 1.0,
    };

    let j0 = w.jet(0.0);
    let h1 = match set {
        ConditionSet::H => {
            if j0.dh.abs() <= tol && j0.h > 0.0 {
                j0.d2h
            } else {
                -j0.dh.abs().max(-j0.h)
            }
        }
        ConditionSet::Hprime => {
            // h = r φ(r²) with φ(0) = 1 means h(0) = 0, h'(0) = 1, h''(0) = 0.
            -j0.h.abs().max((j0.dh - 1.0).abs()).max(j0.d2h.abs())
        }
    };
    let h1_tol = if w.kind() == Kind::Tabulated { 1e-6 } else { tol };
    let mut e1 = entry(Condition::H1, set, &[0.0], vec![h1], set == ConditionSet::H, true, tol);
    if set == ConditionSet::Hprime {
        e1.verdict = h1 > -h1_tol;
    }

    let mut h2 = Vec::with_capacity(grid_size);
    let mut h3 = Vec::with_capacity(grid_size);
    let mut h4 = Vec::with_capacity(grid_size);
    for &r in &grid {
        let j = w.jet(r);
        h2.push(j.dh);
        h3.push(w.h3_quantity_with_rho(r, n, rho)?.1);
        let deficit = w.deficit_with_rho(r, rho);
        let gap = j.d2h / j.h + deficit / (j.h * j.h);
        h4.push(match set {
            ConditionSet::H => gap,
            ConditionSet::Hprime => gap.abs(),
        });
    }
    let entries = vec![
        e1,
        entry(Condition::H2, set, &grid, h2, true, true, tol),
        entry(Condition::H3, set, &grid, h3, false, true, tol),
        entry(Condition::H4, set, &grid, h4, true, false, tol),
    ];
    Ok(ConditionReport {
        set,
        dim: n,
        degraded_accuracy: w.kind() == Kind::Tabulated && !derivatives_consistent(w),
        truncated_at: w.is_truncated().then_some(w.r_bar()),
        grid,
        entries,
        tolerance: tol,
    })
}

/// Compares the `h'` evaluator with centered differences of `h` across the domain.
fn derivatives_consistent(w: &WarpingFunction) -> bool {
    let r_bar = w.r_bar();
    let step = 1e-4 * r_bar;
    let samples = 257;
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for i in 1..samples {
        let r = r_bar * i as f64 / samples as f64;
        if r + step >= r_bar {
            break;
        }
        let fd = (w.jet(r + step).h - w.jet(r - step).h) / (2.0 * step);
        let d = w.jet(r).dh;
        scale = scale.max(d.abs());
        worst = worst.max((fd - d).abs());
    }
    worst <= 1e-6 * scale.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumType {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub radius: f64,
    pub kind: ExtremumType,
    /// Radial and tangential Ricci eigenvalues differ here.
    pub ricci_distinct: bool,
}

/// Interior strict local extrema of `W(r)`, located from sign changes of `W'`.
pub fn scan_h3_extrema(w: &WarpingFunction, n: usize, grid_size: usize) -> Result<Vec<Extremum>> {
    check_dim(n)?;
    if grid_size < 64 {
        return Err(GeomError::InvalidArgument(format!("grid_size = {grid_size} must be at least 64")));
    }
    let r_bar = w.r_bar();
    let radii: Vec<f64> = (0..grid_size).map(|i| r_bar * (i as f64 + 1.0) / (grid_size as f64 + 1.0)).collect();
    let dw: Vec<f64> = radii.iter().map(|&r| w.h3_quantity(r, n).map(|v| v.1)).collect::<Result<_>>()?;
    let scale = dw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let noise = 1e-9 * (1.0 + scale);
    let sign = |v: f64| if v > noise { 1 } else if v < -noise { -1 } else { 0 };

    let mut out = Vec::new();
    let mut last: Option<(usize, i32)> = None;
    for (i, &v) in dw.iter().enumerate() {
        let s = sign(v);
        if s == 0 {
            continue;
        }
        if let Some((k, prev)) = last {
            if prev != s {
                let (mut a, mut b) = (radii[k], radii[i]);
                while b - a > 1e-8 * r_bar {
                    let m = 0.5 * (a + b);
                    let sm = w.h3_quantity(m, n)?.1;
                    if (sm > 0.0) == (prev > 0) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let radius = 0.5 * (a + b);
                let (rad, tan) = w.ricci_split(radius, n)?;
                out.push(Extremum {
                    radius,
                    kind: if prev > 0 { ExtremumType::Max } else { ExtremumType::Min },
                    ricci_distinct: (rad - tan).abs() > 1e-9,
                });
            }
        }
        last = Some((i, s));
    }
    Ok(out)
}

/// The largest `r₁ <= r_bar` with `h'' > 0` on `[0, r₁]`.
pub fn compute_r1(w: &WarpingFunction) -> Result<f64> {
    let d0 = w.jet(0.0).d2h;
    if w.variant() != Variant::Boundary || !(d0 > 0.0) {
        return Err(GeomError::NotApplicable(format!(
            "r1 needs the boundary variant with h''(0) > 0 (got h''(0) = {d0})"
        )));
    }
    let r_bar = w.r_bar();
    let samples = 4096;
    let mut prev = 0.0;
    for i in 1..samples {
        let r = r_bar * i as f64 / samples as f64;
        if w.jet(r).d2h <= 0.0 {
            let (mut a, mut b) = (prev, r);
            while b - a > 1e-13 * r_bar {
                let m = 0.5 * (a + b);
                if w.jet(m).d2h > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        prev = r;
    }
    Ok(r_bar)
}

impl WarpingFunction {
    pub(crate) fn deficit_with_rho(&self, r: f64, rho: f64) -> f64 {
        self.profile().rho_deficit(r, rho)
    }

    fn h3_quantity_with_rho(&self, r: f64, n: usize, rho: f64) -> Result<(f64, f64)> {
        if rho == self.rho() {
            self.h3_quantity(r, n)
        } else {
            let shifted = self.clone().with_rho(rho);
            shifted.h3_quantity(r, n)
        }
    }
}
