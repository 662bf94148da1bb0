//! Constant-mean-curvature graphs by volume-preserving mean curvature flow, and the
//! umbilicity verdict on converged surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::TOL_CONDITION;
use crate::error::{GeomError, Result};
use crate::geometry::GeometryReport;
use crate::sphere::GridMode;
use crate::surface::{GraphSurface, Mode};
use crate::warping::{Variant, WarpingFunction};

pub const CMC_TOL: f64 = 1e-7;
/// `slice_tol = SLICE_TOL_FACTOR · r̄`.
pub const SLICE_TOL_FACTOR: f64 = 1e-5;
/// Perturbation amplitudes are capped at this fraction of the mean radius.
pub const AMPLITUDE_CAP: f64 = 0.1;
/// Umbilicity threshold used by the verdict.
pub const DEFICIT_TOL: f64 = 1e-5;
/// Flow step in units of `h(ρ̄)²`.
pub const DT_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmcOptions {
    pub cmc_tol: f64,
    pub max_iter: usize,
    pub dt_factor: f64,
}

impl Default for CmcOptions {
    fn default() -> Self {
        Self { cmc_tol: CMC_TOL, max_iter: 2000, dt_factor: DT_FACTOR }
    }
}

#[derive(Debug, Clone)]
pub struct CmcResult {
    pub surface: GraphSurface,
    pub mean_h: f64,
    /// `max |H − H̄|`.
    pub cmc_residual: f64,
    pub umbilicity_deficit: f64,
    pub is_slice: bool,
    /// `max |ρ − ρ̄|`.
    pub slice_spread: f64,
    pub slice_tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub reason: Option<String>,
    pub residual_history: Vec<f64>,
    /// Largest relative change of `∫_Ω f dvol` seen along the flow.
    pub volume_drift: f64,
    /// Accumulated flow time.
    pub flow_time: f64,
}

fn area_mean(g: &GeometryReport) -> f64 {
    g.integrate(&g.mean_curvature) / g.total_area
}

fn residual(g: &GeometryReport, mean: f64) -> f64 {
    g.mean_curvature.iter().map(|h| (h - mean).abs()).fold(0.0, f64::max)
}

/// Shifts `ρ` by a constant so that the enclosed weighted volume equals `target`.
fn restore_volume(surface: &GraphSurface, rho: &mut [f64], target: f64) {
    let w = surface.ambient();
    let grid = surface.grid();
    let n = w.dim() as i32;
    let h0 = w.jet(0.0).h.powi(n);
    for _ in 0..8 {
        let mut vol = Vec::with_capacity(rho.len());
        let mut dvol = Vec::with_capacity(rho.len());
        for &r in rho.iter() {
            if !(r > 0.0 && r < w.r_bar()) {
                return;
            }
            let j = w.jet(r);
            vol.push((j.h.powi(n) - h0) / n as f64);
            dvol.push(j.h.powi(n - 1) * j.dh);
        }
        let err = grid.integrate(&vol) - target;
        let c = -err / grid.integrate(&dvol);
        for r in rho.iter_mut() {
            *r += c;
        }
        if err.abs() <= 1e-15 * target.abs() {
            break;
        }
    }
}

/// Linearization offset `|II|² + Ric(ν,ν)` of a slice at radius `r`.
fn stability_potential(w: &WarpingFunction, r: f64) -> f64 {
    let j = w.jet(r);
    let n = w.dim() as f64;
    (n - 1.0) * (j.dh * j.dh - j.d2h * j.h) / (j.h * j.h)
}

pub fn find_cmc(initial: &GraphSurface, cmc_tol: f64, max_iter: usize) -> Result<CmcResult> {
    find_cmc_with(initial, &CmcOptions { cmc_tol, max_iter, ..CmcOptions::default() })
}

/// Volume-preserving mean curvature flow `∂ρ/∂t = (H̄ − H)/⟨∂r, ν⟩`, with each
/// spherical-harmonic degree `l ≥ 1` of the update damped by `1 + dt (λ_l − μ)`,
/// where `λ_l = l(l+n-2)/h²` and `μ = |II|² + Ric(ν,ν)` of the slice at the mean radius.
pub fn find_cmc_with(initial: &GraphSurface, opts: &CmcOptions) -> Result<CmcResult> {
    if !(opts.cmc_tol > 0.0) || !(opts.dt_factor > 0.0) {
        return Err(GeomError::Parameter { family: "cmc".into(), bound: "cmc_tol > 0 and dt_factor > 0".into() });
    }
    let w = initial.ambient().clone();
    let grid = initial.grid().clone();
    let n = w.dim();
    let slice_tol = SLICE_TOL_FACTOR * w.r_bar();
    let target = initial.enclosed_weighted_volume();
    let mut surface = initial.clone();
    let mut g = surface.geometry()?;
    let mut mean = area_mean(&g);
    let mut res = residual(&g, mean);
    let mut history = vec![res];
    let mut iterations = 0;
    let mut converged = false;
    let mut reason = None;
    let mut volume_drift: f64 = 0.0;
    let mut flow_time = 0.0;
    while opts.max_iter > 0 {
        if res < opts.cmc_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            reason = Some(format!("no convergence after {iterations} iterations (residual {res:e})"));
            break;
        }
        let rbar = surface.mean_rho();
        let hb = w.jet(rbar).h;
        let dt = opts.dt_factor * hb * hb;
        let mu = stability_potential(&w, rbar);
        let speed: Vec<f64> = (0..g.len()).map(|k| (mean - g.mean_curvature[k]) / g.normal_r[k]).collect();
        let nn = n as f64;
        let damped = grid.spectral_filter(&speed, |l| {
            if l == 0 {
                1.0
            } else {
                let lam = (l as f64) * (l as f64 + nn - 2.0) / (hb * hb);
                1.0 / (1.0 + dt * (lam - mu).max(0.0))
            }
        });
        let mut rho: Vec<f64> = surface.rho().iter().zip(&damped).map(|(r, v)| r + dt * v).collect();
        restore_volume(&surface, &mut rho, target);
        iterations += 1;
        flow_time += dt;
        let next = GraphSurface::new(grid.clone(), w.clone(), rho).and_then(|s| {
            let g = s.geometry()?;
            Ok((s, g))
        });
        match next {
            Ok((s, gn)) => {
                surface = s;
                g = gn;
            }
            Err(e) => {
                reason = Some(format!("graph breakdown: {e}"));
                break;
            }
        }
        let v = surface.enclosed_weighted_volume();
        volume_drift = volume_drift.max(((v - target) / target).abs());
        mean = area_mean(&g);
        res = residual(&g, mean);
        if !res.is_finite() {
            reason = Some("non-finite mean curvature".into());
            break;
        }
        history.push(res);
    }
    if opts.max_iter == 0 {
        reason = Some("max_iter = 0".into());
    }
    let rbar = surface.mean_rho();
    let slice_spread = surface.rho().iter().map(|r| (r - rbar).abs()).fold(0.0, f64::max);
    Ok(CmcResult {
        mean_h: mean,
        cmc_residual: res,
        umbilicity_deficit: g.umbilicity_deficit,
        is_slice: slice_spread < slice_tol,
        slice_spread,
        slice_tol,
        iterations,
        converged,
        reason,
        residual_history: history,
        volume_drift,
        flow_time,
        surface,
    })
}

/// Largest admissible amplitude of a perturbation of the slice at `r0`.
pub fn amplitude_cap(r0: f64) -> f64 {
    AMPLITUDE_CAP * r0
}

#[derive(Debug, Clone, Serialize)]
pub struct UmbilicityVerdict {
    pub deficit: f64,
    pub is_slice: bool,
    pub mean_radius: f64,
    /// (H4) margin at the mean radius; for the ball variant `|·|`, which vanishes in flat space.
    pub h4_margin: f64,
    /// Radial minus tangential Ricci eigenvalue at the mean radius.
    pub ricci_gap: f64,
    /// Umbilic, (H4) strictly positive, yet not a slice.
    pub alarm: bool,
}

impl UmbilicityVerdict {
    /// Assembles a verdict and raises the alarm on the combination ruled out by rigidity.
    pub fn from_parts(deficit: f64, is_slice: bool, mean_radius: f64, h4_margin: f64, ricci_gap: f64) -> Self {
        let alarm = deficit < DEFICIT_TOL && h4_margin > TOL_CONDITION && !is_slice;
        Self { deficit, is_slice, mean_radius, h4_margin, ricci_gap, alarm }
    }
}

pub fn umbilicity_verdict(result: &CmcResult, ambient: &WarpingFunction, n: usize) -> Result<UmbilicityVerdict> {
    if !result.converged {
        return Err(GeomError::InvalidArgument("the verdict needs a converged CMC result".into()));
    }
    let r = result.surface.mean_rho();
    let gap = ambient.ricci_gap(r)?;
    let h4_margin = match ambient.variant() {
        Variant::Boundary => gap,
        Variant::Ball => gap.abs(),
    };
    let (radial, tangential) = ambient.ricci_split(r, n)?;
    Ok(UmbilicityVerdict::from_parts(result.umbilicity_deficit, result.is_slice, r, h4_margin, radial - tangential))
}

/// Degree proxy available for perturbations on the given grid mode.
pub fn supports_order(mode: GridMode, m: i64) -> bool {
    mode == GridMode::Full || m == 0
}

/// A reproducible batch of random perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub runs: usize,
    pub seed: u64,
    pub max_degree: usize,
    /// Largest absolute amplitude of a single run (sum over its modes).
    pub amplitude: f64,
    pub modes_per_run: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self { runs: 20, seed: 20240601, max_degree: 4, amplitude: 0.1, modes_per_run: 3 }
    }
}

/// Draws `spec.runs` perturbation lists of degrees `1..=max_degree`; axisymmetric
/// grids only receive `m = 0` modes.
pub fn random_perturbations(spec: &CorpusSpec, mode: GridMode) -> Vec<Vec<Mode>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.runs)
        .map(|_| {
            let count = rng.gen_range(1..=spec.modes_per_run.max(1));
            let share = spec.amplitude / count as f64;
            (0..count)
                .map(|_| {
                    let l = rng.gen_range(1..=spec.max_degree.max(1));
                    let m = match mode {
                        GridMode::Full => rng.gen_range(-(l as i64)..=l as i64),
                        GridMode::Axisymmetric => 0,
                    };
                    let a = share * rng.gen_range(-1.0..=1.0);
                    (l, m, a)
                })
                .collect()
        })
        .collect()
}
