//! Minkowski formulas and Heintze-Karcher inequalities evaluated on graph surfaces.

use serde::Serialize;

use crate::conditions::compute_r1;
use crate::error::{GeomError, Result};
use crate::geometry::GeometryReport;
use crate::surface::GraphSurface;
use crate::warping::Variant;

/// Relative tolerance for the Minkowski identity.
pub const TOL_MINKOWSKI: f64 = 1e-8;
/// Relative tolerance for the weighted Minkowski inequality.
pub const TOL_WEIGHTED: f64 = 1e-8;
/// Relative tolerance for the Heintze-Karcher inequality (scaled by the left side).
pub const TOL_HK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equality,
    InequalitySatisfied,
    Violated,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Equality => "equality",
            Verdict::InequalitySatisfied => "inequality-satisfied",
            Verdict::Violated => "violated",
        }
    }

    pub fn holds(self) -> bool {
        self != Verdict::Violated
    }
}

/// Whether a check is an identity (`lhs = rhs`) or one-sided (`lhs ≥ rhs` / `lhs ≤ rhs`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Identity,
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub expectation: Expectation,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub verdict: Verdict,
    pub tolerance_used: f64,
}

impl IdentityReport {
    /// Builds a report; `tolerance` is absolute.
    pub fn new(name: &str, expectation: Expectation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs());
        let relative_residual = if scale > 0.0 { residual / scale } else { residual };
        let verdict = if residual.abs() <= tolerance {
            Verdict::Equality
        } else {
            match expectation {
                Expectation::Identity => Verdict::Violated,
                Expectation::AtLeast if residual > 0.0 => Verdict::InequalitySatisfied,
                Expectation::AtMost if residual < 0.0 => Verdict::InequalitySatisfied,
                _ => Verdict::Violated,
            }
        };
        Self { name: name.to_string(), expectation, lhs, rhs, residual, relative_residual, verdict, tolerance_used: tolerance }
    }
}

/// `∫ H⟨X,ν⟩ dμ = (n-1) ∫ f dμ`.
pub fn minkowski_check(surface: &GraphSurface) -> Result<IdentityReport> {
    let g = surface.geometry()?;
    Ok(minkowski_from_report(&g))
}

pub fn minkowski_from_report(g: &GeometryReport) -> IdentityReport {
    let lhs_field: Vec<f64> = g.mean_curvature.iter().zip(&g.x_dot_nu).map(|(h, x)| h * x).collect();
    let lhs = g.integrate(&lhs_field);
    let rhs = (g.dim as f64 - 1.0) * g.integrate(&g.f);
    let tol = TOL_MINKOWSKI * lhs.abs().max(rhs.abs());
    IdentityReport::new("minkowski", Expectation::Identity, lhs, rhs, tol)
}

/// `∫ (H/f)⟨X,ν⟩ dμ ≤ (n-1) μ(Σ)` for surfaces inside `N × (0, r₁)`.
pub fn minkowski_weighted_check(surface: &GraphSurface) -> Result<IdentityReport> {
    let r1 = compute_r1(surface.ambient())?;
    let top = surface.max_rho();
    if top >= r1 {
        return Err(GeomError::Hypothesis(format!(
            "surface reaches r = {top}, outside the region below r1 = {r1}"
        )));
    }
    let g = surface.geometry()?;
    Ok(weighted_from_report(&g, None))
}

/// Weighted Minkowski on a report, optionally restricted to a node mask.
pub fn weighted_from_report(g: &GeometryReport, mask: Option<&[bool]>) -> IdentityReport {
    let field: Vec<f64> = (0..g.len()).map(|k| g.mean_curvature[k] / g.f[k] * g.x_dot_nu[k]).collect();
    let ones = vec![1.0; g.len()];
    let (lhs, area) = match mask {
        Some(m) => (g.integrate_masked(&field, m), g.integrate_masked(&ones, m)),
        None => (g.integrate(&field), g.total_area),
    };
    let rhs = (g.dim as f64 - 1.0) * area;
    let tol = TOL_WEIGHTED * lhs.abs().max(rhs.abs());
    IdentityReport::new("minkowski-weighted", Expectation::AtMost, lhs, rhs, tol)
}

/// `(n-1) ∫ f/H dμ ≥ n ∫_Ω f dvol`, plus `h(0)ⁿ vol(N)` when the ambient has an inner boundary.
pub fn hk_check(surface: &GraphSurface) -> Result<IdentityReport> {
    let g = surface.geometry()?;
    if g.min_h <= 0.0 {
        return Err(GeomError::Hypothesis(format!("mean curvature is not positive (min H = {:e})", g.min_h)));
    }
    let n = surface.dim() as f64;
    let field: Vec<f64> = g.f.iter().zip(&g.mean_curvature).map(|(f, h)| f / h).collect();
    let lhs = (n - 1.0) * g.integrate(&field);
    let mut rhs = n * surface.enclosed_weighted_volume();
    if surface.ambient().variant() == Variant::Boundary {
        rhs += boundary_term(surface);
    }
    let tol = TOL_HK * lhs.abs();
    Ok(IdentityReport::new("heintze-karcher", Expectation::AtLeast, lhs, rhs, tol))
}

/// `h(0)ⁿ vol(N)`.
pub fn boundary_term(surface: &GraphSurface) -> f64 {
    let w = surface.ambient();
    w.jet(0.0).h.powi(w.dim() as i32) * surface.grid().volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelSpec};
    use crate::sphere::SphereGrid;
    use crate::surface::slice_surface;
    use crate::warping::WarpingFunction;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn verdict_rules() {
        assert_eq!(IdentityReport::new("x", Expectation::AtLeast, 2.0, 1.0, 0.1).verdict, Verdict::InequalitySatisfied);
        assert_eq!(IdentityReport::new("x", Expectation::AtLeast, 1.0, 2.0, 0.1).verdict, Verdict::Violated);
        assert_eq!(IdentityReport::new("x", Expectation::AtMost, 1.0, 2.0, 0.1).verdict, Verdict::InequalitySatisfied);
        assert_eq!(IdentityReport::new("x", Expectation::Identity, 1.0, 1.05, 0.1).verdict, Verdict::Equality);
        assert_eq!(IdentityReport::new("x", Expectation::Identity, 1.0, 2.0, 0.1).verdict, Verdict::Violated);
    }

    #[test]
    fn euclidean_slice_hk_equality() {
        let w = WarpingFunction::euclidean(3, 4.0).unwrap();
        let grid = Arc::new(SphereGrid::full(12, 24).unwrap());
        let s = slice_surface(&w, grid, 1.5).unwrap();
        let hk = hk_check(&s).unwrap();
        assert_relative_eq!(hk.lhs, 4.0 * PI * 1.5f64.powi(3), max_relative = 1e-12);
        assert_eq!(hk.verdict, Verdict::Equality);
    }

    #[test]
    fn schwarzschild_slice_boundary_term() {
        let w = make_model(&ModelSpec::new("schwarzschild", 3).with_m(1.0)).unwrap();
        let grid = Arc::new(SphereGrid::full(12, 24).unwrap());
        let r = w.radius_for_height(2.0).unwrap();
        let s = slice_surface(&w, grid, r).unwrap();
        let hk = hk_check(&s).unwrap();
        assert_relative_eq!(hk.lhs, 32.0 * PI, max_relative = 1e-9);
        assert_relative_eq!(hk.rhs, 32.0 * PI, max_relative = 1e-9);
        let m = minkowski_check(&s).unwrap();
        assert!(m.relative_residual.abs() < 1e-12);
        let wm = minkowski_weighted_check(&s).unwrap();
        assert_eq!(wm.verdict, Verdict::Equality);
    }

    #[test]
    fn negative_mean_curvature_is_a_hypothesis_error() {
        let w = WarpingFunction::euclidean(3, 4.0).unwrap();
        let grid = Arc::new(SphereGrid::full(16, 32).unwrap());
        let s = slice_surface(&w, grid, 1.0).unwrap().perturb(&[(6, 0, 0.15)]).unwrap();
        assert!(s.geometry().unwrap().min_h < 0.0);
        assert!(matches!(hk_check(&s), Err(GeomError::Hypothesis(_))));
    }
}
