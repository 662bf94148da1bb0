//! Closed hypersurfaces given as radial graphs `r = ρ(θ)` over the parameter sphere.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::geometry::{axi_geometry, full_geometry, DirectionJet, GeometryReport, Orientation};
use crate::sphere::{GridMode, Parity, SphereGrid};
use crate::warping::WarpingFunction;

/// A perturbation mode `(degree l, order m, amplitude)`.
pub type Mode = (usize, i64, f64);

#[derive(Debug, Clone)]
pub struct GraphSurface {
    grid: Arc<SphereGrid>,
    rho: Vec<f64>,
    ambient: WarpingFunction,
}

impl GraphSurface {
    /// Validates the radial values; in full mode they are truncated to the grid's band.
    pub fn new(grid: Arc<SphereGrid>, ambient: WarpingFunction, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(GeomError::InvalidArgument(format!(
                "radial field has {} values for {} grid nodes",
                rho.len(),
                grid.len()
            )));
        }
        if grid.n() != ambient.dim() {
            return Err(GeomError::InvalidArgument(format!(
                "grid dimension {} differs from ambient dimension {}",
                grid.n(),
                ambient.dim()
            )));
        }
        let rho = if grid.mode() == GridMode::Full && rho.iter().any(|v| *v != rho[0]) {
            grid.band_limit(&rho)
        } else {
            rho
        };
        check_range(&rho, ambient.r_bar())?;
        Ok(Self { grid, rho, ambient })
    }

    pub fn from_fn(grid: Arc<SphereGrid>, ambient: WarpingFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let rho = (0..grid.len()).map(|k| {
            let (t, p) = grid.node(k);
            f(t, p)
        });
        let rho = rho.collect();
        Self::new(grid, ambient, rho)
    }

    /// A graph specified by the values of `h` (the area radius `s` for ω-families).
    pub fn from_heights(grid: Arc<SphereGrid>, ambient: WarpingFunction, heights: &[f64]) -> Result<Self> {
        let rho = heights.iter().map(|&s| ambient.radius_for_height(s)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, ambient, rho)
    }

    pub fn slice(ambient: &WarpingFunction, grid: Arc<SphereGrid>, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < ambient.r_bar()) {
            return Err(GeomError::Domain { r, r_bar: ambient.r_bar() });
        }
        let n = grid.len();
        Self::new(grid, ambient.clone(), vec![r; n])
    }

    /// Adds `Σ a Y_lm` to the radial function.
    pub fn perturb(&self, modes: &[Mode]) -> Result<Self> {
        let mut rho = self.rho.clone();
        for &(l, m, a) in modes {
            let y = self.grid.mode_values(l, m)?;
            for (r, v) in rho.iter_mut().zip(y) {
                *r += a * v;
            }
        }
        Self::new(self.grid.clone(), self.ambient.clone(), rho)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn ambient(&self) -> &WarpingFunction {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Parameter-sphere average of `ρ`.
    pub fn mean_rho(&self) -> f64 {
        self.grid.integrate(&self.rho) / self.grid.volume()
    }

    pub fn geometry(&self) -> Result<GeometryReport> {
        let report = self.geometry_unchecked()?;
        if let Some(&k) = report.degenerate_nodes().first() {
            return Err(GeomError::Geometry(format!(
                "degenerate induced metric at node {k} (area element {:e})",
                report.area_element[k]
            )));
        }
        Ok(report)
    }

    pub(crate) fn geometry_unchecked(&self) -> Result<GeometryReport> {
        match self.grid.mode() {
            GridMode::Full => {
                let r = self.grid.derivatives_full(&self.rho)?;
                let dirs: Vec<DirectionJet> = (0..self.grid.len())
                    .map(|k| {
                        let (t, p) = self.grid.node(k);
                        DirectionJet::identity(t, p)
                    })
                    .collect();
                Ok(full_geometry(&self.grid, &self.ambient, &r, &dirs, Orientation::Outward))
            }
            GridMode::Axisymmetric => {
                let (r1, r2) = self.grid.derivatives_axi(&self.rho, Parity::Even)?;
                let theta = self.grid.colatitudes();
                let ones = vec![1.0; theta.len()];
                let zeros = vec![0.0; theta.len()];
                Ok(axi_geometry(
                    &self.grid,
                    &self.ambient,
                    [&self.rho, &r1, &r2],
                    [theta, &ones, &zeros],
                    Orientation::Outward,
                ))
            }
        }
    }

    /// `∫_Σ field dμ`.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        if field.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidArgument("field has non-finite values".into()));
        }
        Ok(self.geometry()?.integrate(field))
    }

    /// `∫_Ω f dvol` for the region between the inner end and the graph, via the
    /// radial antiderivative `h(ρ)ⁿ/n` of `h' hⁿ⁻¹`.
    pub fn enclosed_weighted_volume(&self) -> f64 {
        let n = self.dim() as i32;
        let h0 = self.ambient.jet(0.0).h.powi(n);
        let vals: Vec<f64> = self.rho.iter().map(|&r| (self.ambient.jet(r).h.powi(n) - h0) / n as f64).collect();
        self.grid.integrate(&vals)
    }

    /// Rows `(colatitude, longitude, ρ, H, deficit)` for export.
    pub fn snapshot(&self, report: &GeometryReport) -> Vec<[f64; 5]> {
        (0..self.grid.len())
            .map(|k| {
                let (t, p) = self.grid.node(k);
                [t, p, self.rho[k], report.mean_curvature[k], report.deficit[k]]
            })
            .collect()
    }
}

fn check_range(rho: &[f64], r_bar: f64) -> Result<()> {
    for (k, &r) in rho.iter().enumerate() {
        if !(r > 0.0 && r < r_bar) {
            return Err(GeomError::Geometry(format!(
                "radial value {r} at node {k} leaves the domain (0, {r_bar})"
            )));
        }
    }
    Ok(())
}

pub fn slice_surface(ambient: &WarpingFunction, grid: Arc<SphereGrid>, r: f64) -> Result<GraphSurface> {
    GraphSurface::slice(ambient, grid, r)
}

pub fn perturb_slice(base: &GraphSurface, modes: &[Mode]) -> Result<GraphSurface> {
    base.perturb(modes)
}

pub fn geometry(surface: &GraphSurface) -> Result<GeometryReport> {
    surface.geometry()
}

pub fn integrate(surface: &GraphSurface, field: &[f64]) -> Result<f64> {
    surface.integrate(field)
}

pub fn enclosed_weighted_volume(surface: &GraphSurface) -> f64 {
    surface.enclosed_weighted_volume()
}
