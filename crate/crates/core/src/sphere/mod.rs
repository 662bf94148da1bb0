//! Quadrature grids on the parameter sphere `S^{n-1}` with spectral differentiation.

mod axisym;
mod harmonics;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::quadrature::{legendre, sphere_volume, GaussLegendre};

pub use axisym::Parity;
pub use harmonics::{real_harmonic, AngularDerivatives};

use axisym::AxiSpectral;
use harmonics::FullSpectral;

pub const DEFAULT_NLAT: usize = 64;
pub const DEFAULT_NLON: usize = 128;
pub const DEFAULT_AXI: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    /// Gauss-Legendre latitudes times uniform longitudes on `S²`.
    Full,
    /// Colatitude-only sampling on `S^{n-1}` for rotationally symmetric data.
    Axisymmetric,
}

#[derive(Debug, Clone)]
enum Spectral {
    Full(Arc<FullSpectral>),
    Axi(Arc<AxiSpectral>),
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    mode: GridMode,
    nlat: usize,
    nlon: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    weights: Vec<f64>,
    spectral: Spectral,
}

impl SphereGrid {
    /// Full spectral grid on `S²` (ambient dimension 3).
    pub fn full(nlat: usize, nlon: usize) -> Result<Self> {
        if nlat < 4 || nlon < 8 || nlon % 2 != 0 {
            return Err(GeomError::InvalidArgument(format!(
                "full grid needs nlat >= 4 and even nlon >= 8 (got {nlat} x {nlon})"
            )));
        }
        let gl = GaussLegendre::new(nlat);
        // Latitudes ordered by increasing colatitude.
        let x: Vec<f64> = gl.nodes().iter().rev().copied().collect();
        let wl: Vec<f64> = gl.weights().iter().rev().copied().collect();
        let theta: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let phi: Vec<f64> = (0..nlon).map(|j| 2.0 * PI * j as f64 / nlon as f64).collect();
        let dphi = 2.0 * PI / nlon as f64;
        let mut weights = Vec::with_capacity(nlat * nlon);
        for &w in &wl {
            weights.extend(std::iter::repeat(w * dphi).take(nlon));
        }
        let spectral = Spectral::Full(Arc::new(FullSpectral::new(&x, &wl, nlon)));
        Ok(Self { n: 3, mode: GridMode::Full, nlat, nlon, theta, phi, weights, spectral })
    }

    /// Axisymmetric grid on `S^{n-1}` with `size` colatitude nodes.
    pub fn axisymmetric(n: usize, size: usize) -> Result<Self> {
        if n < 3 || size < 8 {
            return Err(GeomError::InvalidArgument(format!(
                "axisymmetric grid needs n >= 3 and at least 8 nodes (got n = {n}, {size})"
            )));
        }
        let theta = axisym::midpoints(size);
        let weights = axisym::weights(&theta, n);
        let spectral = Spectral::Axi(Arc::new(AxiSpectral::new(size)));
        Ok(Self { n, mode: GridMode::Axisymmetric, nlat: size, nlon: 1, theta, phi: vec![0.0], weights, spectral })
    }

    pub fn default_full() -> Self {
        Self::full(DEFAULT_NLAT, DEFAULT_NLON).expect("default grid is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weights; they sum to `vol(S^{n-1})`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.theta
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.phi
    }

    /// `(colatitude, longitude)` of node `k`.
    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.theta[k / self.nlon], self.phi[k % self.nlon])
    }

    /// Unit vector in `R³` of node `k` (full mode).
    pub fn direction(&self, k: usize) -> [f64; 3] {
        let (t, p) = self.node(k);
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn resolution_label(&self) -> String {
        match self.mode {
            GridMode::Full => format!("full {}x{}", self.nlat, self.nlon),
            GridMode::Axisymmetric => format!("axisymmetric n={} N={}", self.n, self.nlat),
        }
    }

    /// Highest resolved harmonic degree.
    pub fn max_degree(&self) -> usize {
        match &self.spectral {
            Spectral::Full(s) => s.lmax(),
            Spectral::Axi(_) => self.nlat - 1,
        }
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn volume(&self) -> f64 {
        sphere_volume(self.n - 1)
    }

    /// Angular derivatives in full mode (`θ`, `φ` and second order).
    pub fn derivatives_full(&self, f: &[f64]) -> Result<AngularDerivatives> {
        match &self.spectral {
            Spectral::Full(s) => Ok(s.derivatives(f)),
            Spectral::Axi(_) => Err(GeomError::InvalidArgument("full-mode derivatives on an axisymmetric grid".into())),
        }
    }

    /// First and second colatitude derivatives in axisymmetric mode.
    pub fn derivatives_axi(&self, f: &[f64], parity: Parity) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.spectral {
            Spectral::Axi(s) => Ok(s.derivatives(f, parity)),
            Spectral::Full(_) => Err(GeomError::InvalidArgument("axisymmetric derivatives on a full grid".into())),
        }
    }

    /// Truncates a field to the resolved spectral band (full mode); identity otherwise.
    pub fn band_limit(&self, f: &[f64]) -> Vec<f64> {
        match &self.spectral {
            Spectral::Full(s) => s.filter(f, |_| 1.0),
            Spectral::Axi(_) => f.to_vec(),
        }
    }

    /// Multiplies the degree-`l` component of a field by `mult(l)`.
    ///
    /// Axisymmetric grids use the cosine index as a proxy for the degree.
    pub fn spectral_filter(&self, f: &[f64], mult: impl Fn(usize) -> f64) -> Vec<f64> {
        match &self.spectral {
            Spectral::Full(s) => s.filter(f, mult),
            Spectral::Axi(s) => s.cosine_filter(&self.theta, f, mult),
        }
    }

    /// Energy per harmonic degree (full mode only).
    pub fn degree_spectrum(&self, f: &[f64]) -> Option<Vec<f64>> {
        match &self.spectral {
            Spectral::Full(s) => Some(s.degree_spectrum(f)),
            Spectral::Axi(_) => None,
        }
    }

    /// Nodal values of a perturbation mode: real `Y_lm` in full mode,
    /// `√((2l+1)/4π) P_l(cos θ)` in axisymmetric mode (which requires `m = 0`).
    pub fn mode_values(&self, l: usize, m: i64) -> Result<Vec<f64>> {
        match self.mode {
            GridMode::Full => {
                if m.unsigned_abs() as usize > l {
                    return Err(GeomError::InvalidArgument(format!("order {m} exceeds degree {l}")));
                }
                Ok((0..self.len())
                    .map(|k| {
                        let (t, p) = self.node(k);
                        real_harmonic(l, m, t, p)
                    })
                    .collect())
            }
            GridMode::Axisymmetric => {
                if m != 0 {
                    return Err(GeomError::InvalidArgument("axisymmetric grids only carry m = 0 modes".into()));
                }
                let c = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
                Ok(self.theta.iter().map(|t| c * legendre(l, t.cos())).collect())
            }
        }
    }
}
