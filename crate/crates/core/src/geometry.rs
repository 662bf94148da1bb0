//! Extrinsic geometry of parametrized hypersurfaces in `dr² + h(r)² g_{S^{n-1}}`.
//!
//! A hypersurface is a map from the parameter sphere into the ambient space,
//! `u ↦ (r(u), d(u))` with `d` on the unit sphere. Graphs are the case `d(u) = u`.
//! The unit normal is expressed in the orthonormal frame `(∂r, e_ang)` where the
//! angular part is a vector in `R³` (full mode) or along `∂θ / h` (axisymmetric mode).

use rayon::prelude::*;
use serde::Serialize;

use crate::sphere::{AngularDerivatives, GridMode, SphereGrid};
use crate::warping::WarpingFunction;

/// Nodes whose signed area element falls below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub mode: GridMode,
    pub dim: usize,
    /// Radial coordinate of each node.
    pub r: Vec<f64>,
    /// `⟨∂r, ν⟩`.
    pub normal_r: Vec<f64>,
    /// Angular part of `ν` as a vector of the orthonormal frame (physical length).
    pub normal_ang: Vec<[f64; 3]>,
    pub mean_curvature: Vec<f64>,
    /// Second fundamental form in an orthonormal tangent frame, `[II_11, II_12, II_22]`.
    /// In axisymmetric mode the entries are the meridian and rotational principal
    /// curvatures `[κ_1, 0, κ_rot]`, the latter with multiplicity `n-2`.
    pub second_form: Vec<[f64; 3]>,
    /// Signed ratio of the surface area element to the parameter-sphere element.
    pub area_element: Vec<f64>,
    /// Parameter-sphere quadrature weights.
    pub weights: Vec<f64>,
    /// Potential `f = h'(r)` at each node.
    pub f: Vec<f64>,
    /// `⟨X, ν⟩ = h(r) ⟨∂r, ν⟩`.
    pub x_dot_nu: Vec<f64>,
    /// Frobenius norm of the traceless second fundamental form.
    pub deficit: Vec<f64>,
    pub total_area: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub umbilicity_deficit: f64,
}

impl GeometryReport {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `∫_Σ field dμ`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        field
            .iter()
            .zip(&self.area_element)
            .zip(&self.weights)
            .map(|((v, j), w)| v * j * w)
            .sum()
    }

    /// `∫` over the nodes where `mask` is set.
    pub fn integrate_masked(&self, field: &[f64], mask: &[bool]) -> f64 {
        (0..self.len())
            .filter(|&k| mask[k])
            .map(|k| field[k] * self.area_element[k] * self.weights[k])
            .sum()
    }

    /// Nodal `dμ = J w`.
    pub fn measure(&self) -> Vec<f64> {
        self.area_element.iter().zip(&self.weights).map(|(j, w)| j * w).collect()
    }

    /// Trace of the second fundamental form as stored (counts the rotational block `n-2` times).
    pub fn trace_second_form(&self, k: usize) -> f64 {
        let b = self.second_form[k];
        match self.mode {
            GridMode::Full => b[0] + b[2],
            GridMode::Axisymmetric => b[0] + (self.dim as f64 - 2.0) * b[2],
        }
    }

    /// Indices of nodes with a degenerate or inverted area element.
    pub fn degenerate_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| !(self.area_element[k] > DEGENERATE_AREA) || !self.mean_curvature[k].is_finite())
            .collect()
    }

    fn finish(mut self) -> Self {
        self.total_area = self.integrate(&vec![1.0; self.len()]);
        self.min_h = self.mean_curvature.iter().copied().fold(f64::INFINITY, f64::min);
        self.max_h = self.mean_curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.umbilicity_deficit = self.deficit.iter().copied().fold(0.0, f64::max);
        self
    }
}

/// Direction field `d(u)` with its angular derivatives (full mode).
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectionJet {
    pub d: [f64; 3],
    pub t: [f64; 3],
    pub p: [f64; 3],
    pub tt: [f64; 3],
    pub tp: [f64; 3],
    pub pp: [f64; 3],
}

impl DirectionJet {
    /// The identity map `d(θ, φ) = (sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn identity(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            d: [st * cp, st * sp, ct],
            t: [ct * cp, ct * sp, -st],
            p: [-st * sp, st * cp, 0.0],
            tt: [-st * cp, -st * sp, -ct],
            tp: [-ct * sp, ct * cp, 0.0],
            pp: [-st * cp, -st * sp, 0.0],
        }
    }

    /// Assembles jets from spectral derivatives of the three components.
    pub fn from_components(c: &[AngularDerivatives; 3], k: usize) -> Self {
        let pick = |f: fn(&AngularDerivatives) -> &Vec<f64>| [f(&c[0])[k], f(&c[1])[k], f(&c[2])[k]];
        Self {
            d: pick(|a| &a.f),
            t: pick(|a| &a.t),
            p: pick(|a| &a.p),
            tt: pick(|a| &a.tt),
            tp: pick(|a| &a.tp),
            pp: pick(|a| &a.pp),
        }
    }
}

/// How to orient the unit normal.
#[derive(Debug, Clone, Copy)]
pub enum Orientation<'a> {
    /// `⟨∂r, ν⟩ > 0` for graphs; the area element is signed by the parametrization.
    Outward,
    /// `ν` points along `-reference` (frame components `[v_r, v_ang...]`).
    AgainstVelocity(&'a [[f64; 4]]),
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
fn axpy(a: f64, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

/// Orthonormal tangent frame `(u1, u2)` at `d` with `u1 × u2 = d`.
pub fn tangent_frame(d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if d[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let u = axpy(-dot(a, d), d, a);
    let nu = dot(u, u).sqrt();
    let u1 = [u[0] / nu, u[1] / nu, u[2] / nu];
    let u2 = cross(d, u1);
    (u1, u2)
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeGeometry {
    normal_r: f64,
    normal_ang: [f64; 3],
    h_mean: f64,
    ii: [f64; 3],
    area: f64,
    f: f64,
    x_nu: f64,
    deficit: f64,
}

fn full_node(
    ambient: &WarpingFunction,
    theta: f64,
    r: [f64; 6],
    d: &DirectionJet,
    reference: Option<[f64; 4]>,
) -> NodeGeometry {
    let [rv, rt, rp, rtt, rtp, rpp] = r;
    let j = ambient.jet(rv);
    let (h, dh) = (j.h, j.dh);
    let (u1, u2) = tangent_frame(d.d);
    // Tangent vectors in the orthonormal frame (∂r, u1/h, u2/h).
    let pt = [rt, h * dot(d.t, u1), h * dot(d.t, u2)];
    let pp = [rp, h * dot(d.p, u1), h * dot(d.p, u2)];
    let n = cross(pt, pp);
    let nn = dot(n, n).sqrt();
    let sign = match reference {
        None => 1.0,
        Some(v) => {
            let va = [v[1], v[2], v[3]];
            let proj = [v[0], dot(va, u1), dot(va, u2)];
            if dot(n, proj) <= 0.0 {
                1.0
            } else {
                -1.0
            }
        }
    };
    let nu = [sign * n[0] / nn, sign * n[1] / nn, sign * n[2] / nn];
    let nu_ang = axpy(nu[1], u1, [nu[2] * u2[0], nu[2] * u2[1], nu[2] * u2[2]]);

    let g_tt = dot(pt, pt);
    let g_tp = dot(pt, pp);
    let g_pp = dot(pp, pp);
    let det = g_tt * g_pp - g_tp * g_tp;

    let q = dh / h;
    let ii = |rab: f64, da: [f64; 3], db: [f64; 3], dab: [f64; 3], ra: f64, rb: f64| {
        let radial = rab - h * dh * dot(da, db);
        let ang = axpy(q * ra, db, axpy(q * rb, da, dab));
        -(nu[0] * radial + h * dot(nu_ang, ang))
    };
    let b_tt = ii(rtt, d.t, d.t, d.tt, rt, rt);
    let b_tp = ii(rtp, d.t, d.p, d.tp, rt, rp);
    let b_pp = ii(rpp, d.p, d.p, d.pp, rp, rp);

    let a = 1.0 / g_tt.sqrt();
    let c = (det / g_tt).sqrt();
    let e21 = -g_tp / (g_tt * c);
    let e22 = 1.0 / c;
    let o11 = a * a * b_tt;
    let o12 = a * (e21 * b_tt + e22 * b_tp);
    let o22 = e21 * e21 * b_tt + 2.0 * e21 * e22 * b_tp + e22 * e22 * b_pp;
    let hm = o11 + o22;
    let half = 0.5 * (o11 - o22);
    let deficit = (2.0 * (half * half + o12 * o12)).sqrt();
    // Negative once the parametrization folds over relative to the reference direction.
    let area = sign * nn / theta.sin();
    NodeGeometry {
        normal_r: nu[0],
        normal_ang: [nu_ang[0], nu_ang[1], nu_ang[2]],
        h_mean: hm,
        ii: [o11, o12, o22],
        area,
        f: dh,
        x_nu: h * nu[0],
        deficit,
    }
}

/// Full-mode geometry from the radial field and the direction jets.
pub fn full_geometry(
    grid: &SphereGrid,
    ambient: &WarpingFunction,
    r: &AngularDerivatives,
    dirs: &[DirectionJet],
    orientation: Orientation<'_>,
) -> GeometryReport {
    let nodes: Vec<NodeGeometry> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (theta, _) = grid.node(k);
            let reference = match orientation {
                Orientation::Outward => None,
                Orientation::AgainstVelocity(v) => Some(v[k]),
            };
            full_node(ambient, theta, [r.f[k], r.t[k], r.p[k], r.tt[k], r.tp[k], r.pp[k]], &dirs[k], reference)
        })
        .collect();
    assemble(grid, ambient, &r.f, nodes)
}

fn axi_node(
    ambient: &WarpingFunction,
    n: usize,
    u: f64,
    r: [f64; 3],
    th: [f64; 3],
    reference: Option<[f64; 4]>,
) -> NodeGeometry {
    let [rv, r1, r2] = r;
    let [theta, t1, t2] = th;
    let j = ambient.jet(rv);
    let (h, dh) = (j.h, j.dh);
    let speed = (r1 * r1 + h * h * t1 * t1).sqrt();
    // Outward normal in orthonormal (∂r, ∂θ/h) components.
    let mut nu = [h * t1 / speed, -r1 / speed];
    let mut sign = 1.0;
    if let Some(v) = reference {
        if nu[0] * v[0] + nu[1] * v[1] > 0.0 {
            nu = [-nu[0], -nu[1]];
            sign = -1.0;
        }
    }
    let nu_theta = nu[1] / h;
    let acc_r = r2 - h * dh * t1 * t1;
    let acc_t = t2 + 2.0 * (dh / h) * r1 * t1;
    let k1 = -(nu[0] * acc_r + h * h * nu_theta * acc_t) / (speed * speed);
    let krot = (dh / h) * nu[0] + theta.cos() / theta.sin() * nu_theta;
    let m = n as f64 - 2.0;
    let hm = k1 + m * krot;
    let mean = hm / (n as f64 - 1.0);
    let deficit = ((k1 - mean).powi(2) + m * (krot - mean).powi(2)).sqrt();
    let ratio = theta.sin() / u.sin();
    let area = sign * speed * (h * ratio).powi(n as i32 - 2);
    NodeGeometry {
        normal_r: nu[0],
        normal_ang: [nu[1], 0.0, 0.0],
        h_mean: hm,
        ii: [k1, 0.0, krot],
        area,
        f: dh,
        x_nu: h * nu[0],
        deficit,
    }
}

/// Axisymmetric geometry from `r(u)`, `θ(u)` and their first two derivatives.
pub fn axi_geometry(
    grid: &SphereGrid,
    ambient: &WarpingFunction,
    r: [&[f64]; 3],
    theta: [&[f64]; 3],
    orientation: Orientation<'_>,
) -> GeometryReport {
    let n = grid.n();
    let us = grid.colatitudes();
    let nodes: Vec<NodeGeometry> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let reference = match orientation {
                Orientation::Outward => None,
                Orientation::AgainstVelocity(v) => Some(v[k]),
            };
            axi_node(ambient, n, us[k], [r[0][k], r[1][k], r[2][k]], [theta[0][k], theta[1][k], theta[2][k]], reference)
        })
        .collect();
    assemble(grid, ambient, r[0], nodes)
}

fn assemble(
    grid: &SphereGrid,
    ambient: &WarpingFunction,
    r: &[f64],
    nodes: Vec<NodeGeometry>,
) -> GeometryReport {
    GeometryReport {
        mode: grid.mode(),
        dim: ambient.dim(),
        r: r.to_vec(),
        normal_r: nodes.iter().map(|g| g.normal_r).collect(),
        normal_ang: nodes.iter().map(|g| g.normal_ang).collect(),
        mean_curvature: nodes.iter().map(|g| g.h_mean).collect(),
        second_form: nodes.iter().map(|g| g.ii).collect(),
        area_element: nodes.iter().map(|g| g.area).collect(),
        weights: grid.weights().to_vec(),
        f: nodes.iter().map(|g| g.f).collect(),
        x_dot_nu: nodes.iter().map(|g| g.x_nu).collect(),
        deficit: nodes.iter().map(|g| g.deficit).collect(),
        total_area: 0.0,
        min_h: 0.0,
        max_h: 0.0,
        umbilicity_deficit: 0.0,
    }
    .finish()
}
