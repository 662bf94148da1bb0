//! Colatitude-only functions on `S^{n-1}` sampled at Chebyshev midpoints.
//!
//! Differentiation folds the periodic Fourier matrix on `2N` equispaced points
//! onto the `N` nodes in `(0, π)`, using even or odd reflection about the poles.

use std::f64::consts::PI;

use crate::quadrature::{sphere_volume, GaussLegendre};

/// Reflection symmetry of a field about `θ = 0` and `θ = π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub(crate) struct AxiSpectral {
    size: usize,
    d1_even: Vec<f64>,
    d2_even: Vec<f64>,
    d1_odd: Vec<f64>,
    d2_odd: Vec<f64>,
}

impl AxiSpectral {
    pub(crate) fn new(size: usize) -> Self {
        let big = 2 * size;
        let h = 2.0 * PI / big as f64;
        let d1 = |k: isize| -> f64 {
            if k == 0 {
                0.0
            } else {
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                0.5 * sign / (0.5 * k as f64 * h).tan()
            }
        };
        let d2 = |k: isize| -> f64 {
            if k == 0 {
                -PI * PI / (3.0 * h * h) - 1.0 / 6.0
            } else {
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let s = (0.5 * k as f64 * h).sin();
                -0.5 * sign / (s * s)
            }
        };
        let mut d1_even = vec![0.0; size * size];
        let mut d2_even = vec![0.0; size * size];
        let mut d1_odd = vec![0.0; size * size];
        let mut d2_odd = vec![0.0; size * size];
        for j in 0..size {
            for k in 0..size {
                let direct = j as isize - k as isize;
                let mirror = j as isize - (big - 1 - k) as isize;
                let idx = j * size + k;
                d1_even[idx] = d1(direct) + d1(mirror);
                d1_odd[idx] = d1(direct) - d1(mirror);
                d2_even[idx] = d2(direct) + d2(mirror);
                d2_odd[idx] = d2(direct) - d2(mirror);
            }
        }
        Self { size, d1_even, d2_even, d1_odd, d2_odd }
    }

    /// First and second θ-derivatives at the nodes.
    pub(crate) fn derivatives(&self, f: &[f64], parity: Parity) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = match parity {
            Parity::Even => (&self.d1_even, &self.d2_even),
            Parity::Odd => (&self.d1_odd, &self.d2_odd),
        };
        let n = self.size;
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for j in 0..n {
            let row1 = &a[j * n..(j + 1) * n];
            let row2 = &b[j * n..(j + 1) * n];
            d1[j] = row1.iter().zip(f).map(|(c, v)| c * v).sum();
            d2[j] = row2.iter().zip(f).map(|(c, v)| c * v).sum();
        }
        (d1, d2)
    }

    /// Applies a multiplier to the cosine coefficients of an even field.
    pub(crate) fn cosine_filter(&self, theta: &[f64], f: &[f64], mult: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.size;
        let coef: Vec<f64> = (0..n)
            .map(|k| {
                let c: f64 = theta.iter().zip(f).map(|(t, v)| v * (k as f64 * t).cos()).sum();
                2.0 / n as f64 * c * mult(k)
            })
            .collect();
        theta
            .iter()
            .map(|t| 0.5 * coef[0] + (1..n).map(|k| coef[k] * (k as f64 * t).cos()).sum::<f64>())
            .collect()
    }
}

/// Chebyshev midpoints `θ_j = (j + ½) π / N`.
pub(crate) fn midpoints(size: usize) -> Vec<f64> {
    (0..size).map(|j| (j as f64 + 0.5) * PI / size as f64).collect()
}

/// Weights for `∫_{S^{n-1}} f`, exact for axisymmetric `f` whose cosine series has
/// degree below `N`: `w_j = vol(S^{n-2}) (2/N) Σ' μ_k cos(k θ_j)` with
/// `μ_k = ∫_0^π cos(kθ) sin^{n-2}θ dθ`.
pub(crate) fn weights(theta: &[f64], n: usize) -> Vec<f64> {
    let size = theta.len();
    let p = (n - 2) as i32;
    let gl = GaussLegendre::new(48);
    let panels = size / 4 + 8;
    let mu: Vec<f64> = (0..size)
        .map(|k| gl.integrate_composite(0.0, PI, panels, |t| (k as f64 * t).cos() * t.sin().powi(p)))
        .collect();
    let vol = sphere_volume(n - 2);
    theta
        .iter()
        .map(|&t| {
            let s = 0.5 * mu[0] + (1..size).map(|k| mu[k] * (k as f64 * t).cos()).sum::<f64>();
            vol * 2.0 / size as f64 * s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn even_and_odd_derivatives() {
        let n = 48;
        let th = midpoints(n);
        let ax = AxiSpectral::new(n);
        let f: Vec<f64> = th.iter().map(|t| (2.0 * t).cos() + 0.3 * t.cos().powi(3)).collect();
        let (d1, d2) = ax.derivatives(&f, Parity::Even);
        for (j, t) in th.iter().enumerate() {
            let want1 = -2.0 * (2.0 * t).sin() - 0.9 * t.cos().powi(2) * t.sin();
            let want2 = -4.0 * (2.0 * t).cos() - 0.9 * (t.cos().powi(3) - 2.0 * t.cos() * t.sin().powi(2));
            assert_relative_eq!(d1[j], want1, epsilon = 1e-11);
            assert_relative_eq!(d2[j], want2, epsilon = 1e-9);
        }
        let g: Vec<f64> = th.iter().map(|t| (3.0 * t).sin()).collect();
        let (g1, g2) = ax.derivatives(&g, Parity::Odd);
        for (j, t) in th.iter().enumerate() {
            assert_relative_eq!(g1[j], 3.0 * (3.0 * t).cos(), epsilon = 1e-11);
            assert_relative_eq!(g2[j], -9.0 * (3.0 * t).sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn weights_integrate_polynomials_in_cos() {
        for n in [3usize, 4, 5, 7] {
            let th = midpoints(64);
            let w = weights(&th, n);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, sphere_volume(n - 1), epsilon = 1e-12);
            // ∫ cos²θ over S^{n-1} equals vol(S^{n-1}) / n.
            let c2: f64 = th.iter().zip(&w).map(|(t, w)| w * t.cos().powi(2)).sum();
            assert_relative_eq!(c2, sphere_volume(n - 1) / n as f64, epsilon = 1e-12);
        }
    }
}
