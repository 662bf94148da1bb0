//! Piecewise quintic Hermite interpolation (C² across knots).
//!
//! Knot slopes and curvatures are either supplied exactly or estimated from
//! seven-point local polynomial fits, which reproduce polynomials up to degree six.

use crate::error::{GeomError, Result};
use crate::quadrature::fd_weights;

const STENCIL: usize = 7;

#[derive(Debug, Clone)]
pub struct QuinticSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticSpline {
    /// Builds the interpolant from values and the first two derivatives at each knot.
    pub fn from_hermite(x: Vec<f64>, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || d1.len() != n || d2.len() != n {
            return Err(GeomError::Table(
                "spline needs at least two knots and matching columns".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
            return Err(GeomError::Table("knots must be strictly increasing".into()));
        }
        Ok(Self { x, y, d1, d2 })
    }

    /// Builds the interpolant from samples alone.
    pub fn from_samples(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(GeomError::Table(
                "spline needs at least three samples with matching columns".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeomError::Table("abscissae must be strictly increasing".into()));
        }
        let width = STENCIL.min(n);
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &x[start..start + width];
            let w = fd_weights(x[i], nodes, 2);
            d1[i] = w[1].iter().zip(&y[start..]).map(|(c, v)| c * v).sum();
            d2[i] = w[2].iter().zip(&y[start..]).map(|(c, v)| c * v).sum();
        }
        Self::from_hermite(x, y, d1, d2)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first(&self) -> f64 {
        self.x[0]
    }

    pub fn last(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and first three derivatives at `t`. Outside the knot range the end
    /// polynomials are extrapolated.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let i = self.locate(t);
        let dx = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / dx;
        let p0 = self.y[i];
        let p1 = self.y[i + 1];
        let v0 = self.d1[i] * dx;
        let v1 = self.d1[i + 1] * dx;
        let a0 = self.d2[i] * dx * dx;
        let a1 = self.d2[i + 1] * dx * dx;
        let dd = p1 - p0 - v0 - 0.5 * a0;
        let ee = v1 - v0 - a0;
        let ff = a1 - a0;
        let c = [
            p0,
            v0,
            0.5 * a0,
            10.0 * dd - 4.0 * ee + 0.5 * ff,
            -15.0 * dd + 7.0 * ee - ff,
            6.0 * dd - 3.0 * ee + 0.5 * ff,
        ];
        let val = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let der1 = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let der2 = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        let der3 = 6.0 * c[3] + s * (24.0 * c[4] + s * 60.0 * c[5]);
        [val, der1 / dx, der2 / (dx * dx), der3 / (dx * dx * dx)]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }
}
