//! The warped ambient manifold `N × [0, r̄)` with metric `dr² + h(r)² g_N`.
//!
//! A [`WarpingFunction`] bundles a radial profile `h` (with derivatives up to
//! third order) and the base data (`ρ`, `vol(N)`). All curvature quantities
//! below assume a round base, `Ric_N = (n-2) ρ g_N`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::quadrature::sphere_volume;
use crate::spline::QuinticSpline;

/// `h` and its first three radial derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
    pub d3h: f64,
}

/// Which end condition the profile satisfies at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `h'(0) = 0`, `h(0) > 0`: the inner end is a horizon `N × {0}`.
    Boundary,
    /// `h(0) = 0`, `h'(0) = 1`: the metric closes up smoothly at an origin.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ClosedForm,
    Tabulated,
}

/// Source of the radial jet.
pub trait WarpingProfile: Send + Sync + fmt::Debug {
    fn jet(&self, r: f64) -> Jet;

    /// `ρ - h'(r)²`. Closed forms override this to avoid cancellation near `h' ≈ 1`.
    fn rho_deficit(&self, r: f64, rho: f64) -> f64 {
        let dh = self.jet(r).dh;
        rho - dh * dh
    }

    /// Whether `jet` supplies a trustworthy third derivative.
    fn has_third_derivative(&self) -> bool {
        true
    }

    /// Solves `h(r) = s`, if the profile knows its inverse in closed form.
    fn radius_for_height(&self, _s: f64) -> Option<f64> {
        None
    }
}

/// Space forms `h = r`, `sin(√k r)/√k`, `sinh(√k r)/√k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceForm {
    Euclidean,
    Sphere { curvature: f64 },
    Hyperbolic { curvature: f64 },
}

impl WarpingProfile for SpaceForm {
    fn jet(&self, r: f64) -> Jet {
        match *self {
            SpaceForm::Euclidean => Jet { h: r, dh: 1.0, d2h: 0.0, d3h: 0.0 },
            SpaceForm::Sphere { curvature } => {
                let a = curvature.sqrt();
                let (s, c) = (a * r).sin_cos();
                Jet { h: s / a, dh: c, d2h: -a * s, d3h: -curvature * c }
            }
            SpaceForm::Hyperbolic { curvature } => {
                let a = curvature.sqrt();
                let (s, c) = ((a * r).sinh(), (a * r).cosh());
                Jet { h: s / a, dh: c, d2h: a * s, d3h: curvature * c }
            }
        }
    }

    fn rho_deficit(&self, r: f64, rho: f64) -> f64 {
        match *self {
            SpaceForm::Euclidean => rho - 1.0,
            SpaceForm::Sphere { curvature } => {
                let s = (curvature.sqrt() * r).sin();
                (rho - 1.0) + s * s
            }
            SpaceForm::Hyperbolic { curvature } => {
                let s = (curvature.sqrt() * r).sinh();
                (rho - 1.0) - s * s
            }
        }
    }
}

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

/// A profile given by an arbitrary closure; used for fixtures and user-supplied closed forms.
#[derive(Clone)]
pub struct FnProfile {
    f: Arc<JetFn>,
    third: bool,
}

impl FnProfile {
    pub fn new<F: Fn(f64) -> Jet + Send + Sync + 'static>(f: F) -> Self {
        Self { f: Arc::new(f), third: true }
    }

    /// Marks `d3h` as unavailable; `W'` then falls back to finite differences.
    pub fn without_third_derivative(mut self) -> Self {
        self.third = false;
        self
    }
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile").field("third", &self.third).finish()
    }
}

impl WarpingProfile for FnProfile {
    fn jet(&self, r: f64) -> Jet {
        (self.f)(r)
    }

    fn has_third_derivative(&self) -> bool {
        self.third
    }
}

/// `h` interpolated from samples by a C² quintic spline.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    spline: QuinticSpline,
}

impl SampledProfile {
    pub fn new(r: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        Ok(Self { spline: QuinticSpline::from_samples(r, h)? })
    }
}

impl WarpingProfile for SampledProfile {
    fn jet(&self, r: f64) -> Jet {
        let [h, dh, d2h, d3h] = self.spline.eval(r);
        Jet { h, dh, d2h, d3h }
    }
}

/// The ambient geometry: a radial profile plus base-manifold data.
#[derive(Clone)]
pub struct WarpingFunction {
    profile: Arc<dyn WarpingProfile>,
    r_bar: f64,
    rho: f64,
    vol_base: f64,
    dim: usize,
    kind: Kind,
    variant: Variant,
    label: String,
    truncated: bool,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("label", &self.label)
            .field("r_bar", &self.r_bar)
            .field("rho", &self.rho)
            .field("dim", &self.dim)
            .field("variant", &self.variant)
            .field("kind", &self.kind)
            .finish()
    }
}

impl WarpingFunction {
    /// Wraps a profile over a round base `S^{n-1}` with Ricci constant `ρ`.
    pub fn new(
        profile: Arc<dyn WarpingProfile>,
        dim: usize,
        r_bar: f64,
        rho: f64,
        kind: Kind,
        variant: Variant,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(GeomError::InvalidArgument(format!("dimension n = {dim} must be at least 3")));
        }
        if !(r_bar > 0.0) {
            return Err(GeomError::InvalidArgument(format!("r_bar = {r_bar} must be positive")));
        }
        Ok(Self {
            profile,
            r_bar,
            rho,
            vol_base: sphere_volume(dim - 1),
            dim,
            kind,
            variant,
            label: String::from("custom"),
            truncated: false,
        })
    }

    pub fn euclidean(dim: usize, r_bar: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(SpaceForm::Euclidean), dim, r_bar, 1.0, Kind::ClosedForm, Variant::Ball)?
            .with_label("euclidean"))
    }

    /// Round sphere of sectional curvature `k`, restricted to the open hemisphere.
    pub fn sphere(dim: usize, curvature: f64) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(GeomError::Parameter { family: "sphere".into(), bound: "curvature > 0".into() });
        }
        let r_bar = std::f64::consts::FRAC_PI_2 / curvature.sqrt();
        Ok(Self::new(
            Arc::new(SpaceForm::Sphere { curvature }),
            dim,
            r_bar,
            1.0,
            Kind::ClosedForm,
            Variant::Ball,
        )?
        .with_label("sphere"))
    }

    pub fn hyperbolic(dim: usize, curvature: f64, r_bar: f64) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(GeomError::Parameter { family: "hyperbolic".into(), bound: "curvature > 0".into() });
        }
        Ok(Self::new(
            Arc::new(SpaceForm::Hyperbolic { curvature }),
            dim,
            r_bar,
            1.0,
            Kind::ClosedForm,
            Variant::Ball,
        )?
        .with_label("hyperbolic"))
    }

    /// A tabulated profile from samples `(r_i, h(r_i))` starting at `r = 0`.
    pub fn from_samples(
        dim: usize,
        r: Vec<f64>,
        h: Vec<f64>,
        rho: f64,
        variant: Variant,
    ) -> Result<Self> {
        let r_bar = *r.last().ok_or_else(|| GeomError::Table("empty table".into()))?;
        if r[0] != 0.0 {
            return Err(GeomError::Table("tabulated profile must start at r = 0".into()));
        }
        Ok(Self::new(Arc::new(SampledProfile::new(r, h)?), dim, r_bar, rho, Kind::Tabulated, variant)?
            .with_label("tabulated"))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Overrides the base volume (abstract base manifolds in condition checks).
    pub fn with_base_volume(mut self, vol: f64) -> Self {
        self.vol_base = vol;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub(crate) fn mark_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub fn r_bar(&self) -> f64 {
        self.r_bar
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn base_volume(&self) -> f64 {
        self.vol_base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when `r_bar` is a working bound standing in for an infinite or open end.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn profile(&self) -> &Arc<dyn WarpingProfile> {
        &self.profile
    }

    /// `(h, h', h'', h''')` at `r`, checking `0 <= r < r_bar`.
    pub fn eval(&self, r: f64) -> Result<Jet> {
        self.check_domain(r)?;
        Ok(self.profile.jet(r))
    }

    /// Unchecked jet for inner loops.
    #[inline]
    pub(crate) fn jet(&self, r: f64) -> Jet {
        self.profile.jet(r)
    }

    #[inline]
    pub(crate) fn deficit(&self, r: f64) -> f64 {
        self.profile.rho_deficit(r, self.rho)
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if r.is_finite() && (0.0..self.r_bar).contains(&r) {
            Ok(())
        } else {
            Err(GeomError::Domain { r, r_bar: self.r_bar })
        }
    }

    /// Potential `f = h'(r)` and the length `h(r)` of the conformal field `X = h ∂r`.
    pub fn potential_field(&self, r: f64) -> Result<(f64, f64)> {
        let j = self.eval(r)?;
        Ok((j.dh, j.h))
    }

    fn nonsingular(&self, r: f64) -> Result<Jet> {
        let j = self.eval(r)?;
        if j.h == 0.0 {
            return Err(GeomError::SingularPoint { r, what: "h(r) = 0" });
        }
        Ok(j)
    }

    /// Eigenvalues of `Ric` relative to `g`: radial (multiplicity 1) and tangential (multiplicity n-1).
    pub fn ricci_split(&self, r: f64, n: usize) -> Result<(f64, f64)> {
        check_dim(n)?;
        let j = self.nonsingular(r)?;
        let d = self.deficit(r);
        let nn = n as f64;
        let radial = -(nn - 1.0) * j.d2h / j.h;
        let tangential = (nn - 2.0) * d / (j.h * j.h) - j.d2h / j.h;
        Ok((radial, tangential))
    }

    /// `R = -(n-1) W(r)`.
    pub fn scalar_curvature(&self, r: f64, n: usize) -> Result<f64> {
        let (w, _) = self.h3_quantity(r, n)?;
        Ok(-(n as f64 - 1.0) * w)
    }

    /// `W = 2h''/h - (n-2)(ρ - h'²)/h²` and its radial derivative.
    pub fn h3_quantity(&self, r: f64, n: usize) -> Result<(f64, f64)> {
        check_dim(n)?;
        let j = self.nonsingular(r)?;
        let w = self.w_at(&j, self.deficit(r), n);
        let dw = if self.profile.has_third_derivative() {
            self.dw_at(&j, self.deficit(r), n)
        } else {
            let step = 1e-5 * self.r_bar;
            let lo = (r - step).max(0.5 * r);
            let hi = (r + step).min(0.5 * (r + self.r_bar));
            let wl = self.w_at(&self.jet(lo), self.deficit(lo), n);
            let wh = self.w_at(&self.jet(hi), self.deficit(hi), n);
            (wh - wl) / (hi - lo)
        };
        Ok((w, dw))
    }

    #[inline]
    fn w_at(&self, j: &Jet, deficit: f64, n: usize) -> f64 {
        2.0 * j.d2h / j.h - (n as f64 - 2.0) * deficit / (j.h * j.h)
    }

    #[inline]
    fn dw_at(&self, j: &Jet, deficit: f64, n: usize) -> f64 {
        let h = j.h;
        let h2 = h * h;
        2.0 * j.d3h / h - 2.0 * j.d2h * j.dh / h2
            + (n as f64 - 2.0) * (2.0 * j.dh * j.d2h / h2 + 2.0 * deficit * j.dh / (h2 * h))
    }

    /// Eigenvalues of `(Δf) g - D²f + f Ric` relative to `g`.
    ///
    /// The radial block cancels identically; the tangential eigenvalue is
    /// `(h² h''' + (n-3) h h' h'' + (n-2) h' (ρ - h'²)) / h²`, which equals `½ h W'`.
    pub fn static_tensor(&self, r: f64, n: usize) -> Result<(f64, f64)> {
        check_dim(n)?;
        let j = self.nonsingular(r)?;
        let d = self.deficit(r);
        let nn = n as f64;
        let tangential = j.d3h + (nn - 3.0) * j.dh * j.d2h / j.h + (nn - 2.0) * j.dh * d / (j.h * j.h);
        Ok((0.0, tangential))
    }

    /// `h''/h + (ρ - h'²)/h²`, positive exactly when the radial Ricci eigenvalue is the smallest.
    pub fn ricci_gap(&self, r: f64) -> Result<f64> {
        let j = self.nonsingular(r)?;
        Ok(j.d2h / j.h + self.deficit(r) / (j.h * j.h))
    }

    /// Mean curvature `(n-1) h'/h` of the slice `N × {r}`.
    pub fn slice_mean_curvature(&self, r: f64) -> Result<f64> {
        let j = self.nonsingular(r)?;
        Ok((self.dim as f64 - 1.0) * j.dh / j.h)
    }

    /// Solves `h(r) = s` on `[0, r_bar)`; `h` is increasing wherever (H2) holds.
    pub fn radius_for_height(&self, s: f64) -> Result<f64> {
        if let Some(r) = self.profile.radius_for_height(s) {
            return Ok(r);
        }
        let lo_h = self.jet(0.0).h;
        let top = self.r_bar * (1.0 - 1e-12);
        let hi_h = self.jet(top).h;
        if !(s >= lo_h && s <= hi_h) {
            return Err(GeomError::Domain { r: s, r_bar: hi_h });
        }
        let (mut a, mut b) = (0.0, top);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.jet(m).h < s {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 * self.r_bar {
                break;
            }
        }
        let mut r = 0.5 * (a + b);
        for _ in 0..3 {
            let j = self.jet(r);
            if j.dh.abs() < 1e-300 {
                break;
            }
            let next = r - (j.h - s) / j.dh;
            if next >= a && next <= b {
                r = next;
            }
        }
        Ok(r)
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        Err(GeomError::InvalidArgument(format!("dimension n = {n} must be at least 3")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_jet() {
        let w = WarpingFunction::euclidean(3, 10.0).unwrap();
        let j = w.eval(0.5).unwrap();
        assert_eq!((j.h, j.dh, j.d2h, j.d3h), (0.5, 1.0, 0.0, 0.0));
    }

    #[test]
    fn hyperbolic_jet_at_origin() {
        let w = WarpingFunction::hyperbolic(3, 1.0, 4.0).unwrap();
        let j = w.eval(0.0).unwrap();
        assert_eq!((j.h, j.dh, j.d2h, j.d3h), (0.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn domain_errors() {
        let w = WarpingFunction::sphere(3, 1.0).unwrap();
        assert!(matches!(w.eval(-0.1), Err(GeomError::Domain { .. })));
        assert!(matches!(w.eval(PI / 2.0), Err(GeomError::Domain { .. })));
        assert!(matches!(w.ricci_split(0.0, 3), Err(GeomError::SingularPoint { .. })));
    }

    #[test]
    fn potential_and_ricci_on_space_forms() {
        let e = WarpingFunction::euclidean(3, 10.0).unwrap();
        assert_eq!(e.potential_field(0.3).unwrap(), (1.0, 0.3));
        assert_eq!(e.ricci_split(1.0, 3).unwrap(), (0.0, 0.0));

        let s = WarpingFunction::sphere(3, 1.0).unwrap();
        let (f, x) = s.potential_field(PI / 4.0).unwrap();
        assert_relative_eq!(f, (PI / 4.0).cos(), epsilon = 1e-15);
        assert_relative_eq!(x, (PI / 4.0).sin(), epsilon = 1e-15);
        let (a, b) = s.ricci_split(PI / 4.0, 3).unwrap();
        assert_relative_eq!(a, 2.0, epsilon = 1e-14);
        assert_relative_eq!(b, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn h3_quantity_space_forms() {
        let hyp = WarpingFunction::hyperbolic(4, 1.0, 4.0).unwrap();
        let sph = WarpingFunction::sphere(3, 1.0).unwrap();
        let euc = WarpingFunction::euclidean(5, 5.0).unwrap();
        for r in [0.1, 0.7, 1.3] {
            let (w, dw) = hyp.h3_quantity(r, 4).unwrap();
            assert_relative_eq!(w, 4.0, epsilon = 1e-12);
            assert!(dw.abs() < 1e-11);
            let (w, dw) = sph.h3_quantity(r, 3).unwrap();
            assert_relative_eq!(w, -3.0, epsilon = 1e-12);
            assert!(dw.abs() < 1e-11);
            assert_eq!(euc.h3_quantity(r, 5).unwrap(), (0.0, 0.0));
            assert_eq!(euc.static_tensor(r, 5).unwrap(), (0.0, 0.0));
            let (rad, tan) = hyp.static_tensor(r, 4).unwrap();
            assert_eq!(rad, 0.0);
            assert!(tan.abs() < 1e-11);
        }
    }

    #[test]
    fn finite_difference_fallback_for_w_prime() {
        let exact = FnProfile::new(|r: f64| Jet { h: 1.0 + r * r, dh: 2.0 * r, d2h: 2.0, d3h: 0.0 });
        let fd = exact.clone().without_third_derivative();
        let a = WarpingFunction::new(Arc::new(exact), 3, 2.0, 1.0, Kind::ClosedForm, Variant::Boundary).unwrap();
        let b = WarpingFunction::new(Arc::new(fd), 3, 2.0, 1.0, Kind::ClosedForm, Variant::Boundary).unwrap();
        let (_, da) = a.h3_quantity(0.8, 3).unwrap();
        let (_, db) = b.h3_quantity(0.8, 3).unwrap();
        assert_relative_eq!(da, db, max_relative = 1e-7);
    }

    #[test]
    fn inverse_of_h() {
        let s = WarpingFunction::sphere(3, 1.0).unwrap();
        let r = s.radius_for_height(0.5).unwrap();
        assert_relative_eq!(r, PI / 6.0, epsilon = 1e-13);
    }
}
