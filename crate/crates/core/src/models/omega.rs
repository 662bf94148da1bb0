//! Area-radius profiles `g = ω(s)⁻¹ ds² + s² g_N` and their conversion to arclength form.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::quadrature::GaussLegendre;
use crate::spline::QuinticSpline;
use crate::warping::{Jet, Kind, Variant, WarpingFunction, WarpingProfile};

/// Default knot count of the inverse table.
pub const DEFAULT_TABLE_SIZE: usize = 2048;
/// Default truncation `s_max = 10 s̲` for non-compact ends.
pub const DEFAULT_S_MAX_FACTOR: f64 = 10.0;
/// Fraction of `(s̲, s̄)` kept when the profile has a finite upper root.
pub const UPPER_ROOT_FRACTION: f64 = 0.95;

const PANEL_ORDER: usize = 32;

/// `ω` with its first two derivatives.
pub trait OmegaFn: Send + Sync + fmt::Debug {
    fn eval(&self, s: f64) -> [f64; 3];

    /// `1 - ω(s)`; override when a cancellation-free form exists.
    fn one_minus(&self, s: f64) -> f64 {
        1.0 - self.eval(s)[0]
    }

    /// Range on which the profile is defined, used to bracket its roots.
    fn search_range(&self) -> (f64, f64) {
        (1e-6, 1e6)
    }
}

/// `ω(s) = 1 - m s^{2-n} - κ s² + q² s^{4-2n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackHoleOmega {
    pub n: usize,
    pub m: f64,
    pub kappa: f64,
    pub q: f64,
}

impl OmegaFn for BlackHoleOmega {
    fn eval(&self, s: f64) -> [f64; 3] {
        let nn = self.n as f64;
        let a = self.m * s.powf(2.0 - nn);
        let b = self.q * self.q * s.powf(4.0 - 2.0 * nn);
        let w = 1.0 - a - self.kappa * s * s + b;
        let dw = (nn - 2.0) * a / s - 2.0 * self.kappa * s - (2.0 * nn - 4.0) * b / s;
        let d2w = -(nn - 2.0) * (nn - 1.0) * a / (s * s) - 2.0 * self.kappa
            + (2.0 * nn - 4.0) * (2.0 * nn - 3.0) * b / (s * s);
        [w, dw, d2w]
    }

    fn one_minus(&self, s: f64) -> f64 {
        let nn = self.n as f64;
        self.m * s.powf(2.0 - nn) + self.kappa * s * s - self.q * self.q * s.powf(4.0 - 2.0 * nn)
    }
}

/// `ω` interpolated from `(s, ω)` samples.
#[derive(Debug, Clone)]
pub struct TabulatedOmega {
    spline: QuinticSpline,
}

impl TabulatedOmega {
    pub fn new(s: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        Ok(Self { spline: QuinticSpline::from_samples(s, omega)? })
    }
}

impl OmegaFn for TabulatedOmega {
    fn eval(&self, s: f64) -> [f64; 3] {
        let [w, dw, d2w, _] = self.spline.eval(s);
        [w, dw, d2w]
    }

    fn search_range(&self) -> (f64, f64) {
        (self.spline.first(), self.spline.last())
    }
}

/// A profile with a simple zero at the horizon `s̲` and `ω > 0` on `(s̲, s̄)`.
#[derive(Debug, Clone)]
pub struct OmegaProfile {
    pub omega: Arc<dyn OmegaFn>,
    pub s_lower: f64,
    /// Next root above `s̲`, if any.
    pub s_upper: Option<f64>,
    pub n: usize,
    pub rho: f64,
    gauss: Arc<GaussLegendre>,
}

impl OmegaProfile {
    /// Locates the horizon and validates the simple-zero condition.
    pub fn new(omega: Arc<dyn OmegaFn>, n: usize, rho: f64) -> Result<Self> {
        let (s_lower, s_upper) = find_roots(omega.as_ref())?;
        let slope = omega.eval(s_lower)[1];
        if !(slope > 1e-10 * (1.0 + 1.0 / s_lower)) {
            return Err(GeomError::Singularity(format!(
                "omega has a degenerate zero at s = {s_lower} (omega'(s) = {slope:e}, need omega' > 0)"
            )));
        }
        Ok(Self { omega, s_lower, s_upper, n, rho, gauss: Arc::new(GaussLegendre::new(PANEL_ORDER)) })
    }

    pub fn black_hole(n: usize, m: f64, kappa: f64, q: f64) -> Result<Self> {
        Self::new(Arc::new(BlackHoleOmega { n, m, kappa, q }), n, 1.0)
    }

    /// `(ω, ω', ω'')`, with `ω` evaluated from the divided difference near `s̲`.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let [w, dw, d2w] = self.omega.eval(s);
        let delta = s - self.s_lower;
        if delta >= 0.0 && delta < self.near_band() {
            [delta * self.divided(delta), dw, d2w]
        } else {
            [w, dw, d2w]
        }
    }

    fn near_band(&self) -> f64 {
        0.05 * self.s_lower
    }

    /// `ω(s̲ + δ)/δ`, the mean of `ω'` over `[s̲, s̲ + δ]`.
    fn divided(&self, delta: f64) -> f64 {
        if delta >= self.near_band() {
            return self.omega.eval(self.s_lower + delta)[0] / delta;
        }
        const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        let mut acc = 0.0;
        for (x, w) in X.iter().zip(W) {
            for sgn in [-1.0, 1.0] {
                let t = 0.5 * (1.0 + sgn * x);
                acc += w * self.omega.eval(self.s_lower + t * delta)[1];
            }
        }
        0.5 * acc
    }

    /// `ρ - ω(s)` without cancellation where the family supplies `1 - ω`.
    pub fn deficit(&self, s: f64, rho: f64) -> f64 {
        let delta = s - self.s_lower;
        if delta >= 0.0 && delta < self.near_band() {
            rho - delta * self.divided(delta)
        } else {
            (rho - 1.0) + self.omega.one_minus(s)
        }
    }

    /// Integrand of `F` in the variable `ξ = √(s - s̲)`.
    fn integrand(&self, xi: f64) -> f64 {
        2.0 / self.divided(xi * xi).sqrt()
    }

    /// `F(s) = ∫_{s̲}^{s} ω^{-1/2}` on `panels` equal ξ-panels of the given rule.
    pub fn arclength_with(&self, s: f64, rule: &GaussLegendre, panels: usize) -> Result<f64> {
        if !(s >= self.s_lower) {
            return Err(GeomError::Domain { r: s, r_bar: self.s_lower });
        }
        let xi = (s - self.s_lower).sqrt();
        Ok(rule.integrate_composite(0.0, xi, panels, |x| self.integrand(x)))
    }

    /// `F(s)` with the default 32-point rule.
    pub fn arclength(&self, s: f64) -> Result<f64> {
        let panels = ((s - self.s_lower).max(0.0).sqrt() / (0.25 * self.s_lower.sqrt())).ceil().max(1.0) as usize;
        self.arclength_with(s, &self.gauss, panels)
    }

    /// The ω-form versions of (H3) and (H4) at `s`:
    /// `(ω'/s - (n-2)(ρ-ω)/s², its s-derivative, ω'/(2s) + (ρ-ω)/s²)`.
    pub fn omega_form_margins(&self, s: f64) -> (f64, f64, f64) {
        let [_, dw, d2w] = self.eval(s);
        let d = self.deficit(s, self.rho);
        let nn = self.n as f64;
        let w = dw / s - (nn - 2.0) * d / (s * s);
        let dws = d2w / s - dw / (s * s) + (nn - 2.0) * (dw / (s * s) + 2.0 * d / (s * s * s));
        (w, dws, dw / (2.0 * s) + d / (s * s))
    }

    /// Default truncation point: `min(10 s̲, s̲ + 0.95 (s̄ - s̲))`.
    pub fn default_s_max(&self) -> f64 {
        let cap = DEFAULT_S_MAX_FACTOR * self.s_lower;
        match self.s_upper {
            Some(up) => cap.min(self.s_lower + UPPER_ROOT_FRACTION * (up - self.s_lower)),
            None => cap,
        }
    }
}

/// First upward root of `ω` (the horizon) and the following downward root, if any.
pub fn find_roots(omega: &dyn OmegaFn) -> Result<(f64, Option<f64>)> {
    let (lo, hi) = omega.search_range();
    let samples = 4000;
    let ratio = (hi / lo).ln() / samples as f64;
    let at = |i: usize| if i == samples { hi } else { lo * (ratio * i as f64).exp() };
    let mut lower = None;
    let mut prev_s = at(0);
    let mut prev_w = omega.eval(prev_s)[0];
    let mut i = 1;
    while i <= samples {
        let s = at(i);
        let w = omega.eval(s)[0];
        if lower.is_none() && prev_w <= 0.0 && w > 0.0 {
            lower = Some(refine_root(omega, prev_s, s));
        } else if lower.is_some() && prev_w > 0.0 && w <= 0.0 {
            return Ok((lower.unwrap(), Some(refine_root(omega, prev_s, s))));
        }
        prev_s = s;
        prev_w = w;
        i += 1;
    }
    match lower {
        Some(s) => Ok((s, None)),
        None => Err(GeomError::Parameter {
            family: "omega profile".into(),
            bound: "omega must change sign from negative to positive (no horizon found)".into(),
        }),
    }
}

fn refine_root(omega: &dyn OmegaFn, a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    let fa_neg = omega.eval(a)[0] <= 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (omega.eval(m)[0] <= 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    let mut s = 0.5 * (a + b);
    for _ in 0..4 {
        let [w, dw, _] = omega.eval(s);
        if dw == 0.0 {
            break;
        }
        let next = s - w / dw;
        if next < a0 || next > b0 || (next - s).abs() <= f64::EPSILON * s {
            if next >= a0 && next <= b0 {
                s = next;
            }
            break;
        }
        s = next;
    }
    s
}

/// `h = F⁻¹` stored as a quintic Hermite table `r ↦ s` with exact knot slopes.
#[derive(Debug, Clone)]
pub struct OmegaWarping {
    profile: OmegaProfile,
    table: QuinticSpline,
    knot_s: Vec<f64>,
}

impl OmegaWarping {
    pub fn profile(&self) -> &OmegaProfile {
        &self.profile
    }

    fn s_of_r(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.profile.s_lower;
        }
        self.table.value(r)
    }
}

impl WarpingProfile for OmegaWarping {
    fn jet(&self, r: f64) -> Jet {
        let s = self.s_of_r(r);
        let [w, dw, d2w] = self.profile.eval(s);
        let root = w.max(0.0).sqrt();
        Jet { h: s, dh: root, d2h: 0.5 * dw, d3h: 0.5 * d2w * root }
    }

    fn rho_deficit(&self, r: f64, rho: f64) -> f64 {
        self.profile.deficit(self.s_of_r(r), rho)
    }

    fn radius_for_height(&self, s: f64) -> Option<f64> {
        let p = &self.profile;
        if !(s >= p.s_lower) {
            return None;
        }
        let k = self.knot_s.partition_point(|&v| v <= s).saturating_sub(1);
        let xi0 = (self.knot_s[k] - p.s_lower).sqrt();
        let xi = (s - p.s_lower).sqrt();
        Some(self.table.knots()[k] + p.gauss.integrate(xi0, xi, |x| p.integrand(x)))
    }
}

/// Converts an ω-profile into an arclength warping function on `[0, F(s_max))`.
pub fn omega_to_warping(profile: &OmegaProfile, grid_size: usize, s_max: Option<f64>) -> Result<WarpingFunction> {
    omega_to_warping_kind(profile, grid_size, s_max, Kind::ClosedForm)
}

pub(crate) fn omega_to_warping_kind(
    profile: &OmegaProfile,
    grid_size: usize,
    s_max: Option<f64>,
    kind: Kind,
) -> Result<WarpingFunction> {
    if grid_size < 8 {
        return Err(GeomError::InvalidArgument(format!("grid_size = {grid_size} must be at least 8")));
    }
    let s_lo = profile.s_lower;
    let s_end = s_max.unwrap_or_else(|| profile.default_s_max());
    if !(s_end > s_lo) {
        return Err(GeomError::Parameter { family: "omega profile".into(), bound: "s_max > s_lower".into() });
    }
    if let Some(up) = profile.s_upper {
        if s_end >= up {
            return Err(GeomError::Parameter {
                family: "omega profile".into(),
                bound: format!("s_max < upper root {up}"),
            });
        }
    }
    let big_xi = (s_end - s_lo).sqrt();
    let mut r = Vec::with_capacity(grid_size + 1);
    let mut s = Vec::with_capacity(grid_size + 1);
    let mut d1 = Vec::with_capacity(grid_size + 1);
    let mut d2 = Vec::with_capacity(grid_size + 1);
    let mut acc = 0.0;
    let mut prev_xi = 0.0;
    for k in 0..=grid_size {
        let xi = big_xi * k as f64 / grid_size as f64;
        if k > 0 {
            acc += profile.gauss.integrate(prev_xi, xi, |x| profile.integrand(x));
        }
        let sk = if k == grid_size { s_end } else { s_lo + xi * xi };
        let [w, dw, _] = profile.eval(sk);
        r.push(acc);
        s.push(sk);
        d1.push(w.max(0.0).sqrt());
        d2.push(0.5 * dw);
        prev_xi = xi;
    }
    let r_bar = acc;
    let table = QuinticSpline::from_hermite(r, s.clone(), d1, d2)?;
    let warp = OmegaWarping { profile: profile.clone(), table, knot_s: s };
    Ok(WarpingFunction::new(Arc::new(warp), profile.n, r_bar, profile.rho, kind, Variant::Boundary)?
        .mark_truncated())
}
