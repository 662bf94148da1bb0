use super::omega::{omega_to_warping, OmegaProfile, DEFAULT_TABLE_SIZE};
use super::{require, Admissibility, ModelFamily, ModelSpec};
use crate::error::Result;
use crate::warping::{Variant, WarpingFunction};

fn build_from_omega(family: &dyn ModelFamily, spec: &ModelSpec) -> Result<WarpingFunction> {
    let profile = family.omega_profile(spec).expect("black-hole families define omega")?;
    Ok(omega_to_warping(&profile, spec.table_size.unwrap_or(DEFAULT_TABLE_SIZE), spec.s_max)?
        .with_label(family.name()))
}

/// `ω = 1 - m s^{2-n}`.
pub struct Schwarzschild;

impl ModelFamily for Schwarzschild {
    fn name(&self) -> &'static str {
        "schwarzschild"
    }

    fn summary(&self) -> &'static str {
        "omega(s) = 1 - m s^(2-n), mass m > 0"
    }

    fn variant(&self) -> Variant {
        Variant::Boundary
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        Admissibility::new(spec.m.unwrap_or(f64::NAN), "m > 0")
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        build_from_omega(self, spec)
    }

    fn omega_profile(&self, spec: &ModelSpec) -> Option<Result<OmegaProfile>> {
        Some(require(spec, spec.m, "m").and_then(|m| OmegaProfile::black_hole(spec.n, m, 0.0, 0.0)))
    }
}

/// `ω = 1 - m s^{2-n} - κ s²`.
pub struct DeSitterSchwarzschild;

impl DeSitterSchwarzschild {
    /// `n^n / (4 (n-2)^{n-2}) m² κ^{n-2}`, which must stay below 1 when `κ > 0`.
    pub fn bound_value(n: usize, m: f64, kappa: f64) -> f64 {
        let nn = n as f64;
        nn.powf(nn) / (4.0 * (nn - 2.0).powf(nn - 2.0)) * m * m * kappa.powf(nn - 2.0)
    }
}

impl ModelFamily for DeSitterSchwarzschild {
    fn name(&self) -> &'static str {
        "desitter-schwarzschild"
    }

    fn summary(&self) -> &'static str {
        "omega(s) = 1 - m s^(2-n) - kappa s^2, constant scalar curvature n(n-1) kappa"
    }

    fn variant(&self) -> Variant {
        Variant::Boundary
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        let m = spec.m.unwrap_or(f64::NAN);
        let kappa = spec.kappa.unwrap_or(0.0);
        if !(m > 0.0) || kappa <= 0.0 {
            return Admissibility::new(m, "m > 0");
        }
        let slack = 1.0 - Self::bound_value(spec.n, m, kappa);
        if slack <= m {
            Admissibility::new(slack, "n^n / (4 (n-2)^(n-2)) m^2 kappa^(n-2) < 1")
        } else {
            Admissibility::new(m, "m > 0")
        }
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        build_from_omega(self, spec)
    }

    fn omega_profile(&self, spec: &ModelSpec) -> Option<Result<OmegaProfile>> {
        Some(require(spec, spec.m, "m").and_then(|m| {
            OmegaProfile::black_hole(spec.n, m, spec.kappa.unwrap_or(0.0), 0.0)
        }))
    }
}

/// `ω = 1 - m s^{2-n} + q² s^{4-2n}`.
pub struct ReissnerNordstrom;

impl ModelFamily for ReissnerNordstrom {
    fn name(&self) -> &'static str {
        "reissner-nordstrom"
    }

    fn summary(&self) -> &'static str {
        "omega(s) = 1 - m s^(2-n) + q^2 s^(4-2n), m > 2q > 0"
    }

    fn variant(&self) -> Variant {
        Variant::Boundary
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        let m = spec.m.unwrap_or(f64::NAN);
        let q = spec.q.unwrap_or(f64::NAN);
        let slack = (m - 2.0 * q).min(q);
        Admissibility::new(if slack.is_nan() { f64::NAN } else { slack }, "m > 2q > 0")
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        build_from_omega(self, spec)
    }

    fn omega_profile(&self, spec: &ModelSpec) -> Option<Result<OmegaProfile>> {
        Some(require(spec, spec.m, "m").and_then(|m| {
            let q = require(spec, spec.q, "q")?;
            OmegaProfile::black_hole(spec.n, m, 0.0, q)
        }))
    }
}
