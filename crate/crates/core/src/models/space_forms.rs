use super::{Admissibility, ModelFamily, ModelSpec};
use crate::error::Result;
use crate::warping::{Variant, WarpingFunction};

/// Working bound for the infinite end of flat and hyperbolic space.
pub const DEFAULT_R_MAX: f64 = 4.0;

pub struct Euclidean;

impl ModelFamily for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn summary(&self) -> &'static str {
        "flat space, h(r) = r"
    }

    fn variant(&self) -> Variant {
        Variant::Ball
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        Admissibility::new(spec.r_max.unwrap_or(DEFAULT_R_MAX), "r_max > 0")
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        Ok(WarpingFunction::euclidean(spec.n, spec.r_max.unwrap_or(DEFAULT_R_MAX))?.mark_truncated())
    }
}

pub struct Sphere;

impl ModelFamily for Sphere {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn summary(&self) -> &'static str {
        "open hemisphere of curvature k, h(r) = sin(sqrt(k) r)/sqrt(k)"
    }

    fn variant(&self) -> Variant {
        Variant::Ball
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        Admissibility::new(spec.curvature.unwrap_or(1.0), "curvature > 0")
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        WarpingFunction::sphere(spec.n, spec.curvature.unwrap_or(1.0))
    }
}

pub struct Hyperbolic;

impl ModelFamily for Hyperbolic {
    fn name(&self) -> &'static str {
        "hyperbolic"
    }

    fn summary(&self) -> &'static str {
        "hyperbolic space of curvature -k, h(r) = sinh(sqrt(k) r)/sqrt(k)"
    }

    fn variant(&self) -> Variant {
        Variant::Ball
    }

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility {
        let k = spec.curvature.unwrap_or(1.0);
        let r = spec.r_max.unwrap_or(DEFAULT_R_MAX);
        if k <= 0.0 {
            Admissibility::new(k, "curvature > 0")
        } else {
            Admissibility::new(r, "r_max > 0")
        }
    }

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        Ok(WarpingFunction::hyperbolic(spec.n, spec.curvature.unwrap_or(1.0), spec.r_max.unwrap_or(DEFAULT_R_MAX))?.mark_truncated())
    }
}
