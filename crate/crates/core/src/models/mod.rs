//! Built-in ambient families, selected by name through a registry of [`ModelFamily`] objects.

mod black_hole;
pub mod omega;
mod space_forms;
pub mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::warping::{Variant, WarpingFunction};

pub use black_hole::{DeSitterSchwarzschild, ReissnerNordstrom, Schwarzschild};
pub use omega::{omega_to_warping, BlackHoleOmega, OmegaFn, OmegaProfile, TabulatedOmega};
pub use space_forms::{Euclidean, Hyperbolic, Sphere};
pub use table::TabulatedFamily;

/// Parameters of a model. Unused fields are ignored by families that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default = "default_dim")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    /// Working bound in `r` for space forms with an infinite end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Truncation in `s` for ω-families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    /// Knots of the `r ↦ s` table for ω-families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_size: Option<usize>,
    /// Two-column `(s, ω)` file for the tabulated family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

fn default_dim() -> usize {
    3
}

impl ModelSpec {
    pub fn new(family: impl Into<String>, n: usize) -> Self {
        Self {
            family: family.into(),
            n,
            m: None,
            kappa: None,
            q: None,
            curvature: None,
            r_max: None,
            s_max: None,
            table_size: None,
            table: None,
        }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_curvature(mut self, k: f64) -> Self {
        self.curvature = Some(k);
        self
    }

    pub fn with_r_max(mut self, r: f64) -> Self {
        self.r_max = Some(r);
        self
    }

    pub fn with_s_max(mut self, s: f64) -> Self {
        self.s_max = Some(s);
        self
    }

    pub fn with_table(mut self, path: impl Into<PathBuf>) -> Self {
        self.table = Some(path.into());
        self
    }

    /// Compact one-line description for report headers.
    pub fn describe(&self) -> String {
        let mut s = format!("{} n={}", self.family, self.n);
        for (k, v) in [("m", self.m), ("kappa", self.kappa), ("q", self.q), ("curvature", self.curvature)] {
            if let Some(v) = v {
                s.push_str(&format!(" {k}={v}"));
            }
        }
        if let Some(p) = &self.table {
            s.push_str(&format!(" table={}", p.display()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub ok: bool,
    /// Slack of the binding constraint (positive when admissible).
    pub margin: f64,
    /// The inequality the margin refers to.
    pub bound: String,
}

impl Admissibility {
    pub fn new(margin: f64, bound: impl Into<String>) -> Self {
        Self { ok: margin > 0.0, margin, bound: bound.into() }
    }
}

/// A named family of warping functions.
pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn variant(&self) -> Variant;

    fn admissibility(&self, spec: &ModelSpec) -> Admissibility;

    fn build(&self, spec: &ModelSpec) -> Result<WarpingFunction>;

    /// The area-radius form, for families defined through `ω`.
    fn omega_profile(&self, _spec: &ModelSpec) -> Option<Result<OmegaProfile>> {
        None
    }
}

/// Name-indexed collection of families.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    families: BTreeMap<String, Arc<dyn ModelFamily>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Euclidean));
        r.register(Arc::new(Sphere));
        r.register(Arc::new(Hyperbolic));
        r.register(Arc::new(Schwarzschild));
        r.register(Arc::new(DeSitterSchwarzschild));
        r.register(Arc::new(ReissnerNordstrom));
        r.register(Arc::new(TabulatedFamily));
        r
    }

    /// Adds or replaces a family under its own name.
    pub fn register(&mut self, family: Arc<dyn ModelFamily>) {
        self.families.insert(family.name().to_string(), family);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn ModelFamily>> {
        self.families.get(name).ok_or_else(|| GeomError::UnknownFamily(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.families.keys().map(String::as_str)
    }

    pub fn families(&self) -> impl Iterator<Item = &Arc<dyn ModelFamily>> {
        self.families.values()
    }

    pub fn admissibility(&self, spec: &ModelSpec) -> Result<Admissibility> {
        Ok(self.get(&spec.family)?.admissibility(spec))
    }

    pub fn make_model(&self, spec: &ModelSpec) -> Result<WarpingFunction> {
        let family = self.get(&spec.family)?;
        if spec.n < 3 {
            return Err(GeomError::InvalidArgument(format!("dimension n = {} must be at least 3", spec.n)));
        }
        let adm = family.admissibility(spec);
        if !adm.ok {
            return Err(GeomError::Parameter { family: spec.family.clone(), bound: adm.bound });
        }
        family.build(spec)
    }

    pub fn omega_profile(&self, spec: &ModelSpec) -> Result<Option<OmegaProfile>> {
        self.get(&spec.family)?.omega_profile(spec).transpose()
    }
}

/// Builds a model from the built-in registry.
pub fn make_model(spec: &ModelSpec) -> Result<WarpingFunction> {
    ModelRegistry::with_builtins().make_model(spec)
}

/// Admissibility under the built-in registry.
pub fn admissibility(spec: &ModelSpec) -> Result<Admissibility> {
    ModelRegistry::with_builtins().admissibility(spec)
}

pub(crate) fn require(spec: &ModelSpec, value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| GeomError::InvalidArgument(format!("family `{}` needs parameter `{name}`", spec.family)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_builtins() {
        let r = ModelRegistry::with_builtins();
        let names: Vec<&str> = r.names().collect();
        for want in ["euclidean", "sphere", "hyperbolic", "schwarzschild", "desitter-schwarzschild", "reissner-nordstrom", "tabulated"] {
            assert!(names.contains(&want), "{want}");
        }
    }

    #[test]
    fn unknown_family() {
        assert!(matches!(make_model(&ModelSpec::new("kerr", 3)), Err(GeomError::UnknownFamily(_))));
    }

    #[test]
    fn rn_bound_is_named() {
        let spec = ModelSpec::new("reissner-nordstrom", 3).with_m(1.0).with_q(0.6);
        match make_model(&spec) {
            Err(GeomError::Parameter { bound, .. }) => assert!(bound.contains("m > 2q > 0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_round_trips_through_toml_like_serde() {
        let spec = ModelSpec::new("schwarzschild", 4).with_m(2.0);
        let json = serde_json::to_string(&spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
