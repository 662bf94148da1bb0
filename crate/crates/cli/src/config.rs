//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use warpcmc::cmc::CorpusSpec;
use warpcmc::models::{ModelRegistry, ModelSpec};
use warpcmc::sphere::{SphereGrid, DEFAULT_AXI, DEFAULT_NLAT, DEFAULT_NLON};
use warpcmc::surface::{GraphSurface, Mode};
use warpcmc::{GeomError, WarpingFunction};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "WARPCMC_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "warpcmc-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Table,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Boundary,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GridModeArg {
    Full,
    Axisymmetric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Defaults to full for `n = 3` and axisymmetric otherwise.
    pub mode: Option<GridModeArg>,
    pub nlat: usize,
    pub nlon: usize,
    pub axi: usize,
    /// Radii used by the condition report.
    pub check_size: usize,
    /// Radii used by the extremum scan.
    pub extrema_size: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            mode: None,
            nlat: DEFAULT_NLAT,
            nlon: DEFAULT_NLON,
            axi: DEFAULT_AXI,
            check_size: 512,
            extrema_size: 1024,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    /// Slice radius in the `r` coordinate.
    pub radius: Option<f64>,
    /// Slice given by the value of `h` (the area radius `s` for black-hole families).
    pub height: Option<f64>,
    /// Harmonic perturbations `[degree, order, amplitude]`.
    pub perturb: Vec<Mode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// Output step; defaults to the maximal substep `1e-3 r̄`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub epsilon_cut: f64,
    pub stride: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { dt: None, t_end: 1.0, epsilon_cut: warpcmc::flow::EPSILON_CUT, stride: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CmcConfig {
    pub cmc_tol: f64,
    pub max_iter: usize,
    pub dt_factor: f64,
    /// Random perturbations of the configured slice; `runs = 0` solves the configured surface only.
    pub corpus: CorpusSpec,
}

impl Default for CmcConfig {
    fn default() -> Self {
        let o = warpcmc::cmc::CmcOptions::default();
        Self { cmc_tol: o.cmc_tol, max_iter: o.max_iter, dt_factor: o.dt_factor, corpus: CorpusSpec { runs: 0, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub variant: Option<VariantArg>,
    pub grid: GridConfig,
    pub surface: SurfaceConfig,
    pub flow: FlowConfig,
    pub cmc: CmcConfig,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::new("schwarzschild", 3).with_m(1.0),
            variant: None,
            grid: GridConfig::default(),
            surface: SurfaceConfig::default(),
            flow: FlowConfig::default(),
            cmc: CmcConfig::default(),
            output_dir: None,
            format: Format::Table,
        }
    }
}

/// A configuration problem that maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| bad(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let g = &self.grid;
        if !(4..=512).contains(&g.nlat) || !(8..=1024).contains(&g.nlon) || g.nlon % 2 != 0 {
            return Err(bad(format!("full grid {}x{} outside 4..=512 x even 8..=1024", g.nlat, g.nlon)));
        }
        if !(8..=4096).contains(&g.axi) {
            return Err(bad(format!("axisymmetric size {} outside 8..=4096", g.axi)));
        }
        if g.check_size < 16 || g.extrema_size < 64 {
            return Err(bad("check_size must be >= 16 and extrema_size >= 64"));
        }
        let f = &self.flow;
        if f.dt.is_some_and(|d| !(d > 0.0)) || !(f.t_end > 0.0) || !(f.epsilon_cut > 0.0 && f.epsilon_cut < 1.0) || f.stride == 0 {
            return Err(bad("flow needs dt > 0, t_end > 0, 0 < epsilon_cut < 1 and stride >= 1"));
        }
        let c = &self.cmc;
        if !(c.cmc_tol > 0.0) || !(c.dt_factor > 0.0) || !(c.corpus.amplitude >= 0.0) || c.corpus.max_degree == 0 {
            return Err(bad("cmc needs cmc_tol > 0, dt_factor > 0, amplitude >= 0 and max_degree >= 1"));
        }
        if self.surface.radius.is_some() && self.surface.height.is_some() {
            return Err(bad("give either surface.radius or surface.height, not both"));
        }
        Ok(())
    }

    /// Output directory: flag, then environment, then config, then the default.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn build_model(&self, registry: &ModelRegistry) -> Result<WarpingFunction, GeomError> {
        registry.make_model(&self.model)
    }

    pub fn grid_mode(&self) -> GridModeArg {
        self.grid.mode.unwrap_or(if self.model.n == 3 { GridModeArg::Full } else { GridModeArg::Axisymmetric })
    }

    pub fn build_grid(&self) -> anyhow::Result<Arc<SphereGrid>> {
        let grid = match self.grid_mode() {
            GridModeArg::Full => {
                if self.model.n != 3 {
                    return Err(bad(format!("full grids need n = 3 (got n = {}); use the axisymmetric mode", self.model.n)));
                }
                SphereGrid::full(self.grid.nlat, self.grid.nlon)?
            }
            GridModeArg::Axisymmetric => SphereGrid::axisymmetric(self.model.n, self.grid.axi)?,
        };
        Ok(Arc::new(grid))
    }

    /// Radius of the base slice.
    pub fn base_radius(&self, w: &WarpingFunction) -> Result<f64, GeomError> {
        match (self.surface.radius, self.surface.height) {
            (Some(r), _) => Ok(r),
            (None, Some(s)) => w.radius_for_height(s),
            (None, None) => Ok(0.5 * w.r_bar()),
        }
    }

    pub fn build_surface(&self, w: &WarpingFunction, grid: Arc<SphereGrid>, modes: &[Mode]) -> Result<GraphSurface, GeomError> {
        let r0 = self.base_radius(w)?;
        GraphSurface::slice(w, grid, r0)?.perturb(modes)
    }
}

/// Parses `l,m,a` into a perturbation mode.
pub fn parse_mode(s: &str) -> Result<Mode, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected `degree,order,amplitude`, got `{s}`"));
    }
    let l = parts[0].parse::<usize>().map_err(|e| format!("degree: {e}"))?;
    let m = parts[1].parse::<i64>().map_err(|e| format!("order: {e}"))?;
    let a = parts[2].parse::<f64>().map_err(|e| format!("amplitude: {e}"))?;
    Ok((l, m, a))
}
