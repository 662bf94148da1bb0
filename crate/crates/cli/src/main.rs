//! `warpcmc`: condition reports, identity checks, flow runs and CMC experiments on warped products.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_mode, Format, GridModeArg, RunConfig, VariantArg};
use warpcmc::surface::Mode;
use warpcmc::ModelSpec;

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_HYPOTHESIS: u8 = 2;
pub const EXIT_AUDIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "warpcmc", version, about = "Geometry of warped-product ambients: conditions, identities, flows and CMC surfaces")]
#[command(after_help = "Settings are resolved as: command-line flag, then WARPCMC_OUTPUT_DIR (output directory only), then --config file, then built-in defaults.")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in model families.
    Models,
    /// Evaluate the structure conditions and the scalar-curvature extrema.
    Check(CheckArgs),
    /// Minkowski and Heintze-Karcher checks on the configured surface.
    Verify(SurfaceCmd),
    /// Run the conformal normal flow and audit its monotone quantities.
    Flow(FlowArgs),
    /// Solve for CMC surfaces from perturbed slices and test umbilicity.
    Cmc(CmcArgs),
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Model family (see `warpcmc models`).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    curvature: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    table_size: Option<usize>,
    /// Two-column `(s, omega)` file for the tabulated family.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long, value_enum)]
    grid: Option<GridModeArg>,
    #[arg(long)]
    nlat: Option<usize>,
    #[arg(long)]
    nlon: Option<usize>,
    /// Axisymmetric grid size (selects the axisymmetric mode).
    #[arg(long)]
    axi: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SurfaceArgs {
    /// Slice radius in `r`.
    #[arg(long, conflicts_with = "height")]
    radius: Option<f64>,
    /// Slice given by its value of `h`.
    #[arg(long)]
    height: Option<f64>,
    /// Perturbation `degree,order,amplitude`; repeatable, replaces the configured list.
    #[arg(long, value_parser = parse_mode, allow_hyphen_values = true)]
    perturb: Vec<Mode>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Condition set: unprimed for an inner boundary, primed for a ball.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    extrema_size: Option<usize>,
}

#[derive(Args, Debug)]
struct SurfaceCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    surface: SurfaceArgs,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[command(flatten)]
    common: SurfaceCmd,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    epsilon_cut: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args, Debug)]
struct CmcArgs {
    #[command(flatten)]
    common: SurfaceCmd,
    /// Number of random perturbations (0 solves the configured surface only).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    modes_per_run: Option<usize>,
    #[arg(long)]
    cmc_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl ModelArgs {
    fn apply(&self, spec: &mut ModelSpec) {
        if let Some(f) = &self.model {
            if *f != spec.family {
                *spec = ModelSpec::new(f.clone(), spec.n);
            }
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = &self.$field { spec.$field = Some(v.clone()); } )* };
        }
        set!(m, kappa, q, curvature, r_max, s_max, table_size, table);
        if let Some(n) = self.n {
            spec.n = n;
        }
    }
}

impl SurfaceCmd {
    fn apply(&self, c: &mut RunConfig) {
        self.model.apply(&mut c.model);
        let g = &self.grid;
        if let Some(m) = g.grid {
            c.grid.mode = Some(m);
        }
        if let Some(v) = g.nlat {
            c.grid.nlat = v;
        }
        if let Some(v) = g.nlon {
            c.grid.nlon = v;
        }
        if let Some(v) = g.axi {
            c.grid.axi = v;
            c.grid.mode = Some(GridModeArg::Axisymmetric);
        }
        let s = &self.surface;
        if s.radius.is_some() {
            c.surface.radius = s.radius;
            c.surface.height = None;
        }
        if s.height.is_some() {
            c.surface.height = s.height;
            c.surface.radius = None;
        }
        if !s.perturb.is_empty() {
            c.surface.perturb = s.perturb.clone();
        }
    }
}

fn overlay<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    overlay(&mut cfg.format, cli.format);
    match &cli.command {
        Command::Models => {}
        Command::Check(a) => {
            a.model.apply(&mut cfg.model);
            if a.variant.is_some() {
                cfg.variant = a.variant;
            }
            overlay(&mut cfg.grid.check_size, a.grid_size);
            overlay(&mut cfg.grid.extrema_size, a.extrema_size);
        }
        Command::Verify(a) => a.apply(&mut cfg),
        Command::Flow(a) => {
            a.common.apply(&mut cfg);
            if a.dt.is_some() {
                cfg.flow.dt = a.dt;
            }
            overlay(&mut cfg.flow.t_end, a.t_end);
            overlay(&mut cfg.flow.epsilon_cut, a.epsilon_cut);
            overlay(&mut cfg.flow.stride, a.stride);
        }
        Command::Cmc(a) => {
            a.common.apply(&mut cfg);
            let c = &mut cfg.cmc;
            overlay(&mut c.corpus.runs, a.runs);
            overlay(&mut c.corpus.seed, a.seed);
            overlay(&mut c.corpus.amplitude, a.amplitude);
            overlay(&mut c.corpus.max_degree, a.max_degree);
            overlay(&mut c.corpus.modes_per_run, a.modes_per_run);
            overlay(&mut c.cmc_tol, a.cmc_tol);
            overlay(&mut c.max_iter, a.max_iter);
        }
    }
    cfg.validate()?;
    let out = cfg.resolve_output_dir(cli.output_dir.as_deref());
    match cli.command {
        Command::Models => commands::models(&cfg, &out),
        Command::Check(_) => commands::check(&cfg, &out),
        Command::Verify(_) => commands::verify(&cfg, &out),
        Command::Flow(_) => commands::flow(&cfg, &out),
        Command::Cmc(_) => commands::cmc(&cfg, &out),
    }
}

/// Exit code for an error that escaped a command.
fn classify(err: &anyhow::Error) -> u8 {
    use warpcmc::GeomError;
    if err.downcast_ref::<config::ConfigError>().is_some() {
        return EXIT_HYPOTHESIS;
    }
    match err.downcast_ref::<GeomError>() {
        Some(e) if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
        Some(GeomError::InvalidArgument(_) | GeomError::UnknownFamily(_) | GeomError::Table(_) | GeomError::Geometry(_)) => {
            EXIT_HYPOTHESIS
        }
        _ => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
