use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "biharm", version, about = "Numerical lab for the equivariant biharmonic map heat flow")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "biharm-out")]
    pub out: PathBuf,
    /// Flat `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the nested-operator reduction with the closed form on refining grids.
    ReduceCheck(ReduceCheck),
    /// Integrate one phase-space orbit.
    Orbit(OrbitCmd),
    /// Classify unstable-manifold seeds on a circle.
    ClassifySweep(ClassifySweep),
    /// Run a numerical certificate.
    Certify(Certify),
    /// Construct a steady profile with prescribed boundary value.
    Map(MapCmd),
    /// Bi-energy of a bubble or a constructed map.
    Energy(EnergyCmd),
    /// Evolve the reduced heat flow on [0, 1].
    Flow(FlowCmd),
    /// Empirical nonexistence constant over an epsilon ladder.
    KEstimate(KEstimateCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ReduceCheck(_) => "reduce-check",
            Command::Orbit(_) => "orbit",
            Command::ClassifySweep(_) => "classify-sweep",
            Command::Certify(_) => "certify",
            Command::Map(_) => "map",
            Command::Energy(_) => "energy",
            Command::Flow(_) => "flow",
            Command::KEstimate(_) => "k-estimate",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::ReduceCheck(c) => &c.common,
            Command::Orbit(c) => &c.common,
            Command::ClassifySweep(c) => &c.common,
            Command::Certify(c) => &c.common,
            Command::Map(c) => &c.common,
            Command::Energy(c) => &c.common,
            Command::Flow(c) => &c.common,
            Command::KEstimate(c) => &c.common,
        }
    }

    /// Resolved parameters as a JSON object with kebab-case keys.
    pub fn config_value(&self) -> serde_json::Value {
        let v = match self {
            Command::ReduceCheck(c) => serde_json::to_value(c),
            Command::Orbit(c) => serde_json::to_value(c),
            Command::ClassifySweep(c) => serde_json::to_value(c),
            Command::Certify(c) => serde_json::to_value(c),
            Command::Map(c) => serde_json::to_value(c),
            Command::Energy(c) => serde_json::to_value(c),
            Command::Flow(c) => serde_json::to_value(c),
            Command::KEstimate(c) => serde_json::to_value(c),
        };
        v.expect("argument structs serialize")
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Second,
    Fourth,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReduceCheck {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "129,257,513")]
    pub grids: Vec<usize>,
    #[arg(long, value_enum, default_value = "second")]
    pub order: Order,
    #[arg(long, default_value_t = 0.1)]
    pub band_lo: f64,
    #[arg(long, default_value_t = 0.9)]
    pub band_hi: f64,
    /// Required convergence order.
    #[arg(long, default_value_t = 1.8)]
    pub min_rate: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    Unstable,
    Heteroclinic,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OrbitCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "unstable")]
    pub seed: SeedKind,
    /// Seed coordinates in the (phi1, phi3) plane of the unstable subspace.
    #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
    pub phi1: f64,
    #[arg(long, default_value_t = 9e-4, allow_hyphen_values = true)]
    pub phi3: f64,
    /// Start time for heteroclinic seeds.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub s0: f64,
    #[arg(long, default_value_t = 40.0)]
    pub span: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub blowup_norm: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifySweep {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 64)]
    pub seeds: usize,
    #[arg(long, default_value_t = 40.0)]
    pub span: f64,
    #[arg(long, default_value_t = 640.0)]
    pub max_span: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertKind {
    Qgrad,
    Cones,
    Blowup,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FyRangeArg {
    Tight,
    Coarse,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Certify {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(value_enum)]
    pub kind: CertKind,
    /// x-grid size for the Q-gradient scan.
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    #[arg(long, default_value_t = 1000)]
    pub fy_grid: usize,
    #[arg(long, value_enum, default_value = "tight")]
    pub fy_range: FyRangeArg,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2024)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed radius for the blowup fit; the seed is eps·(1, 9).
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingArg {
    First,
    Last,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MapCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Boundary value psi(1).
    #[arg(long, allow_hyphen_values = true)]
    pub target: f64,
    #[arg(long, default_value_t = 257)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value = "last")]
    pub crossing: CrossingArg,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub seed_eps: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EnergyCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Use the bubble 2 arctan(lambda r).
    #[arg(long, conflicts_with = "target")]
    pub bubble: bool,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Use the constructed map with this boundary value.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<f64>,
    /// `all` or a ball radius.
    #[arg(long, default_value = "all")]
    pub domain: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Implicit,
    Explicit,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FlowCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// psi(t, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub a0: f64,
    /// d/dr psi(t, 1).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a1: f64,
    #[arg(long, default_value_t = 257)]
    pub nodes: usize,
    #[arg(long, default_value_t = 4)]
    pub dim: u32,
    #[arg(long, value_enum, default_value = "implicit")]
    pub scheme: SchemeArg,
    /// Explicit step factor: dt = c h^4.
    #[arg(long, default_value_t = biharm::flow::EXPLICIT_C_SAFETY)]
    pub c_safety: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub steady_tol: f64,
    #[arg(long, default_value_t = 1e3)]
    pub gradient_cap: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub err_tol: f64,
    #[arg(long)]
    pub fixed_dt: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    /// Record the profile every this many steps (0: never).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Uniform,
    Resonant,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct KEstimateCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 100.0)]
    pub span: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}
