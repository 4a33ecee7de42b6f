use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "invfield", version, about = "Invariant random fields on S2 and S3")]
pub struct Cli {
    /// Upper bound on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a mixing witness (exit 0 Mixing, 2 NotMixing, 3 Inconclusive).
    CheckMixing(CheckMixingArgs),
    /// Draw coefficient vectors and write them as CSV.
    Simulate(SimulateArgs),
    /// Run a hypothesis test on CSV draws or on an inline sampler (exit 0 pass, 2 reject).
    Test(TestArgs),
    /// Estimate the coefficient covariance of the rank-one invariant field.
    DemoNonorthogonal(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    S2,
    S3,
    Su2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Torus,
    Random,
    Translated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Gaussian,
    UniformDisc,
    TwoPoint,
    Bijoux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Invariance,
    Structure,
    Gaussianity,
    Phase,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "s2")]
    pub space: Space,
    /// SU(2) degree of the module (S2 needs it even).
    #[arg(long, default_value_t = 4)]
    pub ell: usize,
    #[arg(long, value_enum, default_value = "torus")]
    pub basis: BasisKind,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckMixingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = invfield::mixing::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = invfield::mixing::DEFAULT_TOL)]
    pub tol: f64,
    /// Also run the orbit-span orthogonality criterion.
    #[arg(long)]
    pub orbit: bool,
    /// Also produce the exact polynomial certificate (S3, torus basis).
    #[arg(long)]
    pub exact: bool,
    /// Evaluate a given element: "α,β,γ" Euler angles (ZYZ) on S2, two
    /// triples "α1,β1,γ1,α2,β2,γ2" on S3.
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: Dist,
    /// Variance parameter of the Gaussian marginal.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Radius of the uniform-disc marginal.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Modulus of the two-point marginal.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Bijoux weights, comma separated complex numbers such as "1,0.5+2i".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    /// Number of draws.
    #[arg(long = "n", visible_alias = "samples", default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_enum, default_value = "invariance")]
    pub kind: TestKind,
    /// CSV draws in the `sample_id,k,re,im` format; an inline sampler is used when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Number of random group elements for the invariance test.
    #[arg(long, default_value_t = 10)]
    pub n_g: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Rotate by the witness found by check-mixing on the same basis.
    #[arg(long)]
    pub witness: bool,
    /// Phase angle for the phase test, radians.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Significance level deciding the exit code.
    #[arg(long, default_value_t = 0.01)]
    pub level: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    #[arg(long = "n", visible_alias = "samples", default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the plot-ready covariance table as CSV here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}
