use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rbc", version, about = "Regularized regression by composition for binary outcomes")]
pub struct Cli {
    /// key = value configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a three-flow model and write coefficients, trace and metadata.
    Fit(ModelArgs),
    /// Cross-validate the tuning weights without a final fit.
    Cv(ModelArgs),
    /// L'Abbé curve of a fitted model for a change in one covariate.
    Labbe(LabbeArgs),
    /// Run the simulation scenarios.
    Simulate(SimulateArgs),
    /// Tabulate the flat likelihood ridge and its penalized counterpart.
    DemoNonident(DemoArgs),
    /// Write the synthetic asthma sample.
    GenSample(GenSampleArgs),
}

/// Model and data flags shared by `fit` and `cv`.
///
/// Binary text cells are coded female=1, male=0, yes=1, no=0.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory (created when missing).
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    /// Binary outcome column [default: asthma when present].
    #[arg(long)]
    pub outcome: Option<String>,
    /// Comma list of ScOdds covariates [default: every other column].
    #[arg(long)]
    pub odds: Option<String>,
    /// Comma list of ScRisk1 covariates, or "none" [default: lead when present].
    #[arg(long)]
    pub risk1: Option<String>,
    /// Comma list of ScRisk0 covariates, or "none" [default: lead when present].
    #[arg(long)]
    pub risk0: Option<String>,
    /// Intercept flags for odds,risk1,risk0 [default: 1,0,0].
    #[arg(long)]
    pub intercepts: Option<String>,
    /// none, lasso, ridge, elastic-net or adaptive.
    #[arg(long)]
    pub penalty_odds: Option<String>,
    #[arg(long)]
    pub penalty_risk1: Option<String>,
    #[arg(long)]
    pub penalty_risk0: Option<String>,
    /// A tuning weight for every penalized flow, or "cv" [default: cv].
    #[arg(long)]
    pub lambda: Option<String>,
    /// Elastic-net mixing weight on the L1 part [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Cross-validation folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// CV selection rule: min or 1se [default: min].
    #[arg(long)]
    pub cv_rule: Option<String>,
    /// Seed for fold assignment [fallback: RBC_SEED, then 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// z-standardize non-binary covariates: true or false [default: true].
    #[arg(long)]
    pub standardize: Option<String>,
    /// Iteration cap of the optimizer [default: 500].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative objective change that ends the fit [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct LabbeArgs {
    /// Coefficient table written by `fit` [default: <outdir>/coefficients.csv].
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// Scaling table written by `fit` [default: scaling.csv next to the coefficients, if present].
    #[arg(long)]
    pub scaling: Option<PathBuf>,
    /// Raw data, used for the default exposure change.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    /// Exposure covariate [default: lead].
    #[arg(long)]
    pub exposure: Option<String>,
    /// Change in the exposure, in its original units [default: sample mean of the exposure].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of control probabilities [default: 99].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    /// Sample size [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma list of presets, or "all" [default: all].
    #[arg(long)]
    pub preset: Option<String>,
    /// Replications per scenario [default: 30].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed [fallback: RBC_SEED, then 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma list of methods [default: unregularized,lasso,ridge,elastic-net].
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub outdir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct DemoArgs {
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    /// L1 weight on both risk flows [default: 1].
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct GenSampleArgs {
    /// Output file [default: data/asthma_synthetic.csv].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// [default: 2012]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: 1200]
    #[arg(long)]
    pub rows: Option<usize>,
}
