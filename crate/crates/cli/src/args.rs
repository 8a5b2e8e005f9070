// SPDX-License-Identifier: Apache-2.0

//! Command tree. Every variant except `reproduce` serializes into the
//! effective config and deserializes back with unknown keys rejected.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "onosf", version, about = "Online adversarial block sources: analysis, attacks, condensers and protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// `csv`, `json` or `jsonl` for stdout; anything else is an output path
    /// whose extension picks the format (csv unless .json or .jsonl).
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Budget preset: small, default or large. LAB_BUDGET overrides it.
    #[arg(long, global = true, default_value = "default")]
    pub budget: String,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Influence and Fourier analysis of Boolean functions.
    #[command(subcommand)]
    Boolfn(BoolfnCmd),
    /// Coalition attacks on Boolean functions.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Exact and sampled adversary values on block sources.
    #[command(subcommand)]
    Sources(SourcesCmd),
    /// Seeded and two-source primitives.
    #[command(subcommand)]
    Prims(PrimsCmd),
    /// Condenser pipelines and parameter calculators.
    #[command(subcommand)]
    Condense(CondenseCmd),
    /// Leader-election protocol simulation.
    #[command(subcommand)]
    Protocol(ProtocolCmd),
    /// Runs the invariant suite at the selected budget.
    VerifyAll,
    /// Re-runs a previously written config.
    #[serde(skip)]
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnArgs {
    /// parity, maj, addr, dict:<i>, const:<0|1>, random:<seed>, or a hex truth table.
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(long)]
    pub ell: u32,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoolfnCmd {
    /// Per-coordinate influence and online influence.
    Analyze(FnArgs),
    /// Both sides of the Poincare inequality.
    Poincare(FnArgs),
    /// Nonzero Fourier coefficients.
    Fourier(FnArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedyArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(long)]
    pub ell: u32,
    #[arg(long)]
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpossibilityArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(long)]
    pub ell: u32,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasBudgetArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub ell: u32,
    /// Coalition size.
    #[arg(long)]
    pub b: u32,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackCmd {
    /// Greedy online coalition reaching expectation beta.
    Greedy(GreedyArgs),
    /// Small coalition biasing a balanced function by eps.
    Impossibility(ImpossibilityArgs),
    /// Expectation reachable by b controlled bits from alpha.
    Budget(BiasBudgetArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceArgs {
    /// Function of all `blocks * n` bits; same syntax as `boolfn --fn`.
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(long)]
    pub blocks: usize,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Good-block min-entropy; defaults to n.
    #[arg(long)]
    pub k: Option<u32>,
    /// Comma-separated 1-based bad blocks.
    #[arg(long, value_delimiter = ',')]
    pub bad: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SourceAdversaryArg {
    /// Exact maximiser of E f.
    CrowdMax,
    /// Exact minimiser of E f.
    CrowdMin,
    /// Uniform bits.
    Random,
    /// All-zero blocks.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "crowd_max")]
    pub adversary: SourceAdversaryArg,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourcesCmd {
    /// Exact oI_B by backward induction.
    Bias(SourceArgs),
    /// oI_B by enumerating deterministic strategies.
    Brute(SourceArgs),
    /// Monte Carlo estimate of E f under a fixed adversary.
    Mc(McArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum PrimKind {
    SeededExt,
    SeededCond,
    TwoSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Toeplitz hashing, seed width n + m - 1.
    Lhl,
    /// Truncated GF(2^n) product, seed width n.
    Gf2,
    /// Inner product over GF(2^n), two n-bit sources.
    Ip,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum, conflicts_with = "object")]
    pub construction: Option<Construction>,
    /// JSON file holding a searched object, as written by `prims search --save`.
    #[arg(long)]
    pub object: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Source min-entropy (first source for two-source extractors).
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub k2: Option<u32>,
    /// Claimed output min-entropy for condensers.
    #[arg(long)]
    pub k_out: Option<f64>,
    #[arg(long)]
    pub strong: bool,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchArgs {
    #[arg(long, value_enum)]
    pub kind: PrimKind,
    /// Source width (first source for two-source extractors).
    #[arg(long)]
    pub n: u32,
    /// Seed width, or second-source width for two-source extractors.
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub k2: Option<u32>,
    #[arg(long)]
    pub k_out: Option<f64>,
    #[arg(long)]
    pub strong: bool,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub tries: u64,
    /// Writes the verified object as JSON.
    #[arg(long)]
    pub save: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftArgs {
    #[arg(long)]
    pub k1: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimsCmd {
    /// Exact verification against every flat source.
    Verify(VerifyArgs),
    /// Seeded random search for a passing object.
    Search(SearchArgs),
    /// Average-case strong parameters of a two-source extractor.
    Lift(LiftArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Xor,
    Split,
    Sliding,
    Address,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub pipeline: Pipeline,
    /// JSON pipeline config; always carries the block width `n`.
    #[arg(long)]
    pub config: String,
    /// Whitespace- or comma-separated hex blocks.
    #[arg(long)]
    pub blocks: String,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsArgs {
    #[arg(long)]
    pub theorem: String,
    /// Comma-separated `name=value` pairs.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XorSearchArgs {
    #[arg(long, default_value_t = 2)]
    pub ell: usize,
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    /// Seed prefix length per block, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 2])]
    pub n_y: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, default_value_t = 20)]
    pub tries: u64,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CondenseCmd {
    /// Applies a pipeline to one input.
    Run(RunArgs),
    /// Closed-form parameters of a construction.
    Params(ParamsArgs),
    /// Searches XOR-condenser extractors and runs the exact adversary harness.
    XorSearch(XorSearchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    OneBit,
    MultiBit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum PlayerAdversaryArg {
    /// Greedy rushing adversary.
    Crowd,
    /// Bad players always send 0.
    Constant,
    /// No bad players.
    Honest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum FinalStageArg {
    Index,
    Lowest,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectArgs {
    #[arg(long)]
    pub ell: usize,
    /// Bad fraction; the bad set is the lowest floor(delta * ell) ids.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "one_bit")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "crowd")]
    pub adversary: PlayerAdversaryArg,
    #[arg(long = "final", value_enum, default_value = "index")]
    #[serde(rename = "final")]
    pub final_stage: FinalStageArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 3.2)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub c1: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptArgs {
    #[arg(long)]
    pub ell: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "one_bit")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "crowd")]
    pub adversary: PlayerAdversaryArg,
    #[arg(long = "final", value_enum, default_value = "index")]
    #[serde(rename = "final")]
    pub final_stage: FinalStageArg,
    #[arg(long, default_value_t = 3.2)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub c1: f64,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolCmd {
    /// Monte Carlo good-leader frequency and survivor counts.
    Elect(ElectArgs),
    /// Checks the stage-1 survivor bounds trial by trial.
    Survivors(ElectArgs),
    /// One run as (round, player, message) rows.
    Transcript(TranscriptArgs),
}

#[derive(Clone, Debug, PartialEq, Args)]
pub struct ReproduceArgs {
    /// Config written by an earlier run.
    pub config: String,
}
