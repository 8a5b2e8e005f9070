// SPDX-License-Identifier: Apache-2.0

//! `onosf` command-line runner.
//!
//! Exit codes: 0 success, 1 internal error or failed check, 2 infeasible
//! parameters or exhausted budget, 64 malformed input.

mod args;
mod ops;
mod table;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use onosf::Budget;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use args::{Cli, Command};
use ops::{Ctx, Status};
use table::Format;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment override for the budget: a preset name or a JSON object of
/// budget fields layered over the default preset.
pub const BUDGET_ENV: &str = "LAB_BUDGET";

#[derive(Debug)]
pub enum CliError {
    Core(onosf::Error),
    /// Malformed arguments, config or input files.
    Usage(String),
    Internal(String),
}

impl From<onosf::Error> for CliError {
    fn from(e: onosf::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) | CliError::Internal(s) => f.write_str(s),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use onosf::Error as E;
        match self {
            CliError::Core(E::BudgetExceeded { .. } | E::Infeasible(_) | E::NoPassingObject { .. } | E::InvalidParameter { .. }) => 2,
            CliError::Core(E::Malformed(_) | E::Unknown(_) | E::WidthMismatch { .. } | E::IndexOutOfRange { .. }) => 64,
            CliError::Core(_) | CliError::Internal(_) => 1,
            CliError::Usage(_) => 64,
        }
    }
}

/// Everything needed to re-run a command. Written next to every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    tool_version: String,
    command: Command,
    seed: u64,
    format: Format,
    budget: Budget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u64>,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Internal(e.to_string()))
}

/// Overlays `patch` on the default budget, rejecting unknown fields.
fn merge_budget(patch: &Value) -> Result<Budget, CliError> {
    let Value::Object(patch) = patch else {
        return Err(CliError::Usage("budget must be a preset name or a JSON object".into()));
    };
    let Value::Object(mut base) = to_value(&Budget::default())? else { unreachable!("budget is a struct") };
    for (k, v) in patch {
        if !base.contains_key(k) {
            let known: Vec<&str> = base.keys().map(String::as_str).collect();
            return Err(CliError::Usage(format!("unknown budget field `{k}`; known: {}", known.join(", "))));
        }
        base.insert(k.clone(), v.clone());
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("budget: {e}")))
}

fn resolve_budget(flag: &str, env: Option<&str>) -> Result<Budget, CliError> {
    let src = env.map(str::trim).filter(|s| !s.is_empty()).unwrap_or(flag);
    if src.starts_with('{') {
        let v: Value = serde_json::from_str(src).map_err(|e| CliError::Usage(format!("{BUDGET_ENV}: {e}")))?;
        merge_budget(&v)
    } else {
        Ok(Budget::preset(src)?)
    }
}

fn load_config(path: &str) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    // Budget fields get the same unknown-key check as the rest.
    if let Some(b) = v.get("budget") {
        let full = merge_budget(b)?;
        v["budget"] = to_value(&full)?;
    }
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

enum Dest {
    Stdout,
    File(String),
}

fn parse_out(out: Option<&str>, default: Format) -> (Format, Dest) {
    match out {
        None => (default, Dest::Stdout),
        Some("csv") => (Format::Csv, Dest::Stdout),
        Some("json") => (Format::Json, Dest::Stdout),
        Some("jsonl") => (Format::Jsonl, Dest::Stdout),
        Some(path) => {
            let ext = Path::new(path).extension().and_then(|e| e.to_str()).unwrap_or("");
            let format = match ext {
                "json" => Format::Json,
                "jsonl" => Format::Jsonl,
                _ => Format::Csv,
            };
            (format, Dest::File(path.to_string()))
        }
    }
}

fn execute(cfg: &ExperimentConfig, dest: &Dest) -> Result<Status, CliError> {
    let start = Instant::now();
    let outcome = ops::run(&cfg.command, &Ctx { seed: cfg.seed, budget: &cfg.budget })?;
    let metadata = serde_json::json!({
        "tool": "onosf",
        "tool_version": cfg.tool_version,
        "seed": cfg.seed,
        "config": to_value(cfg)?,
    });
    let rendered = outcome.table.render(cfg.format, &metadata)?;
    let echo = ExperimentConfig { wall_time_ms: Some(start.elapsed().as_millis() as u64), ..cfg.clone() };
    let internal = |e: std::io::Error| CliError::Internal(e.to_string());
    match dest {
        Dest::Stdout => {
            std::io::stdout().write_all(rendered.as_bytes()).map_err(internal)?;
            let line = serde_json::to_string(&echo).map_err(|e| CliError::Internal(e.to_string()))?;
            eprintln!("config: {line}");
        }
        Dest::File(path) => {
            std::fs::write(path, rendered).map_err(|e| CliError::Internal(format!("cannot write {path}: {e}")))?;
            let text = serde_json::to_string_pretty(&echo).map_err(|e| CliError::Internal(e.to_string()))?;
            let side = format!("{path}.config.json");
            std::fs::write(&side, text + "\n").map_err(|e| CliError::Internal(format!("cannot write {side}: {e}")))?;
        }
    }
    Ok(outcome.status)
}

fn main_inner(cli: Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    if let Command::Reproduce(r) = &cli.command {
        let mut cfg = load_config(&r.config)?;
        if cfg.tool_version != TOOL_VERSION {
            eprintln!("warning: config written by version {}, running {TOOL_VERSION}", cfg.tool_version);
        }
        cfg.wall_time_ms = None;
        let (format, dest) = parse_out(cli.out.as_deref(), cfg.format);
        cfg.format = format;
        return execute(&cfg, &dest);
    }
    let env = std::env::var(BUDGET_ENV).ok();
    let budget = resolve_budget(&cli.budget, env.as_deref())?;
    let (format, dest) = parse_out(cli.out.as_deref(), Format::Csv);
    let cfg = ExperimentConfig {
        tool_version: TOOL_VERSION.into(),
        command: cli.command,
        seed: cli.seed,
        format,
        budget,
        wall_time_ms: None,
    };
    execute(&cfg, &dest)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(2),
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
