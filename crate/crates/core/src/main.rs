use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use setyoung::experiment::{run, write_outputs, Command, ExperimentConfig, ExperimentError};

/// Set-valued Young integration experiments.
#[derive(Debug, Parser)]
#[command(name = "setyoung", version)]
struct Cli {
    command: Command,
    /// JSON config: `{"command": ..., "seed": ..., "out_dir": ..., "params": {...}}`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results.json and series.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 when any bound check fails.
    #[arg(long)]
    strict: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        None => ExperimentConfig::new(cli.command, 0, serde_json::json!({})),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ExperimentError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let mut v: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ExperimentError::Usage(format!("{}: {e}", path.display())))?;
            if let Some(obj) = v.as_object_mut() {
                obj.entry("command").or_insert_with(|| serde_json::to_value(cli.command).expect("unit variant"));
            }
            let cfg: ExperimentConfig =
                serde_json::from_value(v).map_err(|e| ExperimentError::Usage(format!("{}: {e}", path.display())))?;
            if cfg.command != cli.command {
                return Err(ExperimentError::Usage(format!(
                    "config is for `{}` but `{}` was requested",
                    cfg.command, cli.command
                )));
            }
            cfg
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = load(&cli).and_then(|cfg| {
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let (params, outcome) = run(&cfg)?;
        write_outputs(&out, &cfg, &params, &outcome)?;
        Ok((out, outcome))
    });
    match result {
        Err(e) => {
            eprintln!("setyoung: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Ok((out, outcome)) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for c in &outcome.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                eprintln!("{mark} {} = {} {} {}", c.name, c.measured.value, rel(c), c.bound.value);
            }
            eprintln!("wrote {}", out.display());
            if cli.strict && !outcome.all_passed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

fn rel(c: &setyoung::experiment::Check) -> &'static str {
    match c.relation {
        setyoung::experiment::Relation::AtMost => "<=",
        setyoung::experiment::Relation::AtLeast => ">=",
    }
}
