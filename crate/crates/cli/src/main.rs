//! tmlab: batch experiments on the curvature-constrained exponential
//! functional over closed triangulated surfaces.
//!
//! Usage: `tmlab <command> [--config <file>] [--set key=value ...] --out <dir>`
//!
//! Every run writes manifest.txt (the full resolved configuration — itself
//! a valid config file), results.csv, summary.txt and command-specific
//! vector files. Fixed seeds give bit-identical outputs across runs on the
//! same platform.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use config::RunConfig;
use error::CliError;
use output::OutDir;

const COMMANDS: &[&str] = &[
    "mesh",
    "eigen",
    "maximize",
    "sweep",
    "sharpness",
    "green",
    "phi-eps",
    "probe-cc",
    "probe-bubble",
    "liouville",
    "verify-t4",
];

fn usage() -> String {
    format!(
        "usage: tmlab <command> [--config <file>] [--set key=value ...] --out <dir>\n\
         commands: {}",
        COMMANDS.join(", ")
    )
}

fn run() -> Result<(), CliError> {
    let mut args = std::env::args().skip(1);
    let command = args.next().ok_or_else(|| CliError::usage(usage()))?;
    if !COMMANDS.contains(&command.as_str()) {
        return Err(CliError::usage(format!(
            "unknown command '{command}'\n{}",
            usage()
        )));
    }
    let mut config = RunConfig::default();
    let mut out_dir: Option<PathBuf> = None;
    let mut overrides: Vec<String> = Vec::new();
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--config" => {
                let path = args
                    .next()
                    .ok_or_else(|| CliError::usage("--config requires a path"))?;
                config = RunConfig::from_file(std::path::Path::new(&path))?;
            }
            "--set" => {
                overrides.push(
                    args.next()
                        .ok_or_else(|| CliError::usage("--set requires key=value"))?,
                );
            }
            "--out" => {
                out_dir = Some(PathBuf::from(
                    args.next()
                        .ok_or_else(|| CliError::usage("--out requires a directory"))?,
                ));
            }
            other => return Err(CliError::usage(format!("unknown argument '{other}'"))),
        }
    }
    for assignment in &overrides {
        config.set(assignment)?;
    }
    let out_dir = out_dir.ok_or_else(|| CliError::usage("--out <dir> is required"))?;
    let out = OutDir::create(&out_dir)?;

    let result = match command.as_str() {
        "mesh" => commands::cmd_mesh(&mut config, &out),
        "eigen" => commands::cmd_eigen(&mut config, &out),
        "maximize" => commands::cmd_maximize(&mut config, &out),
        "sweep" => commands::cmd_sweep(&mut config, &out),
        "sharpness" => commands::cmd_sharpness(&mut config, &out),
        "green" => commands::cmd_green(&mut config, &out),
        "phi-eps" => commands::cmd_phi_eps(&mut config, &out),
        "probe-cc" => commands::cmd_probe_cc(&mut config, &out),
        "probe-bubble" => commands::cmd_probe_bubble(&mut config, &out),
        "liouville" => commands::cmd_liouville(&mut config, &out),
        "verify-t4" => commands::cmd_verify_t4(&mut config, &out),
        _ => unreachable!(),
    };
    // the manifest reflects the fully-resolved inputs; written last so a
    // failed run leaves no half-described outputs behind
    result?;
    out.write("manifest.txt", &config.manifest_lines(&command))?;
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
