mod args;
mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::UsageError;
use manifest::{manifest_path, FileDigest, RunManifest};

const USAGE_EXIT: u8 = 1;
const DATA_EXIT: u8 = 2;

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    let out = match cmd {
        Command::Ingest(a) => &a.out,
        Command::Substrate(a) => &a.out,
        Command::Profile(a) => &a.out,
        Command::Shear(a) => &a.out,
        Command::Fit(a) => &a.out,
        Command::Compare(a) => &a.out,
        Command::Stats(a) => &a.out,
        Command::Synth(a) => &a.out,
    };
    out.as_ref().filter(|p| p.as_os_str() != "-")
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)
}

fn execute(cli: &Cli, argv: &[OsString]) -> anyhow::Result<()> {
    let started_at = now();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let outcome = commands::run(&cli.command)?;
    let Some(out) = out_path(&cli.command) else {
        std::io::stdout().lock().write_all(&outcome.bytes)?;
        return Ok(());
    };
    write_file(out, &outcome.bytes)?;
    let config = match serde_json::to_value(&cli.command)? {
        serde_json::Value::Object(mut m) => m.remove(cli.command.name()).unwrap_or_default(),
        v => v,
    };
    let manifest = RunManifest {
        tool: "shearbook",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config,
        seed: outcome.seed,
        threads: cli.threads,
        inputs: outcome.inputs,
        output: FileDigest::of(out, &outcome.bytes),
        started_at,
        finished_at: now(),
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    write_file(&manifest_path(out), &text)?;
    Ok(())
}

fn main() -> ExitCode {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&argv) {
        match config::merge(argv, Path::new(&path)) {
            Ok(merged) => argv = merged,
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(USAGE_EXIT);
            }
        }
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_EXIT),
            };
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                use clap::CommandFactory;
                if let Some(sub) = Cli::command().find_subcommand_mut(cli.command.name()) {
                    let _ = sub.print_help();
                }
                ExitCode::from(USAGE_EXIT)
            } else {
                ExitCode::from(DATA_EXIT)
            }
        }
    }
}
