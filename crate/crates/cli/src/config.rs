//! `--config` files: one `key = value` per line, `#` comments. Keys are long
//! flag names. Values are appended to argv unless the flag is already
//! present, so the command line always wins. Repeating a key repeats the
//! flag.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn present(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let eq = format!("--{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&eq)
    })
}

pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// argv with the config file's settings merged in.
pub fn merge(argv: Vec<OsString>, path: &Path) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let entries = parse_lines(&text)?;
    let mut cmd = Cli::command();
    cmd.build();
    let sub = argv
        .iter()
        .skip(1)
        .find_map(|a| cmd.find_subcommand(a.to_string_lossy().as_ref()))
        .ok_or("a config file needs a subcommand")?;
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err("config files cannot include other config files".into());
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("config key `{key}` is not a flag of `{}`", sub.get_name()))?;
        if present(&argv, &key) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(format!("config key `{key}` is a switch; use true or false")),
            }
        }
    }
    let mut merged = argv;
    merged.extend(extra);
    Ok(merged)
}
