//! Merging a config file into the argument list before parsing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory};

use crate::Cli;

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn given(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefixed = format!("--{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag.as_str() || s.starts_with(&prefixed)
    })
}

/// Appends `--key value` for every config entry whose flag is not already on the
/// command line. Keys are flag names without dashes; `_` and `-` are interchangeable.
pub fn merged_args(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let entries = phiquad::io::read_config(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let root = Cli::command();
    let Some(sub) = argv
        .iter()
        .skip(1)
        .find_map(|a| root.find_subcommand(a.to_string_lossy().as_ref()).cloned())
    else {
        return Ok(argv);
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("`{key}` is not a flag of `{}`", sub.get_name()))?;
        if key == "config" || given(&argv, &key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => extra.push(OsString::from(format!("--{key}"))),
                "false" | "0" | "no" => {}
                other => return Err(format!("`{key}` expects true or false, got `{other}`")),
            },
            _ => {
                extra.push(OsString::from(format!("--{key}")));
                extra.push(OsString::from(value));
            }
        }
    }
    argv.extend(extra);
    Ok(argv)
}
