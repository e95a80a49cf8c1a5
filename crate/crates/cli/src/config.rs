//! Flat `key=value` config files, spliced into the argument list so that
//! command-line flags given later take precedence.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

/// Parse a config file body into `(key, value)` pairs. Blank lines and
/// lines starting with `#` are ignored; keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value", i + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        out.push((key, value.trim().to_owned()));
    }
    Ok(out)
}

/// Turn pairs into flags. `true` becomes a bare switch and `false` is left
/// out; repeatable keys may appear several times.
pub fn to_flags(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => flags.push(format!("--{}", key).into()),
            "false" => {}
            _ => {
                flags.push(format!("--{}", key).into());
                flags.push(value.into());
            }
        }
    }
    flags
}

/// Remove `--config PATH` (or `--config=PATH`) from `args` and insert the
/// file's flags right after the subcommand name, ahead of the user's own.
pub fn splice(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a file path");
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.into());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let flags = to_flags(&parse(&text)?);
    // the subcommand is the first argument that is not a flag
    let at = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(args.len(), |p| p + 2);
    args.splice(at..at, flags);
    Ok(args)
}
