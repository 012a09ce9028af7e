//! `key = value` config files. Each key names a long flag of the chosen
//! subcommand; entries are appended to the command line unless the flag is
//! already given there.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn has_flag(argv: &[OsString], flag: &str) -> bool {
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&format!("{flag}="))
    })
}

pub fn parse(text: &str, source: &Path) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            format!("{}:{}: expected key = value, got {line:?}", source.display(), no + 1)
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("{}:{}: invalid key {:?}", source.display(), no + 1, k.trim()));
        }
        entries.push((key, v.trim().to_string()));
    }
    Ok(entries)
}

/// `argv` with config entries appended. `true`/`false` values toggle
/// boolean flags.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = argv.clone();
    for (key, value) in parse(&text, path)? {
        let flag = format!("--{key}");
        if has_flag(&argv, &flag) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(flag.into()),
            "false" => {}
            _ => out.push(format!("{flag}={value}").into()),
        }
    }
    Ok(out)
}
