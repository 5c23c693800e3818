//! `key = value` config files, merged into the argument list so that every
//! flag can also be set from a file. Explicit flags win over the file, and
//! the worker and memory environment variables win over the file too.

use std::path::Path;

const ENV_KEYS: [(&str, &str); 2] = [("workers", "ABELCOUNT_WORKERS"), ("memory-mb", "ABELCOUNT_MEMORY_MB")];

#[derive(Debug)]
pub struct ConfigError(pub String);

pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Removes `--config PATH` from `args` and splices the file's settings in
/// after the subcommand name.
pub fn expand(mut args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        if pos + 1 >= args.len() {
            return Err(ConfigError("--config needs a path".into()));
        }
        let p = args.remove(pos + 1);
        args.remove(pos);
        p
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| ConfigError(format!("{path}: {e}")))?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let from_env = |key: &str| ENV_KEYS.iter().any(|(k, var)| *k == key && std::env::var_os(var).is_some());
    let mut extra = Vec::new();
    for (key, value) in parse(&text)? {
        if given(&key) || from_env(&key) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    // The subcommand is the first argument after the program name that is
    // not a flag; settings go right after it.
    let at = args.iter().skip(1).position(|a| !a.starts_with('-')).map_or(args.len(), |i| i + 2);
    args.splice(at..at, extra);
    Ok(args)
}
