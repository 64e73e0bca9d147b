//! `--config FILE`: `key = value` lines named after the long flags.
//!
//! Keys already given on the command line are left alone; the rest are
//! appended as `--key value`. `key = true` becomes a bare switch and
//! `key = false` is dropped.

use crate::CliError;
use std::path::Path;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("config line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("config line {}: invalid key", lineno + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[String]) -> Option<String> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    })
}

pub fn merge_config(mut args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
    for (key, value) in parse_config(&text)? {
        let flag = format!("--{key}");
        let given = args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.as_str() {
            "true" => args.push(flag),
            "false" => {}
            _ => {
                args.push(flag);
                args.push(value);
            }
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_comments() {
        let cfg = parse_config("# run\nn = 2\ndegrees=3,3  # pair of cubics\n\nmax_step = 0.2\n").unwrap();
        assert_eq!(
            cfg,
            vec![
                ("n".to_string(), "2".to_string()),
                ("degrees".to_string(), "3,3".to_string()),
                ("max-step".to_string(), "0.2".to_string())
            ]
        );
        assert!(parse_config("just words").is_err());
    }
}
