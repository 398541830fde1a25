//! Flat `key = value` config files. Keys are long flag names; command-line flags win.

use std::ffi::OsString;

use clap::CommandFactory;

use crate::args::Cli;
use crate::CliError;

/// Parse config text into ordered `(key, value)` pairs.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Render a resolved JSON parameter object in the file form read by [`parse`].
pub fn render(config: &serde_json::Value) -> String {
    let mut out = String::new();
    if let Some(map) = config.as_object() {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
                other => scalar(other),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
    }
    out
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn config_path(args: &[OsString]) -> Result<Option<OsString>, CliError> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned().map(Some).ok_or_else(|| CliError::Usage("--config needs a file".into()));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

/// Insert config-file values as flags ahead of the user's own arguments. A key is skipped
/// when the user already passed that flag.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    if argv.len() < 2 {
        return Ok(argv);
    }
    let user = &argv[2..];
    let Some(path) = config_path(user)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.to_string_lossy())))?;
    let pairs = parse(&text)?;

    let cli = Cli::command();
    let sub_name = argv[1].to_string_lossy().to_string();
    let sub = cli
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand {sub_name:?}")))?;

    let user_has_flag = |long: &str| {
        user.iter().any(|a| {
            let s = a.to_string_lossy();
            s == format!("--{long}") || s.starts_with(&format!("--{long}="))
        })
    };

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) || (a.is_positional() && a.get_id().as_str() == key))
            .ok_or_else(|| CliError::Usage(format!("config key {key:?} is not a flag of {sub_name}")))?;
        if arg.is_positional() {
            let choices: Vec<String> = arg.get_possible_values().iter().map(|p| p.get_name().to_string()).collect();
            let given = user.iter().any(|a| choices.iter().any(|c| a.to_string_lossy() == *c));
            if !given {
                injected.push(value.into());
            }
            continue;
        }
        if user_has_flag(&key) {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}={value}").into());
        } else {
            match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(CliError::Usage(format!("config key {key:?} expects true or false"))),
            }
        }
    }
    let mut out = argv[..2].to_vec();
    out.extend(injected);
    out.extend(user.iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments_and_blanks() {
        let p = parse("# c\n\na = 1\n b=x y \n").unwrap();
        assert_eq!(p, vec![("a".into(), "1".into()), ("b".into(), "x y".into())]);
        assert!(parse("novalue\n").is_err());
    }

    #[test]
    fn render_round_trips_through_parse() {
        let v = serde_json::json!({"grids": [129, 257], "tol": 1e-10, "bubble": true, "target": null, "out": "o"});
        let text = render(&v);
        let p = parse(&text).unwrap();
        assert_eq!(
            p,
            vec![
                ("bubble".into(), "true".into()),
                ("grids".into(), "129,257".into()),
                ("out".into(), "o".into()),
                ("tol".into(), "1e-10".into()),
            ]
        );
    }
}
