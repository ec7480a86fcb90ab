//! Flat `key = value` run configs.
//!
//! Keys are long flag names. A config is applied by splicing it into the
//! command line right after the subcommand, so explicit flags given after it
//! win. `command` names the subcommand (`sweep lambda` for nested ones).

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`, got {raw:?}", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Subcommand tokens from the `command` key.
    pub fn command(&self) -> Vec<String> {
        self.get("command").map(|c| c.split_whitespace().map(str::to_string).collect()).unwrap_or_default()
    }

    /// Everything except `command`, as command-line flags. `false` drops a
    /// switch; `true` keeps it without a value; other values are split on
    /// whitespace so multi-value flags work.
    pub fn to_flags(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, value) in &self.entries {
            if key == "command" || value == "false" {
                continue;
            }
            out.push(format!("--{key}"));
            if value != "true" {
                out.extend(value.split_whitespace().map(str::to_string));
            }
        }
        out
    }

    /// Config for `command` holding every field of `args`.
    pub fn resolved<T: Serialize>(command: &str, args: &T) -> Result<Self, CliError> {
        let mut entries = vec![("command".to_string(), command.to_string())];
        let value = serde_json::to_value(args)?;
        let Value::Object(map) = value else {
            return Err(CliError::Usage("arguments must serialize to a map".into()));
        };
        for (key, v) in map {
            let text = match v {
                Value::Null => continue,
                Value::Bool(b) => b.to_string(),
                Value::Number(n) => n.to_string(),
                Value::String(s) => s,
                Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(" "),
                Value::Object(_) => return Err(CliError::Usage(format!("nested value for {key}"))),
            };
            entries.push((key, text));
        }
        Ok(Self { entries })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Rewrites `argv` so a `--config FILE` option is expanded in place.
///
/// The global options `--config`, `--threads` and `--out` may precede the
/// subcommand; the config's flags are inserted after the subcommand tokens
/// and before the remaining user flags.
pub fn expand_argv(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut iter = argv.into_iter();
    let program = iter.next().unwrap_or_else(|| "ratchetlab".into());
    let rest: Vec<String> = iter.collect();

    let mut globals = Vec::new();
    let mut config_path = None;
    let mut i = 0;
    while let Some(token) = rest.get(i) {
        let (name, inline) = match token.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (token.as_str(), None),
        };
        match name {
            "--help" | "-h" | "--version" | "-V" => {
                globals.push(token.clone());
                i += 1;
                continue;
            }
            "--config" | "--threads" | "--out" => {}
            _ => break,
        }
        let value = match inline {
            Some(v) => v,
            None => {
                i += 1;
                rest.get(i).cloned().ok_or_else(|| CliError::Usage(format!("{name} needs a value")))?
            }
        };
        if name == "--config" {
            config_path = Some(value);
        } else {
            globals.push(name.to_string());
            globals.push(value);
        }
        i += 1;
    }
    let Some(path) = config_path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let config = RunConfig::read(Path::new(&path))?;

    let mut user = rest[i..].to_vec();
    let from_config = config.command();
    let mut command = Vec::new();
    if let Some(first) = user.first().filter(|t| !t.starts_with('-')).cloned() {
        user.remove(0);
        command.push(first);
        if command[0] == "sweep" {
            if let Some(kind) = user.first().filter(|t| !t.starts_with('-')).cloned() {
                user.remove(0);
                command.push(kind);
            }
        }
        if !from_config.is_empty() && from_config != command {
            return Err(CliError::Usage(format!(
                "config is for `{}` but the command line asks for `{}`",
                from_config.join(" "),
                command.join(" ")
            )));
        }
    } else {
        if from_config.is_empty() {
            return Err(CliError::Usage("config has no `command` and none was given".into()));
        }
        command = from_config;
    }
    let mut out = vec![program];
    out.extend(globals);
    out.extend(command);
    out.extend(config.to_flags());
    out.extend(user);
    Ok(out)
}
