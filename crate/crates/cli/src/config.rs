//! Flag/file configuration merging and token parsing.
//!
//! Every numeric option arrives as a string (flags and config-file values
//! alike), is merged with flags winning over file entries, and is parsed
//! here with angle-token support.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use strobosim_core::{InputDescriptor, StepConfig};

use crate::{CliError, PhysicsArgs};

const KNOWN_KEYS: [&str; 12] = [
    "input", "r", "T", "theta", "eta_s", "eta_e", "steps", "shots", "mc", "seed", "output",
    "format",
];

/// Config-file contents, stringified so they merge uniformly with flags.
#[derive(Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed: serde_json::Value = serde_json::from_str(&raw).map_err(|e| {
            CliError::usage(format!("config {} is not valid JSON: {e}", path.display()))
        })?;
        let serde_json::Value::Object(entries) = parsed else {
            return Err(CliError::usage("config file must hold a JSON object"));
        };
        let mut values = HashMap::new();
        for (key, value) in entries {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("unknown config key {key:?}")));
            }
            let text = match value {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(CliError::usage(format!(
                        "config key {key:?} must be a string or number, got {other}"
                    )))
                }
            };
            values.insert(key, text);
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Flag value if present, else file value, else the built-in default.
fn pick<'a>(
    flag: &'a Option<String>,
    file: &'a FileConfig,
    key: &str,
    default: &'a str,
) -> &'a str {
    flag.as_deref().or_else(|| file.get(key)).unwrap_or(default)
}

/// Parses one angle token: `pi`, `pi/2`, `pi/4` (optionally negated) or a
/// plain radian value.
pub fn parse_angle(token: &str) -> Result<f64, CliError> {
    let trimmed = token.trim();
    let (sign, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, trimmed),
    };
    let magnitude = match body {
        "pi" => PI,
        "pi/2" => PI / 2.0,
        "pi/4" => PI / 4.0,
        _ => body
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("unparsable angle {token:?}")))?,
    };
    let value = sign * magnitude;
    if !value.is_finite() {
        return Err(CliError::usage(format!("angle {token:?} is not finite")));
    }
    Ok(value)
}

fn parse_plain(token: &str, what: &str) -> Result<f64, CliError> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("unparsable {what} {token:?}")))?;
    if !value.is_finite() {
        return Err(CliError::usage(format!("{what} {token:?} is not finite")));
    }
    Ok(value)
}

fn parse_scalar(token: &str, angle: bool, what: &str) -> Result<f64, CliError> {
    if angle {
        parse_angle(token)
    } else {
        parse_plain(token, what)
    }
}

/// Parses a grid token: a single value, a comma list, or an inclusive
/// `start:stop:count` range.
pub fn parse_grid(token: &str, angle: bool, what: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = token.trim();
    if trimmed.is_empty() {
        return Err(CliError::usage(format!("empty {what} grid")));
    }
    if trimmed.contains(':') {
        let parts: Vec<&str> = trimmed.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "range for {what} must be start:stop:count, got {token:?}"
            )));
        }
        let start = parse_scalar(parts[0], angle, what)?;
        let stop = parse_scalar(parts[1], angle, what)?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("unparsable grid count {:?}", parts[2])))?;
        if count == 0 {
            return Err(CliError::usage(format!("{what} grid count must be ≥ 1")));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let span = stop - start;
        return Ok((0..count)
            .map(|j| start + span * j as f64 / (count as f64 - 1.0))
            .collect());
    }
    trimmed
        .split(',')
        .map(|piece| {
            if piece.trim().is_empty() {
                Err(CliError::usage(format!("empty entry in {what} grid")))
            } else {
                parse_scalar(piece, angle, what)
            }
        })
        .collect()
}

fn parse_integer<T: std::str::FromStr>(token: &str, what: &str) -> Result<T, CliError> {
    token
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("unparsable {what} {token:?}")))
}

/// Fully resolved settings for the trajectory-style verbs.
pub struct Resolved {
    pub input: InputDescriptor,
    pub input_label: String,
    pub r: f64,
    pub transmissions: Vec<f64>,
    pub thetas: Vec<f64>,
    pub eta_s: f64,
    pub eta_e: f64,
    pub steps: usize,
    pub file: FileConfig,
}

impl Resolved {
    /// Merges flags over the config file; `grids` controls whether `--T` and
    /// `--theta` may hold more than one value.
    pub fn from_args(physics: &PhysicsArgs, grids: bool) -> Result<Self, CliError> {
        let file = FileConfig::load(physics.config.as_deref())?;
        let input_label = pick(&physics.input, &file, "input", "bell+").to_string();
        let input: InputDescriptor = input_label
            .parse()
            .map_err(|e: strobosim_core::Error| CliError::from(e))?;
        let r = parse_plain(pick(&physics.r, &file, "r", "0.5"), "reflectivity")?;
        let transmissions = parse_grid(
            pick(&physics.transmission, &file, "T", "1"),
            false,
            "transmissivity",
        )?;
        let thetas = parse_grid(pick(&physics.theta, &file, "theta", "0"), true, "theta")?;
        let eta_s = parse_plain(pick(&physics.eta_s, &file, "eta_s", "1"), "eta_s")?;
        let eta_e = parse_plain(pick(&physics.eta_e, &file, "eta_e", "1"), "eta_e")?;
        let steps: usize = parse_integer(pick(&physics.steps, &file, "steps", "6"), "step count")?;
        if !grids {
            if transmissions.len() != 1 {
                return Err(CliError::usage(
                    "this command takes a single --T value, not a grid",
                ));
            }
            if thetas.len() != 1 {
                return Err(CliError::usage(
                    "this command takes a single --theta value, not a grid",
                ));
            }
        }
        Ok(Self {
            input,
            input_label,
            r,
            transmissions,
            thetas,
            eta_s,
            eta_e,
            steps,
            file,
        })
    }

    /// Step configuration for single-point verbs (validates all ranges).
    pub fn step_config(&self) -> Result<StepConfig, CliError> {
        Ok(StepConfig::new(
            self.r,
            self.transmissions[0],
            self.thetas[0],
            self.eta_s,
            self.eta_e,
        )?)
    }

    pub fn resolve_u64(
        &self,
        flag: &Option<String>,
        key: &str,
        default: &str,
    ) -> Result<u64, CliError> {
        parse_integer(pick(flag, &self.file, key, default), key)
    }

    pub fn resolve_usize(
        &self,
        flag: &Option<String>,
        key: &str,
        default: &str,
    ) -> Result<usize, CliError> {
        parse_integer(pick(flag, &self.file, key, default), key)
    }

    pub fn resolve_text(&self, flag: &Option<String>, key: &str, default: &str) -> String {
        pick(flag, &self.file, key, default).to_string()
    }

    /// Output path from the config file, if any (flags take precedence at the
    /// call site).
    pub fn file_output(&self) -> Option<String> {
        self.file.get("output").map(str::to_string)
    }
}
