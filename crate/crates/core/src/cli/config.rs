//! Line-oriented `key=value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::noma::{Constellation, SystemConfig};

use super::sweep::Metric;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// `start:step:stop` in dB, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrRange {
    const MAX_POINTS: usize = 100_000;

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl fmt::Display for SnrRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let nums = parts
            .iter()
            .map(|p| parse_finite(p))
            .collect::<Result<Vec<f64>, String>>()?;
        let range = match nums[..] {
            [single] => Self {
                start: single,
                step: 1.0,
                stop: single,
            },
            [start, step, stop] => Self { start, step, stop },
            _ => return Err(format!("expected start:step:stop, got '{s}'")),
        };
        if !(range.step > 0.0) {
            return Err("SNR step must be positive".into());
        }
        if range.stop < range.start {
            return Err("SNR stop must not be below start".into());
        }
        if (range.stop - range.start) / range.step > Self::MAX_POINTS as f64 {
            return Err(format!("more than {} SNR points", Self::MAX_POINTS));
        }
        Ok(range)
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a finite number")),
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub users: usize,
    pub power: Vec<f64>,
    pub snr_db: SnrRange,
    pub trials: u64,
    pub seed: u64,
    pub constellation: Constellation,
    /// `None` lets the subcommand pick its metrics.
    pub metrics: Option<Vec<Metric>>,
    pub output: Option<PathBuf>,
    /// Diversity window `(low, high)` in dB.
    pub window_db: (f64, f64),
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = SystemConfig::three_user_default();
        Self {
            alpha: base.noise_alpha(),
            users: base.users(),
            power: base.power().to_vec(),
            snr_db: SnrRange {
                start: 0.0,
                step: 5.0,
                stop: 40.0,
            },
            trials: 1_000_000,
            seed: 1,
            constellation: base.constellation(),
            metrics: None,
            output: None,
            window_db: (60.0, 80.0),
        }
    }
}

impl RunConfig {
    /// The link configuration at one SNR point.
    pub fn system(&self, snr_db: f64) -> crate::Result<SystemConfig> {
        SystemConfig::new(self.power.clone(), 1.0, self.constellation, self.alpha)?.with_snr_db(snr_db)
    }
}

/// Canonical text form; [`parse_config`] reads it back unchanged.
pub fn print_config(cfg: &RunConfig) -> String {
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    out.push_str(&format!("alpha={}\n", cfg.alpha));
    out.push_str(&format!("users={}\n", cfg.users));
    out.push_str(&format!("power={}\n", join(&cfg.power)));
    out.push_str(&format!("snr_db={}\n", cfg.snr_db));
    out.push_str(&format!("trials={}\n", cfg.trials));
    out.push_str(&format!("seed={}\n", cfg.seed));
    out.push_str(&format!("constellation={}\n", cfg.constellation.name()));
    if let Some(metrics) = &cfg.metrics {
        let names: Vec<&str> = metrics.iter().map(Metric::name).collect();
        out.push_str(&format!("metrics={}\n", names.join(",")));
    }
    if let Some(path) = &cfg.output {
        out.push_str(&format!("output={}\n", path.display()));
    }
    out.push_str(&format!("window_db={}:{}\n", cfg.window_db.0, cfg.window_db.1));
    out
}

struct Located {
    line: usize,
    column: usize,
}

impl Located {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

/// Parses a configuration document. Later assignments of a key override
/// earlier ones; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut users_at: Option<Located> = None;
    let mut power_at: Option<Located> = None;
    let mut alpha_at: Option<Located> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            return Err(ConfigError {
                line,
                column: indent + 1,
                message: "expected key=value".into(),
            });
        };
        let key = content[..eq].trim();
        let value_raw = &content[eq + 1..];
        let value = value_raw.trim();
        let at = Located {
            line,
            column: eq + 2 + (value_raw.len() - value_raw.trim_start().len()),
        };
        let key_at = Located {
            line,
            column: indent + 1,
        };
        if value.is_empty() {
            return Err(at.err(format!("missing value for '{key}'")));
        }
        match key {
            "alpha" => {
                let a = parse_finite(value).map_err(|m| at.err(m))?;
                if a <= 0.0 {
                    return Err(at.err("alpha must be positive"));
                }
                cfg.alpha = a;
                alpha_at = Some(at);
            }
            "users" => {
                cfg.users = value
                    .parse::<usize>()
                    .ok()
                    .filter(|&u| u >= 1)
                    .ok_or_else(|| at.err(format!("'{value}' is not a positive integer")))?;
                users_at = Some(at);
            }
            "power" => {
                cfg.power = value
                    .split(',')
                    .map(|p| parse_finite(p.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| at.err(m))?;
                power_at = Some(at);
            }
            "snr_db" => cfg.snr_db = value.parse().map_err(|m: String| at.err(m))?,
            "trials" => {
                cfg.trials = value
                    .parse::<u64>()
                    .ok()
                    .filter(|&t| t >= 1)
                    .ok_or_else(|| at.err(format!("'{value}' is not a positive integer")))?;
            }
            "seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| at.err(format!("'{value}' is not a non-negative integer")))?;
            }
            "constellation" => cfg.constellation = value.parse().map_err(|e: crate::Error| at.err(e.to_string()))?,
            "metrics" => {
                let metrics = value
                    .split(',')
                    .map(|m| m.trim().parse::<Metric>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| at.err(m))?;
                cfg.metrics = Some(metrics);
            }
            "output" => cfg.output = Some(PathBuf::from(value)),
            "window_db" => {
                let ends: Vec<f64> = value
                    .split(':')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| at.err(format!("expected low:high, got '{value}'")))?;
                match ends[..] {
                    [low, high] if low.is_finite() && high.is_finite() && low < high => cfg.window_db = (low, high),
                    _ => return Err(at.err("window_db must be low:high with low < high")),
                }
            }
            _ => return Err(key_at.err(format!("unknown key '{key}'"))),
        }
    }

    if cfg.power.len() != cfg.users {
        let at = power_at.or(users_at).unwrap_or(Located { line: 1, column: 1 });
        return Err(at.err(format!(
            "power lists {} coefficients for {} users",
            cfg.power.len(),
            cfg.users
        )));
    }
    if let Err(e) = SystemConfig::new(cfg.power.clone(), 1.0, cfg.constellation, cfg.alpha) {
        let at = power_at.unwrap_or(Located { line: 1, column: 1 });
        return Err(at.err(e.to_string()));
    }
    if cfg.metrics.as_deref().is_some_and(|m| m.contains(&Metric::PepClosed)) && cfg.alpha != 1.0 && cfg.alpha != 2.0 {
        let at = alpha_at.unwrap_or(Located { line: 1, column: 1 });
        return Err(at.err(format!("pep_closed needs alpha = 1 or 2, got {}", cfg.alpha)));
    }
    Ok(cfg)
}
