//! Run configuration: a TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Phase,
    Droplet,
    Measures,
    Spectral,
    Oracle,
    VerifyAll,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Phase => "phase",
            CommandKind::Droplet => "droplet",
            CommandKind::Measures => "measures",
            CommandKind::Spectral => "spectral",
            CommandKind::Oracle => "oracle",
            CommandKind::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    #[default]
    Kernel,
    Moment,
    Both,
}

/// Every setting is optional here; each command checks what it needs.
/// The same struct is read from TOML (unknown keys rejected) and from flags.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Only meaningful in a config file; must match the subcommand.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    /// Position of the insertions at +-ia.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Charge of each insertion.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Time (area / pi).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Polynomial degree.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Scaling parameter N.
    #[arg(long = "N", id = "N")]
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<u32>,
    /// Boundary samples (droplet).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Density grid size (measures).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Residual tolerance of the conformal-map solve.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Ladder degrees for verify-all, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    /// Oracle route.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteArg>,
    /// Output directory for data files.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Format of tabular data files.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("missing required flag --{0}")]
    Missing(&'static str),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("config file is for `{file}` but the command is `{cli}`")]
    CommandMismatch { file: String, cli: String },
}

impl Settings {
    /// `self` with every value present in `flags` replaced.
    pub fn overlay(self, flags: Settings) -> Settings {
        Settings {
            command: flags.command.or(self.command),
            a: flags.a.or(self.a),
            c: flags.c.or(self.c),
            t: flags.t.or(self.t),
            n: flags.n.or(self.n),
            big_n: flags.big_n.or(self.big_n),
            samples: flags.samples.or(self.samples),
            grid: flags.grid.or(self.grid),
            tol: flags.tol.or(self.tol),
            ladder: flags.ladder.or(self.ladder),
            route: flags.route.or(self.route),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
        }
    }

    pub fn from_toml(text: &str) -> Result<Settings, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize to TOML")
    }

    pub fn require_a(&self) -> Result<f64, ConfigError> {
        self.a.ok_or(ConfigError::Missing("a"))
    }
    pub fn require_c(&self) -> Result<f64, ConfigError> {
        self.c.ok_or(ConfigError::Missing("c"))
    }
    pub fn require_t(&self) -> Result<f64, ConfigError> {
        self.t.ok_or(ConfigError::Missing("t"))
    }
    pub fn require_n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or(ConfigError::Missing("n"))
    }
    pub fn require_big_n(&self) -> Result<u32, ConfigError> {
        self.big_n.ok_or(ConfigError::Missing("N"))
    }
}

/// Reads `path` if given, overlays `flags` and checks the command.
/// File values lose to flags.
pub fn load_config(
    path: Option<&Path>,
    command: CommandKind,
    flags: Settings,
) -> Result<Settings, ConfigError> {
    let base = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::File {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            Settings::from_toml(&text).map_err(|e| ConfigError::File {
                path: p.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => Settings::default(),
    };
    if let Some(fc) = base.command {
        if fc != command {
            return Err(ConfigError::CommandMismatch {
                file: fc.name().into(),
                cli: command.name().into(),
            });
        }
    }
    let mut merged = base.overlay(flags);
    merged.command = Some(command);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Settings::from_toml("a = 2\nc = 1.0\nt = 0.1\n").unwrap();
        let flags = Settings { t: Some(0.05), ..Default::default() };
        let m = file.overlay(flags);
        assert_eq!((m.a, m.c, m.t), (Some(2.0), Some(1.0), Some(0.05)));
    }

    #[test]
    fn integer_and_decimal_agree() {
        let x = Settings::from_toml("a = 2").unwrap();
        let y = Settings::from_toml("a = 2.0").unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Settings::from_toml("a = 2\nalpha = 3\n").unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn round_trip() {
        let s = Settings {
            command: Some(CommandKind::VerifyAll),
            a: Some(2.0),
            c: Some(1.0),
            t: Some(0.1),
            n: Some(8),
            big_n: Some(80),
            samples: Some(256),
            grid: Some(100),
            tol: Some(1e-13),
            ladder: Some(vec![8, 16, 32]),
            route: Some(RouteArg::Both),
            out: Some("out".into()),
            format: Some(Format::Json),
        };
        assert_eq!(Settings::from_toml(&s.to_toml()).unwrap(), s);
        assert_eq!(Settings::from_toml(&Settings::default().to_toml()).unwrap(), Settings::default());
    }

    #[test]
    fn missing_flag_is_named() {
        let e = Settings::default().require_a().unwrap_err();
        assert_eq!(e.to_string(), "missing required flag --a");
    }
}
