//! Experiment configuration: TOML file, defaults and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mehler::quadrature::MAX_ORDER;
use mehler::{Symbol1D, Symbol2D};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("config {path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl UsageError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernels,
    Operators,
    Asymptotics,
    Fock,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 4] = [Suite::Kernels, Suite::Operators, Suite::Asymptotics, Suite::Fock];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Operators => "operators",
            Suite::Asymptotics => "asymptotics",
            Suite::Fock => "fock",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kernels" => Ok(Suite::Kernels),
            "operators" => Ok(Suite::Operators),
            "asymptotics" => Ok(Suite::Asymptotics),
            "fock" => Ok(Suite::Fock),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected kernels, operators, asymptotics, fock or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

/// A parsed symbol literal from the `symbols` list.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolLiteral {
    Line(Symbol1D),
    Phase(Symbol2D),
}

impl FromStr for SymbolLiteral {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim_start();
        if t.starts_with("poly:") {
            t.parse().map(SymbolLiteral::Line).map_err(|e: mehler::Error| e.to_string())
        } else if t.starts_with("terms:") {
            t.parse().map(SymbolLiteral::Phase).map_err(|e: mehler::Error| e.to_string())
        } else {
            Err("symbol literal must start with `poly:` or `terms:`".into())
        }
    }
}

fn default_suite() -> Suite {
    Suite::All
}

fn default_epsilons() -> Vec<f64> {
    vec![0.5, 0.9]
}

fn default_basis_size() -> usize {
    64
}

fn default_quad_order() -> usize {
    80
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_basis_size")]
    pub basis_size: usize,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default)]
    pub symbols: Vec<String>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: default_suite(),
            epsilons: default_epsilons(),
            basis_size: default_basis_size(),
            quad_order: default_quad_order(),
            symbols: Vec::new(),
            output_path: None,
            format: Format::default(),
            seed: 0,
        }
    }
}

/// Flag overrides; `None` keeps the configured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub suite: Option<Suite>,
    pub epsilons: Option<Vec<f64>>,
    pub basis_size: Option<usize>,
    pub quad_order: Option<usize>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|source| UsageError::Toml {
            path: origin.to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        if let Some(v) = o.suite {
            self.suite = v;
        }
        if let Some(v) = o.epsilons {
            self.epsilons = v;
        }
        if let Some(v) = o.basis_size {
            self.basis_size = v;
        }
        if let Some(v) = o.quad_order {
            self.quad_order = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.output_path {
            self.output_path = Some(v);
        }
        if let Some(v) = o.format {
            self.format = v;
        }
        self
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.epsilons.is_empty() {
            return Err(UsageError::field("epsilons", "must contain at least one value"));
        }
        for (i, e) in self.epsilons.iter().enumerate() {
            if !(e.is_finite() && *e > 0.0 && *e < 1.0) {
                return Err(UsageError::field(
                    format!("epsilons[{i}]"),
                    format!("{e} must lie strictly inside (0, 1)"),
                ));
            }
        }
        if self.basis_size < 4 {
            return Err(UsageError::field(
                "basis_size",
                format!("{} is below the minimum 4", self.basis_size),
            ));
        }
        if self.quad_order < self.basis_size + 2 {
            return Err(UsageError::field(
                "quad_order",
                format!(
                    "{} must be at least basis_size + 2 = {}",
                    self.quad_order,
                    self.basis_size + 2
                ),
            ));
        }
        if self.quad_order > MAX_ORDER {
            return Err(UsageError::field(
                "quad_order",
                format!("{} exceeds the supported maximum {MAX_ORDER}", self.quad_order),
            ));
        }
        self.parsed_symbols()?;
        Ok(())
    }

    pub fn parsed_symbols(&self) -> Result<Vec<SymbolLiteral>, UsageError> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse().map_err(|m| UsageError::field(format!("symbols[{i}]"), m)))
            .collect()
    }
}
