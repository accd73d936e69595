//! Run configuration: defaults, `key = value` files, and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::oracle::{DescentOptions, CLASSICAL_SLACK};
use crate::qcmap::{QcMap, SourceDomain};
use crate::quad::QuadratureRule;
use crate::regularity::{Mode, PROVED_BETA0};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadKnobs {
    pub radial: usize,
    pub angular: usize,
    pub annuli: usize,
    pub tolerance: f64,
}

impl Default for QuadKnobs {
    fn default() -> Self {
        let r = QuadratureRule::new(SourceDomain::UnitDisc);
        Self {
            radial: r.radial_order,
            angular: r.angular_order,
            annuli: r.annuli,
            tolerance: r.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleKnobs {
    pub random_starts: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Run the classical inequality checks next to the eigenvalue.
    pub classical: bool,
    pub classical_slack: f64,
    /// Relative slack of the `mu_lower <= oracle` verdict.
    pub soundness_slack: f64,
}

impl Default for OracleKnobs {
    fn default() -> Self {
        let d = DescentOptions::default();
        Self {
            random_starts: d.random_starts,
            epsilon: d.epsilon,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            classical: true,
            classical_slack: CLASSICAL_SLACK,
            soundness_slack: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub map: String,
    pub p: f64,
    pub alpha: f64,
    pub mode: Mode,
    pub beta0: f64,
    pub resolution: usize,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub quad: QuadKnobs,
    pub oracle: OracleKnobs,
    /// Grids for `sweep` and `regularity`.
    pub p_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub maps: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: "identity".into(),
            p: 1.9,
            alpha: 4.0,
            mode: Mode::Proved,
            beta0: PROVED_BETA0,
            resolution: 32,
            seed: crate::oracle::plaplace::DEFAULT_SEED,
            format: Format::Json,
            out: None,
            quad: QuadKnobs::default(),
            oracle: OracleKnobs::default(),
            p_values: Vec::new(),
            alpha_values: Vec::new(),
            maps: Vec::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value `{value}` for `{key}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Maps are separated by `;` since their parameters use `,`.
fn parse_maps(value: &str) -> Vec<String> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl RunConfig {
    /// Sets one key; the names match the config file and `--set`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        match key {
            "map" => self.map = value.trim().to_string(),
            "p" => self.p = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "beta0" => self.beta0 = parse(key, value)?,
            "resolution" => self.resolution = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "format" => self.format = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "quad.radial" | "quad.radial_order" => self.quad.radial = parse(key, value)?,
            "quad.angular" | "quad.angular_order" => self.quad.angular = parse(key, value)?,
            "quad.annuli" => self.quad.annuli = parse(key, value)?,
            "quad.tolerance" => self.quad.tolerance = parse(key, value)?,
            "oracle.random_starts" => self.oracle.random_starts = parse(key, value)?,
            "oracle.epsilon" => self.oracle.epsilon = parse(key, value)?,
            "oracle.tolerance" => self.oracle.tolerance = parse(key, value)?,
            "oracle.max_iterations" => self.oracle.max_iterations = parse(key, value)?,
            "oracle.classical" => self.oracle.classical = parse(key, value)?,
            "oracle.classical_slack" => self.oracle.classical_slack = parse(key, value)?,
            "oracle.soundness_slack" => self.oracle.soundness_slack = parse(key, value)?,
            "sweep.p" | "p_values" => self.p_values = parse_list(key, value)?,
            "sweep.alpha" | "alpha_values" => self.alpha_values = parse_list(key, value)?,
            "sweep.maps" | "maps" => self.maps = parse_maps(value),
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn parsed_map(&self) -> Result<QcMap, CliError> {
        parse_map(&self.map)
    }

    pub fn rule(&self, domain: SourceDomain) -> Result<QuadratureRule, CliError> {
        let rule = QuadratureRule::new(domain)
            .with_orders(self.quad.radial, self.quad.angular, self.quad.annuli)
            .with_tolerance(self.quad.tolerance);
        rule.validate().map_err(CliError::Usage)?;
        Ok(rule)
    }

    pub fn descent(&self) -> DescentOptions {
        DescentOptions {
            seed: self.seed,
            random_starts: self.oracle.random_starts,
            epsilon: self.oracle.epsilon,
            tolerance: self.oracle.tolerance,
            max_iterations: self.oracle.max_iterations,
        }
    }
}

pub fn parse_map(descriptor: &str) -> Result<QcMap, CliError> {
    descriptor
        .parse()
        .map_err(|e| CliError::Usage(format!("bad map `{descriptor}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_and_comments() {
        let mut c = RunConfig::default();
        c.apply_text("map = ellipse:2,1  # semi-axes 3 and 1\np=1.8\n\nquad.angular = 128\nsweep.maps = identity; star:1\n")
            .unwrap();
        assert_eq!(c.map, "ellipse:2,1");
        assert_eq!(c.p, 1.8);
        assert_eq!(c.quad.angular, 128);
        assert_eq!(c.maps, vec!["identity", "star:1"]);
        c.set("quad.radial_order", "12").unwrap();
        assert_eq!(c.quad.radial, 12);
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("p 1.8"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_text("colour = red"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_text("p = x"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_text("mode = maybe"), Err(CliError::Usage(_))));
    }
}
