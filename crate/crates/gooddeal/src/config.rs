//! Scenario configuration: a flat, diff-friendly key-value text format.
//!
//! A configuration file is a sequence of `section.key = value` lines with
//! `#` comment lines and blank lines ignored. Sections are `market` (traded
//! loading, drift, Sharpe cap, uncertainty radii and variance bounds),
//! `put` (the case-study scenario), `numerics` (grid sizes, path counts,
//! seeds, tolerances) and `outputs` (directory and format). Every key has a
//! default, unknown keys are rejected, and parsing validates the embedded
//! scenario, so a loaded configuration is always usable.
//!
//! Serialization is canonical — fixed key order, shortest round-tripping
//! number format — which makes `parse(to_text(c)) == c` an identity and
//! gives every logically identical configuration the same SHA-256 hash.

use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::markovian::PutScenario;

/// Numerical knobs shared by the commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    /// Spatial nodes of the valuation-equation grid.
    pub space_nodes: usize,
    /// Time nodes of the valuation-equation grid.
    pub time_nodes: usize,
    /// Half-width of the log-space domain in terminal standard deviations.
    pub width_stds: f64,
    /// Simulated paths per Monte Carlo cell.
    pub n_paths: usize,
    /// Time steps per simulated path.
    pub n_steps: usize,
    /// RNG seed shared by all cells of a run.
    pub seed: u64,
    /// Grid points per axis in the worst-case variance search.
    pub control_points: usize,
    /// Scale applied to the hedge in the robustness checks; 1 is the
    /// strategy itself, anything else is a deliberate perturbation used to
    /// confirm the checks have power.
    pub hedge_multiplier: f64,
    /// Relative tolerance for the grid-vs-closed-form comparison.
    pub pde_tolerance: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            space_nodes: 400,
            time_nodes: 400,
            width_stds: 8.0,
            n_paths: 100_000,
            n_steps: 64,
            seed: 42,
            control_points: 20,
            hedge_multiplier: 1.0,
            pde_tolerance: 1e-3,
        }
    }
}

/// Output encoding for report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// RFC-4180 CSV with a leading provenance comment line.
    Csv,
    /// A single JSON document with provenance fields.
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Where and how reports are written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    /// Output directory, created on demand.
    pub dir: String,
    /// Report encoding.
    pub format: OutputFormat,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            format: OutputFormat::Csv,
        }
    }
}

/// A full run description: scenario, numerics, and output routing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    /// The valuation scenario (market and put sections).
    pub scenario: PutScenario,
    /// Numerical parameters.
    pub numerics: Numerics,
    /// Output routing.
    pub outputs: Outputs,
}

impl ScenarioConfig {
    /// Parses a configuration from its text form and validates it.
    ///
    /// # Errors
    /// [`Error::Config`] for syntax problems, unknown keys, or malformed
    /// values; scenario/numerics validation errors propagate.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{raw}'", i + 1))
            })?;
            config.apply(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a configuration file.
    ///
    /// # Errors
    /// [`Error::Config`] when the file cannot be read, plus everything
    /// [`ScenarioConfig::parse_str`] reports.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.scenario;
        let n = &mut self.numerics;
        match key {
            "market.sigma_s" => s.sigma_s = parse_f64(key, value)?,
            "market.b" => s.b = parse_f64(key, value)?,
            "market.h" => s.h = parse_f64(key, value)?,
            "market.delta" => s.delta = parse_f64(key, value)?,
            "market.a1_lo" => s.a1_lo = parse_f64(key, value)?,
            "market.a2_lo" => s.a2_lo = parse_f64(key, value)?,
            "market.a1_hi" => s.a1_hi = parse_f64(key, value)?,
            "market.a2_hi" => s.a2_hi = parse_f64(key, value)?,
            "put.s0" => s.s0 = parse_f64(key, value)?,
            "put.l0" => s.l0 = parse_f64(key, value)?,
            "put.beta" => s.beta = parse_f64(key, value)?,
            "put.rho" => s.rho = parse_f64(key, value)?,
            "put.gamma" => s.gamma = parse_f64(key, value)?,
            "put.strike" => s.strike = parse_f64(key, value)?,
            "put.maturity" => s.maturity = parse_f64(key, value)?,
            "numerics.space_nodes" => n.space_nodes = parse_usize(key, value)?,
            "numerics.time_nodes" => n.time_nodes = parse_usize(key, value)?,
            "numerics.width_stds" => n.width_stds = parse_f64(key, value)?,
            "numerics.n_paths" => n.n_paths = parse_usize(key, value)?,
            "numerics.n_steps" => n.n_steps = parse_usize(key, value)?,
            "numerics.seed" => n.seed = parse_u64(key, value)?,
            "numerics.control_points" => n.control_points = parse_usize(key, value)?,
            "numerics.hedge_multiplier" => n.hedge_multiplier = parse_f64(key, value)?,
            "numerics.pde_tolerance" => n.pde_tolerance = parse_f64(key, value)?,
            "outputs.dir" => self.outputs.dir = value.to_string(),
            "outputs.format" => self.outputs.format = value.parse()?,
            other => {
                return Err(Error::Config(format!("unknown configuration key '{other}'")));
            }
        }
        Ok(())
    }

    /// Canonical text form: fixed key order, round-tripping number format.
    pub fn to_text(&self) -> String {
        let mut out = self.input_text();
        out.push_str("outputs.dir = ");
        out.push_str(&self.outputs.dir);
        out.push('\n');
        out.push_str("outputs.format = ");
        out.push_str(&self.outputs.format.to_string());
        out.push('\n');
        out
    }

    /// Canonical text of the inputs that determine computed numbers, i.e.
    /// everything except output routing.
    fn input_text(&self) -> String {
        let s = &self.scenario;
        let n = &self.numerics;
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        push("market.sigma_s", s.sigma_s.to_string());
        push("market.b", s.b.to_string());
        push("market.h", s.h.to_string());
        push("market.delta", s.delta.to_string());
        push("market.a1_lo", s.a1_lo.to_string());
        push("market.a2_lo", s.a2_lo.to_string());
        push("market.a1_hi", s.a1_hi.to_string());
        push("market.a2_hi", s.a2_hi.to_string());
        push("put.s0", s.s0.to_string());
        push("put.l0", s.l0.to_string());
        push("put.beta", s.beta.to_string());
        push("put.rho", s.rho.to_string());
        push("put.gamma", s.gamma.to_string());
        push("put.strike", s.strike.to_string());
        push("put.maturity", s.maturity.to_string());
        push("numerics.space_nodes", n.space_nodes.to_string());
        push("numerics.time_nodes", n.time_nodes.to_string());
        push("numerics.width_stds", n.width_stds.to_string());
        push("numerics.n_paths", n.n_paths.to_string());
        push("numerics.n_steps", n.n_steps.to_string());
        push("numerics.seed", n.seed.to_string());
        push("numerics.control_points", n.control_points.to_string());
        push("numerics.hedge_multiplier", n.hedge_multiplier.to_string());
        push("numerics.pde_tolerance", n.pde_tolerance.to_string());
        out
    }

    /// SHA-256 of the canonical input text, lowercase hex. Two configurations
    /// hash equal exactly when they produce the same numbers: output routing
    /// (directory, encoding) is deliberately excluded so that reports written
    /// to different places from the same inputs carry the same fingerprint.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.input_text().as_bytes()))
    }

    /// Re-checks the embedded scenario and the numeric ranges.
    ///
    /// # Errors
    /// Scenario validation errors propagate; [`Error::Config`] for numeric
    /// knobs outside their documented ranges.
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let n = &self.numerics;
        let checks = [
            ("numerics.space_nodes", n.space_nodes >= 3),
            ("numerics.time_nodes", n.time_nodes >= 2),
            ("numerics.n_paths", n.n_paths >= 10),
            ("numerics.n_steps", n.n_steps >= 1),
            ("numerics.control_points", n.control_points >= 2),
            (
                "numerics.width_stds",
                n.width_stds.is_finite() && n.width_stds > 0.0,
            ),
            (
                "numerics.hedge_multiplier",
                n.hedge_multiplier.is_finite() && n.hedge_multiplier > 0.0,
            ),
            (
                "numerics.pde_tolerance",
                n.pde_tolerance.is_finite() && n.pde_tolerance > 0.0,
            ),
        ];
        for (key, ok) in checks {
            if !ok {
                return Err(Error::Config(format!("{key} is out of range")));
            }
        }
        if self.outputs.dir.is_empty() {
            return Err(Error::Config("outputs.dir must not be empty".into()));
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: expected a number, got '{value}'")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("key {key}: value must be finite")));
    }
    Ok(x)
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: expected a nonnegative integer, got '{value}'")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: expected a 64-bit seed, got '{value}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_text() {
        let config = ScenarioConfig::default();
        let parsed = ScenarioConfig::parse_str(&config.to_text()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn awkward_floats_round_trip_exactly() {
        let mut config = ScenarioConfig::default();
        config.scenario.rho = 0.1 + 0.2;
        config.scenario.gamma = -1e-9;
        config.scenario.b = 0.0;
        config.numerics.width_stds = 7.999999999999999;
        config.numerics.seed = u64::MAX;
        let parsed = ScenarioConfig::parse_str(&config.to_text()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let text = "\n# a comment\n  put.s0=101.5\nmarket.h   =   0.4\n\n";
        let config = ScenarioConfig::parse_str(text).unwrap();
        assert_eq!(config.scenario.s0, 101.5);
        assert_eq!(config.scenario.h, 0.4);
        // Untouched keys keep their defaults.
        assert_eq!(config.numerics.space_nodes, 400);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let unknown = ScenarioConfig::parse_str("put.spot = 1").unwrap_err();
        assert!(matches!(&unknown, Error::Config(m) if m.contains("put.spot")));
        let bad_value = ScenarioConfig::parse_str("put.s0 = abc").unwrap_err();
        assert!(matches!(&bad_value, Error::Config(m) if m.contains("put.s0")));
        let no_eq = ScenarioConfig::parse_str("just words").unwrap_err();
        assert!(matches!(&no_eq, Error::Config(m) if m.contains("line 1")));
        let bad_format = ScenarioConfig::parse_str("outputs.format = yaml").unwrap_err();
        assert!(matches!(&bad_format, Error::Config(m) if m.contains("yaml")));
    }

    #[test]
    fn parsing_enforces_scenario_invariants() {
        let err = ScenarioConfig::parse_str("market.a1_lo = 2.0").unwrap_err();
        assert!(
            matches!(&err, Error::InvalidInput(m) if m.contains("not ordered")),
            "expected the bound-ordering violation, got {err}"
        );
        let err = ScenarioConfig::parse_str("numerics.hedge_multiplier = -1").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn hash_tracks_logical_content() {
        let config = ScenarioConfig::default();
        let hash = config.sha256();
        assert_eq!(hash.len(), 64);
        assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(hash, ScenarioConfig::default().sha256());
        let mut other = config.clone();
        other.numerics.seed = 43;
        assert_ne!(hash, other.sha256());
        // Output routing does not touch any computed number and must not
        // perturb the fingerprint.
        let mut rerouted = config.clone();
        rerouted.outputs.dir = "elsewhere".into();
        rerouted.outputs.format = OutputFormat::Json;
        assert_eq!(hash, rerouted.sha256());
    }

    #[test]
    fn load_reports_missing_files() {
        let err = ScenarioConfig::load(Path::new("/nonexistent/config.txt")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
