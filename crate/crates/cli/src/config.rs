//! Sweep configuration from flags and TOML files; flags take precedence.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use xychain::oracle::DEFAULT_SITE_CAP;

use crate::error::{CliError, CliResult};
use crate::grid::{parse_sizes, Grid};

/// Quantity evaluated at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Fidelity,
    ChiField,
    XiThermal,
    Cv,
    Z,
}

impl Quantity {
    pub const ALL: [Self; 5] = [
        Self::Fidelity,
        Self::ChiField,
        Self::XiThermal,
        Self::Cv,
        Self::Z,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fidelity => "fidelity",
            Self::ChiField => "chi_field",
            Self::XiThermal => "xi_thermal",
            Self::Cv => "cv",
            Self::Z => "z",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|q| q.name() == t)
            .ok_or_else(|| {
                format!(
                    "unknown quantity '{}', expected one of fidelity, chi_field, xi_thermal, cv, z",
                    s.trim()
                )
            })
    }
}

/// Backend requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Exact,
    Ppa,
    Tla,
    Ground,
    Oracle,
}

impl MethodName {
    pub const ALL: [Self; 5] = [
        Self::Exact,
        Self::Ppa,
        Self::Tla,
        Self::Ground,
        Self::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Ppa => "ppa",
            Self::Tla => "tla",
            Self::Ground => "ground",
            Self::Oracle => "oracle",
        }
    }

    /// Defined only for the Ising chain.
    pub fn needs_ising(self) -> bool {
        matches!(self, Self::Tla | Self::Ground)
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == t)
            .ok_or_else(|| {
                format!(
                    "unknown method '{}', expected one of exact, ppa, tla, ground, oracle",
                    s.trim()
                )
            })
    }
}

/// Parses `exact,ppa,...`; duplicates are dropped, first occurrence wins.
pub fn parse_methods(s: &str) -> Result<Vec<MethodName>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let m: MethodName = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(format!("unknown format '{other}', expected csv or jsonl")),
        }
    }
}

/// Unvalidated configuration as read from TOML or assembled from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub quantity: Option<String>,
    pub methods: Option<Vec<String>>,
    pub n: Option<Grid>,
    pub gamma: Option<Grid>,
    pub g: Option<Grid>,
    pub beta: Option<Grid>,
    pub step: Option<f64>,
    pub ref_g: Option<f64>,
    pub ref_beta: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub workers: Option<usize>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text)
            .map_err(|e| CliError::usage("config", e.to_string().trim().to_string()))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overridden_by(self, flags: RawConfig) -> Self {
        Self {
            quantity: flags.quantity.or(self.quantity),
            methods: flags.methods.or(self.methods),
            n: flags.n.or(self.n),
            gamma: flags.gamma.or(self.gamma),
            g: flags.g.or(self.g),
            beta: flags.beta.or(self.beta),
            step: flags.step.or(self.step),
            ref_g: flags.ref_g.or(self.ref_g),
            ref_beta: flags.ref_beta.or(self.ref_beta),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
            workers: flags.workers.or(self.workers),
        }
    }
}

/// Validated sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub quantity: Quantity,
    pub methods: Vec<MethodName>,
    pub n: Vec<usize>,
    pub gamma: Vec<f64>,
    pub g: Vec<f64>,
    pub beta: Vec<f64>,
    /// Stencil step; `None` selects the per-quantity defaults.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Field of the reference state for fidelity rows; defaults to the row's `g`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_g: Option<f64>,
    /// Inverse temperature of the reference state; defaults to the row's `β`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn required<T>(value: Option<T>, field: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(field, "missing (set it by flag or in the config file)"))
}

fn grid_values(grid: Option<Grid>, field: &str) -> CliResult<Vec<f64>> {
    required(grid, field)?
        .values()
        .map_err(|e| CliError::usage(field, e.0))
}

impl TryFrom<RawConfig> for SweepConfig {
    type Error = CliError;

    fn try_from(raw: RawConfig) -> CliResult<Self> {
        let quantity: Quantity = required(raw.quantity, "quantity")?
            .parse()
            .map_err(|e: String| CliError::usage("quantity", e))?;
        let methods = required(raw.methods, "methods")?;
        let methods =
            parse_methods(&methods.join(",")).map_err(|e| CliError::usage("methods", e))?;
        let n = parse_sizes(&required(raw.n, "n")?).map_err(|e| CliError::usage("n", e.0))?;
        let gamma = grid_values(raw.gamma.or(Some(Grid::Value(1.0))), "gamma")?;
        let g = grid_values(raw.g, "g")?;
        let beta = grid_values(raw.beta, "beta")?;

        if let Some(x) = gamma.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CliError::usage("gamma", format!("{x} is outside [0, 1]")));
        }
        if let Some(x) = beta.iter().find(|x| **x < 0.0) {
            return Err(CliError::usage("beta", format!("{x} is negative")));
        }
        if let Some(h) = raw.step {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::usage(
                    "step",
                    format!("{h} must be finite and > 0"),
                ));
            }
        }
        if let Some(x) = raw.ref_g.filter(|x| !x.is_finite()) {
            return Err(CliError::usage("ref_g", format!("{x} is not finite")));
        }
        if let Some(x) = raw.ref_beta.filter(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(CliError::usage(
                "ref_beta",
                format!("{x} must be finite and >= 0"),
            ));
        }
        if methods.contains(&MethodName::Oracle) {
            if let Some(big) = n.iter().find(|&&x| x > DEFAULT_SITE_CAP) {
                return Err(CliError::usage(
                    "methods",
                    format!("oracle needs N <= {DEFAULT_SITE_CAP}, got N = {big}"),
                ));
            }
        }
        if let Some(m) = methods.iter().find(|m| m.needs_ising()) {
            if gamma.iter().any(|&x| x != 1.0) {
                return Err(CliError::usage(
                    "methods",
                    format!("{m} is defined only for gamma = 1"),
                ));
            }
        }
        let format = match raw.format {
            Some(f) => f
                .parse()
                .map_err(|e: String| CliError::usage("format", e))?,
            None => OutputFormat::Csv,
        };
        if raw.workers == Some(0) {
            return Err(CliError::usage("workers", "must be at least 1"));
        }
        Ok(Self {
            quantity,
            methods,
            n,
            gamma,
            g,
            beta,
            step: raw.step,
            ref_g: raw.ref_g,
            ref_beta: raw.ref_beta,
            out: raw.out,
            format,
            workers: raw.workers,
        })
    }
}

impl SweepConfig {
    /// Canonical TOML echo of the expanded configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn row_count(&self) -> usize {
        self.n.len() * self.gamma.len() * self.g.len() * self.beta.len() * self.methods.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RawConfig {
        RawConfig {
            quantity: Some("chi_field".into()),
            methods: Some(vec!["exact".into(), "ppa".into()]),
            n: Some(Grid::Value(50.0)),
            g: Some(Grid::Spec("0.9:1.1:3".into())),
            beta: Some(Grid::Spec("2,10,75".into())),
            ..RawConfig::default()
        }
    }

    fn usage_field(r: CliResult<SweepConfig>) -> String {
        match r {
            Err(CliError::Usage { field, .. }) => field,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn valid_config() {
        let c = SweepConfig::try_from(base()).unwrap();
        assert_eq!(c.quantity, Quantity::ChiField);
        assert_eq!(c.methods, vec![MethodName::Exact, MethodName::Ppa]);
        assert_eq!(c.gamma, vec![1.0]);
        assert_eq!(c.beta, vec![2.0, 10.0, 75.0]);
        assert_eq!(c.row_count(), 18);
    }

    #[test]
    fn errors_name_the_field() {
        let mut r = base();
        r.g = Some(Grid::Spec("1:2".into()));
        assert_eq!(usage_field(SweepConfig::try_from(r)), "g");

        let mut r = base();
        r.methods = Some(vec!["exact".into(), "magic".into()]);
        assert_eq!(usage_field(SweepConfig::try_from(r)), "methods");

        let mut r = base();
        r.n = Some(Grid::Value(14.0));
        r.methods = Some(vec!["oracle".into()]);
        assert_eq!(usage_field(SweepConfig::try_from(r)), "methods");

        let mut r = base();
        r.gamma = Some(Grid::Value(0.5));
        r.methods = Some(vec!["tla".into()]);
        assert_eq!(usage_field(SweepConfig::try_from(r)), "methods");

        let mut r = base();
        r.beta = None;
        assert_eq!(usage_field(SweepConfig::try_from(r)), "beta");

        let mut r = base();
        r.step = Some(0.0);
        assert_eq!(usage_field(SweepConfig::try_from(r)), "step");

        let mut r = base();
        r.quantity = Some("entropy".into());
        assert_eq!(usage_field(SweepConfig::try_from(r)), "quantity");
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::from_toml(
            "quantity = \"cv\"\nmethods = [\"exact\"]\nn = [50, 100]\ng = 1\nbeta = \"1:100:5:log\"\nstep = 0.01\n",
        )
        .unwrap();
        let flags = RawConfig {
            n: Some(Grid::Spec("20".into())),
            step: Some(0.002),
            ..RawConfig::default()
        };
        let c = SweepConfig::try_from(file.overridden_by(flags)).unwrap();
        assert_eq!(c.n, vec![20]);
        assert_eq!(c.step, Some(0.002));
        assert_eq!(c.quantity, Quantity::Cv);
        assert_eq!(c.beta.len(), 5);
    }

    #[test]
    fn unknown_toml_keys_are_rejected() {
        assert!(matches!(
            RawConfig::from_toml("quantity = \"cv\"\ntemperature = 3\n"),
            Err(CliError::Usage { .. })
        ));
    }

    #[test]
    fn echo_round_trips() {
        let c = SweepConfig::try_from(base()).unwrap();
        let raw = RawConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(SweepConfig::try_from(raw).unwrap(), c);
    }

    #[test]
    fn method_lists() {
        assert_eq!(
            parse_methods("Exact, ppa,exact").unwrap(),
            vec![MethodName::Exact, MethodName::Ppa]
        );
        assert!(parse_methods("").is_err());
        assert!(parse_methods("exact,,ppa").is_err());
    }
}
