//! Grid syntax: a single value, a comma list, or `start:stop:count[:log]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Largest number of points a range may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridParseError(pub String);

impl fmt::Display for GridParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridParseError {}

fn err<T>(message: impl Into<String>) -> Result<T, GridParseError> {
    Err(GridParseError(message.into()))
}

/// A one-dimensional parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Value(f64),
    List(Vec<f64>),
    Spec(String),
}

/// Spacing of a `start:stop:count` range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Parsed `start:stop:count[:log]` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let Self {
            start,
            stop,
            count,
            spacing,
        } = *self;
        if count == 1 {
            return vec![start];
        }
        let last = (count - 1) as f64;
        let mut out: Vec<f64> = match spacing {
            Spacing::Linear => (0..count)
                .map(|i| start + (stop - start) * i as f64 / last)
                .collect(),
            Spacing::Log => {
                let ratio = (stop / start).ln();
                (0..count)
                    .map(|i| start * (ratio * i as f64 / last).exp())
                    .collect()
            }
        };
        out[count - 1] = stop;
        out
    }
}

fn parse_number(s: &str) -> Result<f64, GridParseError> {
    let t = s.trim();
    let x: f64 = t
        .parse()
        .map_err(|_| GridParseError(format!("'{t}' is not a number")))?;
    if !x.is_finite() {
        return err(format!("'{t}' is not finite"));
    }
    Ok(x)
}

impl FromStr for Range {
    type Err = GridParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return err(format!("'{s}' is not of the form start:stop:count[:log]"));
        }
        let start = parse_number(parts[0])?;
        let stop = parse_number(parts[1])?;
        let count: usize = parts[2].trim().parse().map_err(|_| {
            GridParseError(format!(
                "count '{}' is not a positive integer",
                parts[2].trim()
            ))
        })?;
        if count == 0 {
            return err("count must be at least 1");
        }
        if count > MAX_GRID_POINTS {
            return err(format!("count {count} exceeds {MAX_GRID_POINTS}"));
        }
        let spacing = match parts.get(3).map(|p| p.trim()) {
            None => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some("lin") => Spacing::Linear,
            Some(other) => {
                return err(format!(
                    "unknown spacing '{other}', expected 'log' or 'lin'"
                ))
            }
        };
        if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
            return err("logarithmic ranges need start > 0 and stop > 0");
        }
        Ok(Self {
            start,
            stop,
            count,
            spacing,
        })
    }
}

/// Expands a grid string: `2.5`, `2,10,75` or `start:stop:count[:log]`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, GridParseError> {
    let t = s.trim();
    if t.is_empty() {
        return err("empty grid");
    }
    if t.contains(':') {
        if t.contains(',') {
            return err("a range cannot be mixed with a comma list");
        }
        return Ok(t.parse::<Range>()?.values());
    }
    t.split(',').map(parse_number).collect()
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, GridParseError> {
        let v = match self {
            Self::Value(x) => vec![*x],
            Self::List(xs) => xs.clone(),
            Self::Spec(s) => parse_grid(s)?,
        };
        if v.is_empty() {
            return err("empty grid");
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return err(format!("'{x}' is not finite"));
        }
        Ok(v)
    }
}

/// Expands a grid of chain sizes; every value must be an even integer ≥ 2.
pub fn parse_sizes(grid: &Grid) -> Result<Vec<usize>, GridParseError> {
    grid.values()?
        .into_iter()
        .map(|x| {
            let r = x.round();
            if (x - r).abs() > 1e-9 * r.abs().max(1.0) || !(2.0..=1e9).contains(&r) {
                return err(format!("chain size {x} is not an integer in [2, 1e9]"));
            }
            let n = r as usize;
            if n % 2 != 0 {
                return err(format!("chain size {n} must be even"));
            }
            Ok(n)
        })
        .collect()
}
