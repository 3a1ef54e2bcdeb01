//! Reports, CSV tables and the run manifest.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::RunError;

/// One pass/fail comparison in a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `true` when the value must stay below the limit, `false` when above.
    pub below: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            below: true,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            below: false,
        }
    }

    pub fn passed(&self) -> bool {
        if self.below {
            self.value < self.limit
        } else {
            self.value > self.limit
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": self.value,
            "limit": self.limit,
            "relation": if self.below { "below" } else { "above" },
            "passed": self.passed(),
        })
    }
}

/// Everything a scenario produces; nothing is written until the driver
/// decides where.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub scenario: &'static str,
    pub verifies: &'static str,
    pub checks: Vec<Check>,
    pub details: Map<String, Value>,
    /// Extra files as `(name, contents)`.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(scenario: &'static str, verifies: &'static str) -> Self {
        Outcome {
            scenario,
            verifies,
            checks: Vec::new(),
            details: Map::new(),
            files: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details.insert(key.to_string(), value);
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn report(&self, seed: u64) -> Value {
        json!({
            "scenario": self.scenario,
            "verifies": self.verifies,
            "passed": self.passed(),
            "seed": seed,
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "details": Value::Object(self.details.clone()),
        })
    }

    /// Writes `report.json` and the extra files into `dir`.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<(), RunError> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), &self.report(seed))?;
        for (name, contents) in &self.files {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| RunError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a header row; cells are written verbatim.
#[derive(Clone, Debug)]
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table {
            text,
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Pairs `[re, im]` for JSON.
pub fn complex_json(z: &[csoc_core::C64]) -> Value {
    Value::Array(z.iter().map(|c| json!([c.re, c.im])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn checks_compare_in_both_directions() {
        assert!(Check::below("a", 1.0, 2.0).passed());
        assert!(!Check::below("a", f64::NAN, 2.0).passed());
        assert!(Check::above("a", 3.0, 2.0).passed());
    }
}
