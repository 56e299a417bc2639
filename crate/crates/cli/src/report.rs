//! Report layout shared by all subcommands.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Comparison of a computed value against a bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `<=`, `>=` or `==` (within `tolerance`).
    pub relation: &'static str,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `value <= bound + tolerance`.
    pub fn le(name: &str, value: f64, bound: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, bound, relation: "<=", tolerance, pass: value <= bound + tolerance }
    }

    /// `value >= bound - tolerance`.
    pub fn ge(name: &str, value: f64, bound: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, bound, relation: ">=", tolerance, pass: value >= bound - tolerance }
    }

    /// `|value - target| <= tolerance`.
    pub fn eq(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: target,
            relation: "==",
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub kind: String,
    pub data: Value,
    pub checks: Vec<Check>,
}

impl Row {
    pub fn new(kind: &str, data: impl Serialize) -> Self {
        Self {
            kind: kind.into(),
            data: serde_json::to_value(data).expect("row data is serializable"),
            checks: Vec::new(),
        }
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub subcommand: String,
    pub seed: u64,
    pub config: Value,
    pub rows: Vec<Row>,
    pub extras: BTreeMap<String, Value>,
    pub checks_run: usize,
    pub checks_failed: usize,
    pub pass: bool,
    /// Excluded from reproducibility comparisons.
    pub wall_clock_s: f64,
}

impl Report {
    pub fn new(subcommand: &str, seed: u64, config: Value) -> Self {
        let versions = BTreeMap::from([("nlqc-cli", env!("CARGO_PKG_VERSION")), ("nlqc-core", nlqc_core::VERSION)]);
        Self {
            tool: "nlqc",
            versions,
            subcommand: subcommand.into(),
            seed,
            config,
            rows: Vec::new(),
            extras: BTreeMap::new(),
            checks_run: 0,
            checks_failed: 0,
            pass: true,
            wall_clock_s: 0.0,
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) {
        self.extras.insert(key.into(), serde_json::to_value(value).expect("extra is serializable"));
    }

    pub(crate) fn finish(&mut self, wall_clock_s: f64) {
        let checks = self.rows.iter().flat_map(|r| &r.checks);
        self.checks_run = checks.clone().count();
        self.checks_failed = checks.filter(|c| !c.pass).count();
        self.pass = self.checks_failed == 0;
        self.wall_clock_s = wall_clock_s;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Rows of one kind.
    pub fn rows_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.kind == kind)
    }
}

/// The JSON report with the timing field removed.
pub fn without_timing(json: &str) -> Result<Value, serde_json::Error> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_clock_s");
    }
    Ok(v)
}
