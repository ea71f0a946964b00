use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use opalg_core::ToleranceConfig;

pub const REPORT_SCHEMA: &str = "opalg-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Relation::Le => value <= bound,
            Relation::Lt => value < bound,
            Relation::Ge => value >= bound,
            Relation::Gt => value > bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: String,
    pub kind: String,
    pub status: Status,
    pub metrics: IndexMap<String, Value>,
    pub checks: Vec<Check>,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub artifacts: IndexMap<String, Value>,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<&Value> {
        self.metrics.get(name)
    }
}

/// Accumulates metrics and checks; the status is derived when the report is finished.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    metrics: IndexMap<String, Value>,
    checks: Vec<Check>,
    flags: Vec<String>,
    artifacts: IndexMap<String, Value>,
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn metric(&mut self, name: &str, value: impl Into<Value>) -> &mut Self {
        self.metrics.insert(name.to_string(), value.into());
        self
    }

    pub fn check(&mut self, name: &str, value: f64, relation: Relation, bound: f64) -> bool {
        let passed = relation.holds(value, bound);
        self.checks.push(Check {
            name: name.to_string(),
            value,
            relation,
            bound,
            passed,
        });
        passed
    }

    /// Boolean assertion recorded as `value >= 1`.
    pub fn require(&mut self, name: &str, ok: bool) -> bool {
        self.check(name, if ok { 1.0 } else { 0.0 }, Relation::Ge, 1.0)
    }

    pub fn flag(&mut self, message: impl Into<String>) {
        self.flags.push(message.into());
    }

    pub fn artifact(&mut self, name: &str, value: Value) {
        self.artifacts.insert(name.to_string(), value);
    }

    /// Copies another builder's content under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ReportBuilder) {
        for (k, v) in other.metrics {
            self.metrics.insert(format!("{prefix}.{k}"), v);
        }
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        for f in other.flags {
            self.flags.push(format!("{prefix}: {f}"));
        }
        for (k, v) in other.artifacts {
            self.artifacts.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn finish(self, scenario: &str, kind: &str, cfg: &ToleranceConfig, emit: bool) -> Report {
        let status = if self.checks.iter().any(|c| !c.passed) {
            Status::Fail
        } else if !self.flags.is_empty() {
            Status::Flagged
        } else {
            Status::Pass
        };
        Report {
            schema: REPORT_SCHEMA,
            scenario: scenario.to_string(),
            kind: kind.to_string(),
            status,
            metrics: self.metrics,
            checks: self.checks,
            flags: self.flags,
            artifacts: if emit { self.artifacts } else { IndexMap::new() },
            provenance: Provenance {
                seed: cfg.rng_seed,
                tolerances: *cfg,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }
}
