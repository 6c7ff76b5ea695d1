use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub ok: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(id: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        CheckResult { id: id.into(), ok, detail: detail.into() }
    }
}

/// Machine-readable verdicts. Contains no timings, so equal inputs give equal bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Input name to lowercase hex SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub checks: Vec<CheckResult>,
    pub ok: bool,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Report {
            tool: "qv".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            inputs: BTreeMap::new(),
            checks: Vec::new(),
            ok: true,
        }
    }

    pub fn add_input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.into(), super::digest(bytes));
    }

    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn check(&mut self, id: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.push(CheckResult::new(id, ok, detail));
    }

    /// Sorts checks by id and recomputes the overall verdict.
    pub fn finish(mut self) -> Self {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
        self.ok = self.checks.iter().all(|c| c.ok);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.ok)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
