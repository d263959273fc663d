//! Pass/fail tables produced by the validators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn extend(&mut self, o: Report) {
        self.checks.extend(o.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check, failures first.
    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        for c in self.checks.iter().filter(|c| !c.passed).chain(self.checks.iter().filter(|c| c.passed)) {
            let status = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                lines.push(format!("{status}  {}", c.name));
            } else {
                lines.push(format!("{status}  {}: {}", c.name, c.detail));
            }
        }
        lines.join("\n")
    }
}
