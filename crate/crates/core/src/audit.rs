//! Pass/fail records produced by the solution auditors.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditCheck {
    /// Which guarantee is being checked, e.g. `neighbor-count` or `vertex-dual`.
    pub name: String,
    pub passed: bool,
    pub iteration: Option<usize>,
    /// Witness set or the compared quantities.
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn check(&mut self, name: &str, passed: bool, iteration: Option<usize>, detail: impl Into<String>) {
        self.checks.push(AuditCheck {
            name: name.to_string(),
            passed,
            iteration,
            detail: detail.into(),
        });
    }

    /// Records a check only when it fails, plus a single summary pass line
    /// through [`AuditReport::summarize`]; keeps per-vertex sweeps compact.
    pub fn require(&mut self, name: &str, passed: bool, iteration: Option<usize>, detail: impl FnOnce() -> String) {
        if !passed {
            self.check(name, false, iteration, detail());
        }
    }

    pub fn summarize(&mut self, name: &str, detail: impl Into<String>) {
        if !self.checks.iter().any(|c| c.name == name && !c.passed) {
            self.check(name, true, None, detail);
        }
    }

    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failed(&self, name: &str) -> bool {
        self.violations().any(|c| c.name == name)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            match c.iteration {
                Some(i) => writeln!(f, "{status} {} (i={i}): {}", c.name, c.detail)?,
                None => writeln!(f, "{status} {}: {}", c.name, c.detail)?,
            }
        }
        Ok(())
    }
}
