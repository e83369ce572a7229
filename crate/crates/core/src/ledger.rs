//! Uniform pass/fail lines for verification suites: each line names the
//! property that was checked and the subject it was checked on.

use std::fmt;

/// One verification outcome, rendered as `PASS <id> <subject>` or
/// `FAIL <id> <subject>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerLine {
    pub pass: bool,
    pub id: String,
    pub subject: String,
}

impl LedgerLine {
    pub fn new(pass: bool, id: impl Into<String>, subject: impl Into<String>) -> Self {
        LedgerLine { pass, id: id.into(), subject: subject.into() }
    }

    pub fn pass(id: impl Into<String>, subject: impl Into<String>) -> Self {
        Self::new(true, id, subject)
    }

    pub fn fail(id: impl Into<String>, subject: impl Into<String>) -> Self {
        Self::new(false, id, subject)
    }
}

impl fmt::Display for LedgerLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.subject)
    }
}
