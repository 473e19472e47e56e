//! Pass/fail bookkeeping shared by the CLI and the acceptance suite.

use serde::Serialize;

/// One measured property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    /// Informational checks are reported but never fail a run.
    pub gated: bool,
    pub note: String,
}

impl Check {
    pub fn gated(name: &str, pass: bool, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            measured,
            threshold,
            gated: true,
            note: String::new(),
        }
    }

    pub fn info(name: &str, pass: bool, measured: f64, threshold: f64) -> Self {
        Self {
            gated: false,
            ..Self::gated(name, pass, measured, threshold)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// JSON summary written next to every CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

impl Summary {
    pub fn new(command: &str, checks: Vec<Check>, details: serde_json::Value) -> Self {
        let pass = checks.iter().filter(|c| c.gated).all(|c| c.pass);
        Self {
            command: command.into(),
            pass,
            checks,
            details,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}
