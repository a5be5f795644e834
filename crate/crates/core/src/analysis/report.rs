use serde::{Deserialize, Serialize};

/// One verification outcome, printed as a single JSON line by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub parameters: serde_json::Value,
    pub statistic: f64,
    pub bound: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(
        check: impl Into<String>,
        parameters: serde_json::Value,
        statistic: f64,
        bound: f64,
        pass: bool,
    ) -> Self {
        Self {
            check: check.into(),
            parameters,
            statistic,
            bound,
            pass,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report fields are plain JSON")
    }
}
