//! Report emission and the exit-code contract.
//!
//! Exit codes: 0 = pass, 1 = fail with witness, 2 = inconclusive
//! (no solution within the ansatz), 3 = input error. Reports are JSON
//! with sorted keys, so identical inputs give byte-identical bytes.

use std::io::Write;
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT_ERROR: i32 = 3;

pub struct CommandOutput {
    pub report: serde_json::Value,
    pub exit: i32,
}

impl CommandOutput {
    pub fn new(report: serde_json::Value, exit: i32) -> Self {
        CommandOutput { report, exit }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(report: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports are plain data");
    s.push('\n');
    s
}

pub fn emit(report: &serde_json::Value, output: Option<&Path>) -> std::io::Result<()> {
    let body = render(report);
    match output {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    }
}

/// The error report used for exit code 3.
pub fn input_error_report(command: &str, message: &str) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "verdict": "error",
        "error": message,
    })
}
