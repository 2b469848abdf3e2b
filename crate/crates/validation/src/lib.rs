//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;

/// Write one verdict line straight to stderr, bypassing the test
/// harness's output capture so passing criteria are reported too.
pub fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {id}: {} | {title} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

/// Extra diagnostic line under a verdict.
pub fn note(id: u32, text: &str) {
    let _ = std::io::stderr()
        .lock()
        .write_all(format!("acceptance {id}:   {text}\n").as_bytes());
}
