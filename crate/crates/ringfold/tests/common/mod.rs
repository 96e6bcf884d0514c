//! Shared helpers for the acceptance suite.

/// Runs one acceptance criterion, printing a single PASS/FAIL line with its
/// number before propagating any failure to the test harness.
pub fn criterion(n: usize, title: &str, body: impl FnOnce() -> anyhow::Result<String>) {
    match body() {
        Ok(detail) => println!("criterion {n:02}: PASS - {title} ({detail})"),
        Err(e) => {
            println!("criterion {n:02}: FAIL - {title}: {e}");
            panic!("criterion {n} failed: {e}");
        }
    }
}
