#![no_main]

use airship_core::harness::compute_metrics;
use airship_core::harness::log::{parse_csv, parse_manifest};
use libfuzzer_sys::fuzz_target;

// Input layout: JSON manifest, a NUL byte, then the CSV body.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (manifest, csv) = text.split_once('\0').unwrap_or((text, ""));
    let Ok(m) = parse_manifest(manifest) else { return };
    if let Ok(log) = parse_csv(csv, m) {
        let _ = compute_metrics(&log);
    }
});
