#![no_main]

use airship_core::harness::overrides::{parse_override, parse_value};
use airship_core::harness::Scenario;
use libfuzzer_sys::fuzz_target;

const BASE: &str = "name = \"fuzz\"\nduration = 1.0\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    for l in &lines {
        if let Ok((_, v)) = parse_override(l) {
            let _ = parse_value(&v);
        }
    }
    let base = Scenario::from_toml_str(BASE).unwrap();
    let _ = base.with_overrides(&lines);
});
