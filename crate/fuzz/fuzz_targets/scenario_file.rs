#![no_main]

use airship_core::harness::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // The first byte picks the format so both decoders see structured input.
    let parsed = match text.as_bytes().first() {
        Some(b'{') => Scenario::from_json_str(text),
        _ => Scenario::from_toml_str(text),
    };
    let Ok(sc) = parsed else { return };
    if sc.validate().is_ok() {
        let _ = sc.plant_params();
        let _ = sc.controller_params();
        let _ = sc.command_at(sc.duration * 0.5);
        let _ = sc.config_hash();
    }
});
