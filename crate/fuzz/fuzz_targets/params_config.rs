#![no_main]

use airship_core::params::ParamsConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ParamsConfig::from_toml_str(text) else {
        return;
    };
    if let Ok(p) = cfg.to_params() {
        assert!(p.mass.is_finite());
        let _ = cfg.resolved();
    }
});
