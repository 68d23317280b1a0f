#![no_main]

use cfran::scenario::{validate_config, ScenarioConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_toml_str(text) {
        // Validation is total, and a parsed config survives a round trip.
        let _ = validate_config(&cfg);
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).expect("round trip parses");
        assert_eq!(again.to_toml_string(), cfg.to_toml_string());
    }
});
