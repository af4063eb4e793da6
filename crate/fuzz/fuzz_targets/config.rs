#![no_main]

use infosel_tool::config::{parse_config, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(overrides) = parse_config(text) {
        let mut cfg = RunConfig::default();
        cfg.apply(&overrides);
        let _ = cfg.validate();
    }
});
