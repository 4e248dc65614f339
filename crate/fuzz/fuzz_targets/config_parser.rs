#![no_main]

use libfuzzer_sys::fuzz_target;
use mixbgk::cli::{emit_config, parse_config, parse_config_in};
use mixbgk::mixture::Regime;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // Anything accepted must survive the provenance round trip.
        let again = parse_config(&emit_config(&cfg)).expect("emitted config parses");
        assert_eq!(again, cfg);
    }
    let _ = parse_config_in(text, Regime::KernelStudy);
});
