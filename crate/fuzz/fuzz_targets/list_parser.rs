#![no_main]

use libfuzzer_sys::fuzz_target;
use mixbgk::cli::parse_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_list(text) {
        assert!(!values.is_empty());
        assert!(values.iter().all(|x| x.is_finite()));
        assert_eq!(values.len(), text.split(',').count());
    }
});
