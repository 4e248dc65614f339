#![no_main]

use libfuzzer_sys::fuzz_target;
use mixbgk::cli::read_series_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = read_series_csv(data) {
        for row in &table.rows {
            assert_eq!(row.len(), 20);
        }
    }
});
