#![no_main]

use latin_trades::circulant::{expand_base_row, BaseRow};
use libfuzzer_sys::fuzz_target;

// Any row that parses and passes verification must expand to a trade that
// itself verifies; rows that fail verification must still expand or error
// cleanly, never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(row) = BaseRow::from_json_str(s) else { return };
    let report = row.verify();
    let _ = report.summary();
    match expand_base_row(&row) {
        Ok(t) => {
            if report.ok {
                assert!(t.verify().ok, "valid row expanded to an invalid trade");
            }
        }
        Err(_) => assert!(!report.ok, "valid row failed to expand"),
    }
    let back = BaseRow::from_json_str(&row.to_json_string()).expect("canonical form reparses");
    assert_eq!(back, row);
});
