#![no_main]
use libfuzzer_sys::fuzz_target;
use sgdg::experiments::table::{table_from_csv, table_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = table_from_csv(text) {
        // whatever decodes must survive a round trip
        let again = table_to_csv(&rows).expect("encode");
        let back = table_from_csv(&again).expect("decode re-encoded table");
        assert_eq!(back.len(), rows.len());
    }
});
