#![no_main]
use libfuzzer_sys::fuzz_target;
use sgdg::experiments::table::table_from_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = table_from_json(text);
    }
});
