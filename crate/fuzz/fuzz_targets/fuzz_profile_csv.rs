#![no_main]
use libfuzzer_sys::fuzz_target;
use sgdg::experiments::table::profile_from_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = profile_from_csv(text);
    }
});
