#![no_main]
use libfuzzer_sys::fuzz_target;
use sgdg::experiments::config::parse_config;
use sgdg::experiments::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_config(text);
        if let Ok(cfg) = RunConfig::from_config_str(text, Some("advection")) {
            let _ = cfg.validate();
        }
    }
});
