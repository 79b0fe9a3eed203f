#![no_main]

use kge_core::experiments::config::parse_pairs;
use kge_core::experiments::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let pairs = parse_pairs(text);
    let config = parse_config(Some(text), &[]);
    // anything the config accepts must have tokenized cleanly
    if config.is_ok() {
        assert!(pairs.is_ok());
    }
    if let Ok(cfg) = config {
        assert!(cfg.dt > 0.0 && cfg.h > 0.0 && cfg.a < cfg.b);
    }
});
