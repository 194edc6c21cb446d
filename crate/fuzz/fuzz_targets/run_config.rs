#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_json(text) else { return };
    if cfg.validate().is_ok() && cfg.depth <= 24 {
        let _ = cfg.digest();
        let _ = cfg.resolve();
    }
});
