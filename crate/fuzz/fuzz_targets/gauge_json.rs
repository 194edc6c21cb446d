#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::gauge::{eval_h, GaugeSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = GaugeSpec::from_json(text) else { return };
    let back = GaugeSpec::from_json(&spec.to_json()).expect("serialized gauge parses");
    assert_eq!(back, spec);
    for t in [0.0, 1e-300, 1e-9, 0.5, 1.0] {
        if let Ok(v) = eval_h(&spec, t) {
            assert!(v >= 0.0 || v.is_nan());
        }
    }
});
