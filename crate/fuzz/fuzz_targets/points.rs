#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::cli::parse_points;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = usize::from(n % 5) + 1;
    for (_, row) in parse_points(text, n) {
        if let Ok(x) = row {
            assert_eq!(x.len(), n);
        }
    }
});
