#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::cantor::VertexWord;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(w) = VertexWord::parse(text, usize::from(n % 20)) {
        assert_eq!(w.to_string(), text);
    }
});
