#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::cantor::{code_z, dyadic_preimage, dyadic_preimage_exact};

fuzz_target!(|data: &[u8]| {
    let Some((&level, rest)) = data.split_first() else { return };
    let level = usize::from(level % 64);
    let numerators: Vec<u64> = rest
        .chunks_exact(8)
        .take(16)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Ok(w) = dyadic_preimage_exact(&numerators, level) {
        assert_eq!(code_z(&w).numerators, numerators);
    }
    let corner: Vec<f64> = numerators.iter().map(|&c| c as f64 / u64::MAX as f64).collect();
    if let Ok(w) = dyadic_preimage(&corner, level) {
        assert_eq!(w.depth(), level);
    }
});
