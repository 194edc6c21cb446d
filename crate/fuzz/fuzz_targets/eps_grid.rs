#![no_main]

use libfuzzer_sys::fuzz_target;
use ponomarev::analysis::EpsGrid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(grid) = text.parse::<EpsGrid>() else { return };
    if grid.len() <= 1 << 16 {
        let pts = grid.points();
        assert_eq!(pts.len(), grid.len());
        assert!(pts.windows(2).all(|w| w[0] <= w[1]));
    }
});
