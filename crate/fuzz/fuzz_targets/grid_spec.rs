#![no_main]

use libfuzzer_sys::fuzz_target;
use xychain_cli::grid::{parse_grid, parse_sizes, Grid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_grid(s) {
        assert!(!values.is_empty() && values.len() <= MAX_GRID_POINTS);
        assert!(values.iter().all(|x| x.is_finite()));
    }
    if let Ok(sizes) = parse_sizes(&Grid::Spec(s.to_string())) {
        assert!(sizes.iter().all(|n| n % 2 == 0 && *n >= 2));
    }
});
