#![no_main]

use libfuzzer_sys::fuzz_target;
use xychain_cli::config::{parse_methods, MethodName};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(methods) = parse_methods(s) {
        assert!(!methods.is_empty() && methods.len() <= MethodName::ALL.len());
        for (i, m) in methods.iter().enumerate() {
            assert!(!methods[..i].contains(m));
        }
    }
});
