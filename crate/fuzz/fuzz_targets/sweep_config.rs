#![no_main]

use libfuzzer_sys::fuzz_target;
use xychain_cli::config::{RawConfig, SweepConfig};
use xychain_cli::error::EXIT_USAGE;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let raw = match RawConfig::from_toml(s) {
        Ok(raw) => raw,
        Err(e) => {
            assert_eq!(e.exit_code(), EXIT_USAGE);
            return;
        }
    };
    match SweepConfig::try_from(raw) {
        Ok(config) => {
            assert!(!config.methods.is_empty());
            assert!(!config.n.is_empty() && !config.g.is_empty() && !config.beta.is_empty());
            // The echo is itself a valid configuration.
            let echo = RawConfig::from_toml(&config.to_toml()).expect("echo parses");
            let again = SweepConfig::try_from(echo).expect("echo validates");
            assert_eq!(again.row_count(), config.row_count());
        }
        Err(e) => assert_eq!(e.exit_code(), EXIT_USAGE),
    }
});
