#![no_main]

use libfuzzer_sys::fuzz_target;
use purikit::SweepConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = SweepConfig::parse(text) {
        assert_eq!(SweepConfig::parse(&cfg.to_kv()).as_ref(), Ok(&cfg));
    }
});
