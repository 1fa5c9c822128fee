#![no_main]

use libfuzzer_sys::fuzz_target;
use purikit::mtx::{parse_matrix_market, write_matrix_market};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matrix_market(text) {
        let again = parse_matrix_market(&write_matrix_market(&m, &[])).expect("writer output parses");
        assert_eq!(again.as_slice(), m.as_slice());
    }
});
