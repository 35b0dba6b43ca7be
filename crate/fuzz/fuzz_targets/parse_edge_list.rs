#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Malformed input must come back as Err, never as a panic.
        let _ = dcplace::topology::parse_edge_list(text);
    }
});
