#![no_main]

use dcplace::graph::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Demands attach to an existing graph, so parse against a small
        // host; out-of-range ids and bad values must come back as Err.
        let mut g = Graph::new(4).unwrap();
        for v in 0..3 {
            g.add_edge(v, v + 1, 1.0).unwrap();
        }
        let _ = dcplace::topology::parse_demand_file(text, &mut g);
    }
});
