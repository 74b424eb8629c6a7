#![no_main]
use libfuzzer_sys::fuzz_target;
use lolacheck::pipeline::check_source;
use lolacheck::trace_io::read_csv_trace;

const SPEC: &str = "input b: Bool\ninput i: Int8\ninput u: UInt64\ninput f: Float32\ninput s: String\ninput t: (Float64, Int64)\n\
output o := b && i > 0 && u > 0 && f > 0.0 && s == \"x\" && t.1 > 0";

fuzz_target!(|data: &[u8]| {
    let c = check_source(SPEC).expect("fuzz spec checks");
    let _ = read_csv_trace(data, &c.spec, &c.values);
});
