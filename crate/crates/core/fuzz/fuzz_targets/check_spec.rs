#![no_main]
use libfuzzer_sys::fuzz_target;
use lolacheck::bench_gen::random_trace;
use lolacheck::evaluator::{Monitor, MonitorError, RunConfig};
use lolacheck::pipeline::check_source;

// Accepted specifications must never fail a synchronous access at runtime.
fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(c) = check_source(src) else { return };
    let trace = random_trace(&c.spec, &c.values, data.len() as u64, 30, 3);
    let config = RunConfig { end_time: None, dump: false, reverse_ties: false };
    if let Err(e @ MonitorError::SyncAccessFailure { .. }) = Monitor::new(&c.spec, &c.values, &c.pacing, config).run(&trace) {
        panic!("{e}");
    }
});
