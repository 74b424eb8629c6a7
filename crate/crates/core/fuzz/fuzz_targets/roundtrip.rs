#![no_main]
use libfuzzer_sys::fuzz_target;
use lolacheck::parser::{parse, print_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(spec) = parse(src) else { return };
    let printed = print_spec(&spec);
    let again = parse(&printed).unwrap_or_else(|e| panic!("printed spec does not parse: {e:?}\n{printed}"));
    assert_eq!(spec, again, "{printed}");
});
