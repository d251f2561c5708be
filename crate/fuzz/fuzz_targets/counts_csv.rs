#![no_main]

use libfuzzer_sys::fuzz_target;
use qng_core::io::{parse_counts, write_counts};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_counts(text) else {
        return;
    };
    for r in &records {
        r.click_counts().expect("parsed records are valid");
    }
    // labels with commas or quotes must survive the writer's quoting
    let mut buf = Vec::new();
    write_counts(&mut buf, &records).expect("write to memory");
    let again = parse_counts(std::str::from_utf8(&buf).unwrap()).expect("written counts parse");
    assert_eq!(records.len(), again.len());
    for (a, b) in records.iter().zip(&again) {
        assert_eq!(a.click_counts().unwrap(), b.click_counts().unwrap());
    }
});
