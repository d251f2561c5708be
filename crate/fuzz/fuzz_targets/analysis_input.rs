#![no_main]

use libfuzzer_sys::fuzz_target;
use qng_core::io::{analyze, parse_input, AnalyzeOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(inputs) = parse_input(text) else {
        return;
    };
    if let Ok(reports) = analyze(&inputs, &AnalyzeOptions::default()) {
        assert_eq!(reports.len(), inputs.len());
        for r in &reports {
            assert!(r.delta_w.is_finite());
            assert!(!r.non_gaussian || r.delta_w > 0.0);
        }
    }
});
