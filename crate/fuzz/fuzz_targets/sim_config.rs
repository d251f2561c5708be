#![no_main]

use libfuzzer_sys::fuzz_target;
use qng_core::io::parse_sim_config;
use qng_core::photon_sim::source_click_probabilities;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = parse_sim_config(text) else {
        return;
    };
    for (_, cfg) in &doc.runs {
        let p = source_click_probabilities(cfg).expect("validated config");
        assert!((p.total() - 1.0).abs() < 1e-9);
    }
});
