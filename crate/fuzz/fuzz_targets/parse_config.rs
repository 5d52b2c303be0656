#![no_main]

use libfuzzer_sys::fuzz_target;
use nlpc::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // parsing must never panic; on success the validated invariants hold
    if let Ok(cfg) = RunConfig::parse(text) {
        let period = cfg.stack.period();
        assert!(period > 0.0 && period.is_finite());
        let fill = cfg.stack.fill();
        assert!(fill > 0.0 && fill < 1.0);
        if let Some(p) = &cfg.pump {
            assert!(p.omega_norm > 0.0);
        }
        if let Some(dc) = &cfg.downconversion {
            assert!(dc.split > 0.0 && dc.split < 1.0);
        }
    }
});
