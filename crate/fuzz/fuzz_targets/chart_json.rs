#![no_main]

use libfuzzer_sys::fuzz_target;
use rankframe::chartfile::parse_chart;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    for exact in [false, true] {
        let Ok(loaded) = parse_chart(src, exact) else { continue };
        // a chart that loads is positive definite on its own lattice
        for p in loaded.chart.domain.lattice(3) {
            let g = loaded.chart.metric_at(&p).expect("lattice point is in the domain");
            assert!(g[(0, 0)] > 0.0 && g[(1, 1)] > 0.0 && g[(2, 2)] > 0.0);
        }
    }
});
