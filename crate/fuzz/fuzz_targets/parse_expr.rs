#![no_main]

use libfuzzer_sys::fuzz_target;
use rankframe::expr::parse_expr;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let expr = match parse_expr(src) {
        Ok(e) => e,
        Err(e) => {
            assert!(e.pos() <= src.len());
            return;
        }
    };
    // printing round-trips to the same tree
    let printed = expr.to_string();
    let again = parse_expr(&printed).expect("printed expression reparses");
    assert_eq!(again, expr, "{printed}");
    // the compiled program agrees with tree evaluation
    for p in [[0.0, 0.0, 0.0], [0.5, -1.25, 2.0], [-3.0, 1e-3, 7.5]] {
        let a: f64 = expr.eval(&p);
        let b: f64 = expr.compile().eval(&p);
        assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()), "{printed}: {a} vs {b}");
    }
});
