#![no_main]

use contact_pairs::expr::parse;
use libfuzzer_sys::fuzz_target;

const POINT: [f64; 6] = [0.3, -1.1, 2.0, 0.7, 5.5, -0.2];

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse(text, POINT.len()) else { return };
    // printing must produce text the parser accepts with the same meaning
    let printed = e.to_string();
    let again = parse(&printed, POINT.len()).expect("printed expressions reparse");
    if let (Ok(a), Ok(b)) = (e.eval(&POINT), again.eval(&POINT)) {
        assert!(a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
    for axis in 0..POINT.len() {
        let _ = e.partial(axis).eval(&POINT);
    }
});
