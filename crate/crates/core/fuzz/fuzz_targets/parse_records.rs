#![no_main]

use kge_core::experiments::csv::format_records;
use kge_core::experiments::parse_records;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_records(text) {
        let again = parse_records(&format_records(&records)).expect("reformatted records parse");
        assert_eq!(records.len(), again.len());
        // NaN sign is not preserved by the text form
        let same = |x: f64, y: f64| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan());
        for (a, b) in records.iter().zip(&again) {
            assert!(same(a.t, b.t) && same(a.linf, b.linf) && same(a.energy, b.energy));
            assert!(same(a.momentum, b.momentum) && same(a.c_e, b.c_e) && same(a.c_p, b.c_p));
            assert!(same(a.growth_factor, b.growth_factor));
        }
    }
});
