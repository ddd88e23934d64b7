#![no_main]

use latin_trades::trade::render_grid;
use latin_trades::Trade;
use libfuzzer_sys::fuzz_target;

// Anything that parses must survive verification and rendering, and its
// canonical form must reparse to the same trade.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(t) = Trade::from_json_str(s) else { return };
    let report = t.verify();
    let _ = report.summary();
    let _ = render_grid(&t);
    let back = Trade::from_json_str(&t.to_json_string()).expect("canonical form reparses");
    assert_eq!(back.cells().len(), t.cells().len());
    assert_eq!(back.verify().ok, report.ok);
});
