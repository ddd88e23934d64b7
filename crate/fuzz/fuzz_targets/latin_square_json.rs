#![no_main]

use latin_trades::mols::{verify_orthogonal, LatinSquare};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(sq) = LatinSquare::from_json_str(s) else { return };
    let twice = sq.transpose().transpose();
    assert_eq!(twice.to_json_string(), sq.to_json_string());
    // A square is never orthogonal to itself beyond order 1.
    let self_orth = verify_orthogonal(&sq, &sq).expect("equal orders");
    assert_eq!(self_orth, sq.n() <= 1);
    let back = LatinSquare::from_json_str(&sq.to_json_string()).expect("canonical form reparses");
    assert_eq!(back.to_json_string(), sq.to_json_string());
});
