#![no_main]

use latin_trades::search::{resume_base_row, resume_trade, Checkpoint, SearchBudget};
use libfuzzer_sys::fuzz_target;

// Hostile checkpoints must be rejected by validation, never crash a resume.
// The tiny node budget keeps accepted resumes bounded.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(cp) = Checkpoint::from_json_str(s) else { return };
    let budget = SearchBudget::default().nodes(200);
    match &cp {
        Checkpoint::Trade { .. } => {
            let _ = resume_trade(&cp, &budget);
        }
        Checkpoint::BaseRow { .. } => {
            let _ = resume_base_row(&cp, &budget);
        }
    }
    if let Ok(wire) = cp.to_json_string() {
        let _ = Checkpoint::from_json_str(&wire).expect("canonical form reparses");
    }
});
