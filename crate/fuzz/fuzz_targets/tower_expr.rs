#![no_main]

use glkit::arith::BitBudget;
use glkit::tower::{eval_tower_expr, tower_log_star};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // small budget keeps exact evaluation cheap
    if let Ok(t) = eval_tower_expr(text, BitBudget(1 << 12)) {
        let shown = t.to_string();
        let back = eval_tower_expr(&shown, BitBudget(1 << 12)).expect("display reparses");
        assert_eq!(back, t);
        let _ = tower_log_star(&t);
    }
});
