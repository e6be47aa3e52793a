//! Fault-injection hooks used by the verification suite to prove that its
//! checks detect broken energy assembly. Never enabled in normal runs.

use std::sync::atomic::{AtomicBool, Ordering};

static FLIP_ROTATION_SIGN: AtomicBool = AtomicBool::new(false);

/// Flip the sign of the rotational kinetic term `T_J` in every subsequent
/// energy assembly (process wide).
#[doc(hidden)]
pub fn set_flip_rotation_sign(on: bool) {
    FLIP_ROTATION_SIGN.store(on, Ordering::SeqCst);
}

#[inline]
pub(crate) fn rotation_sign() -> f64 {
    if FLIP_ROTATION_SIGN.load(Ordering::Relaxed) {
        -1.0
    } else {
        1.0
    }
}
