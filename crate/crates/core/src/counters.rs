//! Operation counters backing the complexity claims.
//!
//! The hot loops register how many floating-point additions and
//! multiplications they perform (bulk increments per loop, so the counters
//! cost nothing measurable). The addition counter covers the fast Hough
//! accumulation stage; the multiplication counter covers the fast pipeline's
//! filtering, linogram interpolation and row weighting.

use std::sync::atomic::{AtomicU64, Ordering};

static ADDITIONS: AtomicU64 = AtomicU64::new(0);
static MULTIPLICATIONS: AtomicU64 = AtomicU64::new(0);

/// Reset both counters to zero.
pub fn reset() {
    ADDITIONS.store(0, Ordering::Relaxed);
    MULTIPLICATIONS.store(0, Ordering::Relaxed);
}

/// Additions performed since the last [`reset`].
pub fn additions() -> u64 {
    ADDITIONS.load(Ordering::Relaxed)
}

/// Multiplications (and divisions) performed since the last [`reset`].
pub fn multiplications() -> u64 {
    MULTIPLICATIONS.load(Ordering::Relaxed)
}

pub(crate) fn count_additions(n: u64) {
    ADDITIONS.fetch_add(n, Ordering::Relaxed);
}

pub(crate) fn count_multiplications(n: u64) {
    MULTIPLICATIONS.fetch_add(n, Ordering::Relaxed);
}
