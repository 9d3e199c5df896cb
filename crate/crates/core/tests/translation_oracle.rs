//! Translation blocks and block determinants against the unreduced
//! general-direction construction.

mod common;

use common::equivalences::{block_sum_deviation, reduced_block_deviation, trace_series_excess};

#[test]
fn reduced_block_matches_unreduced_along_z() {
    let (worst, leak) = reduced_block_deviation(4, &[0.3, 1.7, 6.0]);
    assert!(worst < 1e-12, "{worst}");
    // Off-diagonal azimuthal couplings vanish along z.
    assert!(leak < 1e-14, "{leak}");
}

#[test]
fn block_sum_equals_full_log_det() {
    let dev = block_sum_deviation(3);
    assert!(dev < 1e-11, "{dev}");
}

#[test]
fn trace_series_matches_log_det() {
    let excess = trace_series_excess();
    assert!(excess <= 0.0, "{excess}");
}
