//! Fixtures shared by the benchmarks.

use hdirac_core::evolution::gaussian_packet;
use hdirac_core::{BoxGrid, Sign, SpinorField};

/// Positive-branch Gaussian packet with unit `L²` norm on an `n³` grid.
pub fn packet(n: usize, length: f64) -> SpinorField {
    let grid = BoxGrid::new(n, length).expect("valid grid");
    gaussian_packet(&grid, 1.0, 1.0, Some(Sign::Plus), 1.0, 0.0).expect("packet")
}
