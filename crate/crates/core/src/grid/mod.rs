//! Periodic-box discretization of ℝ³ and its frequency decompositions.
//!
//! A [`BoxGrid`] is an `n³` grid on `[0, L)³`. Its dual lattice is
//! `(2π/L)·{−n/2, …, n/2−1}³`, optionally offset by a constant *carrier*
//! frequency `ξ₀`. With a carrier, stored physical values are the envelope
//! `e^{−iξ₀·x} ψ(x)`; pointwise products of the form `ψ̄₁ψ₂` between fields
//! sharing the carrier are then exact envelope products, which lets a small
//! grid resolve data living near `|ξ| ≫ πn/L`.

mod caps;
mod fft;
mod field;
pub mod io;
mod multiplier;
mod norms;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use caps::{cap_set, CapSet, MAX_CAP_LEVEL};
pub use field::{transform, Direction, Representation, ScalarField, SpinorField};
pub use multiplier::{
    apply_multiplier, bump, cube_indices, dyadic, dyadic_cumulative, dyadic_tilde, lattice_bump,
    lattice_bump_tilde, mass_dyadic, multiplier_symbol, smooth_step, symbol_values, apply_symbol,
    MultiplierKind, MultiplierSpec,
};
pub use norms::{mixed_norm, sobolev_norm, spatial_norm, trapezoid_weights, Exponent, Trajectory};


#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    n: usize,
    length: f64,
    carrier: [f64; 3],
}

/// `make_grid(n, L)`: `n` a power of two `≥ 8`, `L > 0`.
pub fn make_grid(n: usize, length: f64) -> Result<BoxGrid> {
    BoxGrid::new(n, length)
}

impl BoxGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_carrier(n, length, [0.0; 3])
    }

    pub fn with_carrier(n: usize, length: f64, carrier: [f64; 3]) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n}: power of two required (n >= 8)")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive and finite")));
        }
        if carrier.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("carrier must be finite".into()));
        }
        Ok(Self { n, length, carrier })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn carrier(&self) -> [f64; 3] {
        self.carrier
    }

    pub fn has_carrier(&self) -> bool {
        self.carrier != [0.0; 3]
    }

    /// Number of grid points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// `πn/L`: the largest lattice frequency per axis, up to one spacing.
    pub fn band_limit(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Enforces `2^{k_max+1} < πn/L`.
    pub fn check_band(&self, k_max: i32) -> Result<()> {
        let needed = 2f64.powi(k_max + 1);
        let limit = self.band_limit();
        if needed < limit {
            Ok(())
        } else {
            Err(Error::Aliasing { needed, limit })
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed lattice label of a DFT index.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Lattice part of the frequency (no carrier).
    #[inline]
    pub fn envelope_frequency(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let d = self.dual_spacing();
        [
            d * self.wavenumber(c[0]) as f64,
            d * self.wavenumber(c[1]) as f64,
            d * self.wavenumber(c[2]) as f64,
        ]
    }

    /// Frequency carried by Fourier mode `idx`, carrier included.
    #[inline]
    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let e = self.envelope_frequency(idx);
        [e[0] + self.carrier[0], e[1] + self.carrier[1], e[2] + self.carrier[2]]
    }

    pub fn frequencies(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    /// Physical coordinate of grid point `idx`, in `[0, L)³`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let h = self.spacing();
        [h * c[0] as f64, h * c[1] as f64, h * c[2] as f64]
    }

    /// Index of grid point `idx` translated by `shift` cells, periodically.
    pub fn shifted(&self, idx: usize, shift: [i64; 3]) -> usize {
        let c = self.coords(idx);
        let n = self.n as i64;
        let w = |a: usize, s: i64| (a as i64 + s).rem_euclid(n) as usize;
        self.index(w(c[0], shift[0]), w(c[1], shift[1]), w(c[2], shift[2]))
    }

    /// Whether mode `idx` lies strictly inside the Nyquist ball `|ζ| < πn/L`
    /// (envelope frequency, carrier excluded).
    pub fn in_band(&self, idx: usize) -> bool {
        crate::algebra::norm3(self.envelope_frequency(idx)) < self.band_limit()
    }

    pub fn same_shape(&self, other: &BoxGrid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lattice_for_two_pi_box() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let mut seen = std::collections::HashSet::new();
        for i in 0..g.len() {
            let f = g.frequency(i);
            for c in f {
                assert!((c - c.round()).abs() < 1e-12);
                assert!((-4.0..=3.0).contains(&c.round()));
            }
            seen.insert(f.map(|c| c.round() as i64));
        }
        assert_eq!(seen.len(), 512);
        let zeros = (0..g.len()).filter(|&i| g.frequency(i) == [0.0; 3]).count();
        assert_eq!(zeros, 1);
    }

    #[test]
    fn spacing_and_guards() {
        let g = make_grid(64, 32.0).unwrap();
        assert!((g.dual_spacing() - 2.0 * PI / 32.0).abs() < 1e-15);
        assert!(make_grid(33, 1.0).is_err());
        assert!(make_grid(4, 1.0).is_err());
        assert!(make_grid(16, 0.0).is_err());
        let small = make_grid(16, 2.0 * PI).unwrap();
        assert!(matches!(small.check_band(6), Err(Error::Aliasing { .. })));
        assert!(small.check_band(1).is_ok());
        assert!(small.check_band(2).is_err());
    }

    #[test]
    fn shifted_wraps() {
        let g = make_grid(8, 1.0).unwrap();
        let i = g.index(7, 0, 3);
        assert_eq!(g.coords(g.shifted(i, [1, -1, 0])), [0, 7, 3]);
    }
}
