//! Smooth Fourier multipliers: dyadic annuli, angular caps and lattice cubes.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::caps::{cap_set, CapSet};
use super::{BoxGrid, SpinorField};
use crate::algebra::norm3;
use crate::error::{Error, Result};

fn g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// `T(u) = g(u) / (g(u) + g(1 − u))`, `g(u) = e^{−1/u}`: 0 for `u ≤ 0`, 1 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = g(u);
        a / (a + g(1.0 - u))
    }
}

/// Even cutoff, 1 on `[−1, 1]` and 0 outside `(−2, 2)`.
pub fn bump(s: f64) -> f64 {
    smooth_step(2.0 - s.abs())
}

/// `φ_k(r) = ρ(2^{−k} r) − ρ(2^{−k+1} r)`, supported where `2^{k−1} ≤ r ≤ 2^{k+1}`.
pub fn dyadic(k: i32, r: f64) -> f64 {
    let s = 2f64.powi(-k) * r;
    bump(s) - bump(2.0 * s)
}

/// `φ_{≤k}(r) = ρ(2^{−k} r)`.
pub fn dyadic_cumulative(k: i32, r: f64) -> f64 {
    bump(2f64.powi(-k) * r)
}

/// `φ̃_k = φ_{k−1} + φ_k + φ_{k+1}`, written in telescoped form.
pub fn dyadic_tilde(k: i32, r: f64) -> f64 {
    let s = 2f64.powi(-k) * r;
    bump(0.5 * s) - bump(4.0 * s)
}

/// Mass-adapted annulus: for `m > 0` this is 0 below `k = 0`, `φ_{≤0}` at
/// `k = 0` and `φ_k` above; for `m = 0` it is plain `φ_k`.
pub fn mass_dyadic(k: i32, r: f64, m: f64) -> f64 {
    if m > 0.0 {
        match k {
            k if k < 0 => 0.0,
            0 => dyadic_cumulative(0, r),
            _ => dyadic(k, r),
        }
    } else {
        dyadic(k, r)
    }
}

/// 1-D cube bump `η(x) = S(x + ½) − S(x − ½)`, `S(y) = T(3y + ½)`.
/// Supported in `(−2/3, 2/3)`; integer translates sum to 1.
pub fn lattice_bump(x: f64) -> f64 {
    let s = |y: f64| smooth_step(3.0 * y + 0.5);
    s(x + 0.5) - s(x - 0.5)
}

/// Equals 1 on the support of [`lattice_bump`].
pub fn lattice_bump_tilde(x: f64) -> f64 {
    bump(1.5 * x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `P_k`
    Dyadic { k: i32 },
    /// `P_{≤k}`
    Cumulative { k: i32 },
    /// `P_{>k} = 1 − P_{≤k}`
    Above { k: i32 },
    /// `P̃_k`
    Tilde { k: i32 },
    /// `P_k^m`
    MassDyadic { k: i32 },
    /// `K_l^ν`
    Angular { l: u32, nu: usize },
    /// `K̃_l^ν`
    AngularTilde { l: u32, nu: usize },
    /// `Γ_{k,n}` with lattice point `n = 2^k · cell`.
    Cube { k: i32, cell: [i64; 3] },
    CubeTilde { k: i32, cell: [i64; 3] },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub mass: f64,
}

impl MultiplierSpec {
    pub fn new(kind: MultiplierKind, mass: f64) -> Self {
        Self { kind, mass }
    }

    pub fn dyadic(k: i32) -> Self {
        Self::new(MultiplierKind::Dyadic { k }, 0.0)
    }

    pub fn cumulative(k: i32) -> Self {
        Self::new(MultiplierKind::Cumulative { k }, 0.0)
    }

    pub fn above(k: i32) -> Self {
        Self::new(MultiplierKind::Above { k }, 0.0)
    }

    pub fn tilde(k: i32) -> Self {
        Self::new(MultiplierKind::Tilde { k }, 0.0)
    }

    pub fn mass_dyadic(k: i32, m: f64) -> Self {
        Self::new(MultiplierKind::MassDyadic { k }, m)
    }

    pub fn angular(l: u32, nu: usize) -> Self {
        Self::new(MultiplierKind::Angular { l, nu }, 0.0)
    }

    pub fn angular_tilde(l: u32, nu: usize) -> Self {
        Self::new(MultiplierKind::AngularTilde { l, nu }, 0.0)
    }

    pub fn cube(k: i32, cell: [i64; 3]) -> Self {
        Self::new(MultiplierKind::Cube { k, cell }, 0.0)
    }

    pub fn cube_tilde(k: i32, cell: [i64; 3]) -> Self {
        Self::new(MultiplierKind::CubeTilde { k, cell }, 0.0)
    }

    /// Outer radius of the symbol's support when it is bounded.
    fn support_radius(&self) -> Option<f64> {
        match self.kind {
            MultiplierKind::Dyadic { k } | MultiplierKind::MassDyadic { k } => Some(2f64.powi(k + 1)),
            MultiplierKind::Tilde { k } => Some(2f64.powi(k + 2)),
            _ => None,
        }
    }
}

/// A spec with its cap set resolved, ready for repeated evaluation.
pub(crate) struct Prepared {
    spec: MultiplierSpec,
    caps: Option<Arc<CapSet>>,
}

impl Prepared {
    pub(crate) fn new(spec: &MultiplierSpec) -> Result<Self> {
        if !(spec.mass >= 0.0 && spec.mass.is_finite()) {
            return Err(Error::OutOfRange(format!("mass {} must be finite and >= 0", spec.mass)));
        }
        let caps = match spec.kind {
            MultiplierKind::Angular { l, nu } | MultiplierKind::AngularTilde { l, nu } => {
                let caps = cap_set(l)?;
                if nu >= caps.len() {
                    return Err(Error::OutOfRange(format!(
                        "cap index {nu} outside Omega_{l} of size {}",
                        caps.len()
                    )));
                }
                Some(caps)
            }
            _ => None,
        };
        Ok(Self { spec: *spec, caps })
    }

    pub(crate) fn eval(&self, xi: [f64; 3]) -> f64 {
        let r = norm3(xi);
        let cube = |k: i32, cell: [i64; 3], f: fn(f64) -> f64| {
            let s = 2f64.powi(-k);
            (0..3).map(|j| f(xi[j] * s - cell[j] as f64)).product::<f64>()
        };
        match self.spec.kind {
            MultiplierKind::Dyadic { k } => dyadic(k, r),
            MultiplierKind::Cumulative { k } => dyadic_cumulative(k, r),
            MultiplierKind::Above { k } => 1.0 - dyadic_cumulative(k, r),
            MultiplierKind::Tilde { k } => dyadic_tilde(k, r),
            MultiplierKind::MassDyadic { k } => mass_dyadic(k, r, self.spec.mass),
            MultiplierKind::Angular { nu, .. } => self.caps.as_ref().map_or(0.0, |c| c.kappa(nu, xi)),
            MultiplierKind::AngularTilde { nu, .. } => {
                self.caps.as_ref().map_or(0.0, |c| c.kappa_tilde(nu, xi))
            }
            MultiplierKind::Cube { k, cell } => cube(k, cell, lattice_bump),
            MultiplierKind::CubeTilde { k, cell } => cube(k, cell, lattice_bump_tilde),
        }
    }
}

/// Symbol value at frequency `ξ`. Angular symbols vanish at `ξ = 0`.
pub fn multiplier_symbol(spec: &MultiplierSpec, xi: [f64; 3]) -> Result<f64> {
    Ok(Prepared::new(spec)?.eval(xi))
}

/// Symbol sampled on every mode of `grid`, in storage order.
pub fn symbol_values(spec: &MultiplierSpec, grid: &BoxGrid) -> Result<Vec<f64>> {
    let p = Prepared::new(spec)?;
    Ok((0..grid.len()).map(|i| p.eval(grid.frequency(i))).collect())
}

/// `F⁻¹(symbol · Fψ)`; the result keeps the representation of `psi`.
///
/// On carrier-free grids, bounded-support symbols must fit inside the band.
pub fn apply_multiplier(spec: &MultiplierSpec, psi: &SpinorField) -> Result<SpinorField> {
    let grid = *psi.grid();
    if let (Some(radius), false) = (spec.support_radius(), grid.has_carrier()) {
        let limit = grid.band_limit();
        if radius >= limit {
            return Err(Error::Aliasing { needed: radius, limit });
        }
    }
    let sym = symbol_values(spec, &grid)?;
    let mut out = psi.to_fourier();
    for c in out.components_mut() {
        for (z, &w) in c.iter_mut().zip(&sym) {
            *z *= w;
        }
    }
    if psi.is_physical() {
        out = out.to_physical();
    }
    Ok(out)
}

/// Same as [`apply_multiplier`] with a precomputed complex symbol.
pub fn apply_symbol(symbol: &[Complex64], psi: &SpinorField) -> SpinorField {
    let mut out = psi.to_fourier();
    for c in out.components_mut() {
        for (z, w) in c.iter_mut().zip(symbol) {
            *z *= w;
        }
    }
    if psi.is_physical() {
        out = out.to_physical();
    }
    out
}

/// Cells `c` (lattice points `2^k c`) whose cube symbol is nonzero somewhere on the grid.
pub fn cube_indices(grid: &BoxGrid, k: i32) -> Vec<[i64; 3]> {
    let s = 2f64.powi(-k);
    let mut set = BTreeSet::new();
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let axis: Vec<Vec<i64>> = xi
            .iter()
            .map(|&x| {
                let u = x * s;
                let lo = (u - 2.0 / 3.0).floor() as i64;
                (lo..=lo + 2).filter(|&c| lattice_bump(u - c as f64) > 0.0).collect()
            })
            .collect();
        for &a in &axis[0] {
            for &b in &axis[1] {
                for &c in &axis[2] {
                    set.insert([a, b, c]);
                }
            }
        }
    }
    set.into_iter().collect()
}
