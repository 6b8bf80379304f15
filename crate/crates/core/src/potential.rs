//! Convolution potentials with the growth envelope `|∇^k V̂(ξ)| ≲ |ξ|^{−γ−k}`
//! near 0 and `≲ |ξ|^{−2−k}` at infinity, and the Hartree self-interaction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::norm3;
use crate::error::{Error, Result};
use crate::grid::{BoxGrid, Representation, ScalarField, SpinorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `4π / (μ₀² + |ξ|²)`
    Yukawa,
    /// `4π / |ξ|²`
    Coulomb,
    /// `|ξ|^{−γ} ⟨ξ⟩₁^{γ−2}`, `0 < γ < 2`
    Interp,
    /// `V̂ ≡ 1`; only for cross-checking integrators.
    Constant,
}

/// What to do with the singular zero mode of Coulomb-type symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModePolicy {
    /// Drop it (torus surrogate).
    #[default]
    Zero,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub gamma: f64,
    pub mu0: Option<f64>,
    pub zero_mode: ZeroModePolicy,
}

impl PotentialSpec {
    pub fn yukawa(mu0: f64) -> Self {
        Self { kind: PotentialKind::Yukawa, gamma: 0.0, mu0: Some(mu0), zero_mode: ZeroModePolicy::Zero }
    }

    pub fn coulomb() -> Self {
        Self { kind: PotentialKind::Coulomb, gamma: 2.0, mu0: None, zero_mode: ZeroModePolicy::Zero }
    }

    pub fn interp(gamma: f64) -> Self {
        Self { kind: PotentialKind::Interp, gamma, mu0: None, zero_mode: ZeroModePolicy::Zero }
    }

    pub fn constant() -> Self {
        Self { kind: PotentialKind::Constant, gamma: 0.0, mu0: None, zero_mode: ZeroModePolicy::Zero }
    }

    pub fn with_zero_mode(mut self, policy: ZeroModePolicy) -> Self {
        self.zero_mode = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::OutOfRange(m));
        match self.kind {
            PotentialKind::Yukawa => {
                if self.gamma != 0.0 {
                    return bad(format!("yukawa requires gamma = 0, got {}", self.gamma));
                }
                match self.mu0 {
                    Some(mu) if mu > 0.0 && mu.is_finite() => Ok(()),
                    Some(mu) => bad(format!("mu0 = {mu} must be positive")),
                    None => bad("yukawa requires mu0".into()),
                }
            }
            PotentialKind::Coulomb | PotentialKind::Interp | PotentialKind::Constant if self.mu0.is_some() => {
                bad("mu0 only for yukawa".into())
            }
            PotentialKind::Coulomb if self.gamma != 2.0 => {
                bad(format!("coulomb requires gamma = 2, got {}", self.gamma))
            }
            PotentialKind::Interp if !(self.gamma > 0.0 && self.gamma < 2.0) => {
                bad(format!("interp requires 0 < gamma < 2, got {}", self.gamma))
            }
            _ => Ok(()),
        }
    }

    /// `V̂` is unbounded at the origin.
    pub fn singular_at_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Coulomb | PotentialKind::Interp)
    }

    fn radial(&self, r: f64) -> f64 {
        match self.kind {
            PotentialKind::Yukawa => {
                let mu = self.mu0.unwrap_or(1.0);
                4.0 * PI / (mu * mu + r * r)
            }
            PotentialKind::Coulomb => 4.0 * PI / (r * r),
            PotentialKind::Interp => r.powf(-self.gamma) * (1.0 + r * r).powf(0.5 * (self.gamma - 2.0)),
            PotentialKind::Constant => 1.0,
        }
    }
}

/// `V̂(ξ)`. At `ξ = 0` singular kinds follow the zero-mode policy.
pub fn vhat(xi: [f64; 3], spec: &PotentialSpec) -> Result<f64> {
    spec.validate()?;
    let r = norm3(xi);
    if r == 0.0 && spec.singular_at_zero() {
        return match spec.zero_mode {
            ZeroModePolicy::Zero => Ok(0.0),
            ZeroModePolicy::Error => Err(Error::ZeroMode("V-hat is singular at xi = 0".into())),
        };
    }
    Ok(spec.radial(r))
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub order: usize,
    /// `sup |∂_r^k V̂|·|ξ|^{γ+k}` over `|ξ| ≤ 1`.
    pub low_ratio: f64,
    /// `sup |∂_r^k V̂|·|ξ|^{2+k}` over `|ξ| > 1`.
    pub high_ratio: f64,
    pub samples: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// k-th central difference of `f` at `r` with step `h`.
fn central_difference(f: impl Fn(f64) -> f64, r: f64, h: f64, k: usize) -> f64 {
    let half = k as f64 / 2.0;
    let s: f64 = (0..=k)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, j) * f(r + (half - j as f64) * h)
        })
        .sum();
    s / h.powi(k as i32)
}

/// Radial derivatives on `|ξ| = 2^{j/10}`, `j = −100..=100`.
///
/// The relative step grows with the order as `max(1e−4, ε^{1/(k+2)})` so that
/// rounding does not swamp the higher differences.
pub fn growth_check(spec: &PotentialSpec, order: usize) -> Result<GrowthReport> {
    spec.validate()?;
    if order > 4 {
        return Err(Error::OutOfRange(format!("derivative order {order} above 4")));
    }
    let rel = 1e-4f64.max(f64::EPSILON.powf(1.0 / (order as f64 + 2.0)));
    let (mut low, mut high) = (0.0f64, 0.0f64);
    let mut samples = 0;
    for j in -100..=100 {
        let r = 2f64.powf(j as f64 / 10.0);
        let d = if order == 0 {
            spec.radial(r)
        } else {
            central_difference(|x| spec.radial(x), r, rel * r, order)
        }
        .abs();
        if r <= 1.0 {
            low = low.max(d * r.powf(spec.gamma + order as f64));
        } else {
            high = high.max(d * r.powf(2.0 + order as f64));
        }
        samples += 1;
    }
    Ok(GrowthReport { order, low_ratio: low, high_ratio: high, samples })
}

/// `⟨ψ, βψ⟩ = |ψ₁|² + |ψ₂|² − |ψ₃|² − |ψ₄|²` on the carrier-free grid.
pub fn hartree_density(psi: &SpinorField) -> ScalarField {
    let phys;
    let f = if psi.is_physical() {
        psi
    } else {
        phys = psi.to_physical();
        &phys
    };
    let g = f.grid();
    let base = BoxGrid::new(g.n(), g.length()).expect("grid already validated");
    let c = f.components();
    let values = (0..g.len())
        .map(|i| {
            Complex64::from(c[0][i].norm_sqr() + c[1][i].norm_sqr() - c[2][i].norm_sqr() - c[3][i].norm_sqr())
        })
        .collect();
    ScalarField::from_values(base, Representation::Physical, values)
}

/// `V̂` sampled on a grid's modes, zero mode resolved by policy at apply time.
#[derive(Clone, Debug)]
pub struct PotentialSymbol {
    spec: PotentialSpec,
    values: Vec<f64>,
    zero_index: Option<usize>,
}

impl PotentialSymbol {
    pub fn new(grid: &BoxGrid, spec: &PotentialSpec) -> Result<Self> {
        spec.validate()?;
        let base = BoxGrid::new(grid.n(), grid.length())?;
        let mut zero_index = None;
        let values = (0..base.len())
            .map(|i| {
                let xi = base.frequency(i);
                if xi == [0.0; 3] {
                    zero_index = Some(i);
                }
                if xi == [0.0; 3] && spec.singular_at_zero() {
                    0.0
                } else {
                    spec.radial(norm3(xi))
                }
            })
            .collect();
        Ok(Self { spec: *spec, values, zero_index })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `V ∗ ρ` as a Fourier multiplier.
    pub fn convolve(&self, density: &ScalarField) -> Result<ScalarField> {
        let mut f = density.to_fourier();
        if let (Some(z), true, ZeroModePolicy::Error) =
            (self.zero_index, self.spec.singular_at_zero(), self.spec.zero_mode)
        {
            let mean = f.values()[z].norm();
            if mean > 1e-12 * f.l2_norm().max(f64::MIN_POSITIVE) {
                return Err(Error::ZeroMode(format!(
                    "density has mean mode {mean:.3e} but V-hat is singular at 0"
                )));
            }
        }
        for (z, &w) in f.values_mut().iter_mut().zip(&self.values) {
            *z *= w;
        }
        Ok(f.to_physical())
    }
}

/// `V ∗ ⟨ψ, βψ⟩`; the imaginary part is FFT round-off only.
pub fn hartree_potential(psi: &SpinorField, spec: &PotentialSpec) -> Result<ScalarField> {
    PotentialSymbol::new(psi.grid(), spec)?.convolve(&hartree_density(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    const Z: Complex64 = Complex64::new(0.0, 0.0);

    #[test]
    fn plug_in_values() {
        let y = PotentialSpec::yukawa(1.0);
        assert!((vhat([0.0; 3], &y).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((vhat([0.0, 2.0, 0.0], &PotentialSpec::coulomb()).unwrap() - PI).abs() < 1e-15);
        let i = vhat([1.0, 0.0, 0.0], &PotentialSpec::interp(1.0)).unwrap();
        assert!((i - 0.5f64.sqrt()).abs() < 1e-15);
        let strict = PotentialSpec::coulomb().with_zero_mode(ZeroModePolicy::Error);
        assert!(matches!(vhat([0.0; 3], &strict), Err(Error::ZeroMode(_))));
        assert_eq!(vhat([0.0; 3], &PotentialSpec::coulomb()).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        let mut c = PotentialSpec::coulomb();
        c.mu0 = Some(1.0);
        assert!(c.validate().unwrap_err().to_string().contains("mu0 only for yukawa"));
        assert!(PotentialSpec::interp(2.0).validate().is_err());
        assert!(PotentialSpec::yukawa(-1.0).validate().is_err());
        let mut y = PotentialSpec::yukawa(1.0);
        y.gamma = 1.0;
        assert!(y.validate().is_err());
    }

    #[test]
    fn coulomb_growth_is_exact() {
        let r = growth_check(&PotentialSpec::coulomb(), 0).unwrap();
        assert!((r.low_ratio - 4.0 * PI).abs() < 1e-12);
        assert!((r.high_ratio - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn growth_ratios_finite() {
        for spec in [PotentialSpec::yukawa(1.0), PotentialSpec::coulomb(), PotentialSpec::interp(1.0)] {
            for k in 0..=4 {
                let r = growth_check(&spec, k).unwrap();
                assert!(r.low_ratio.is_finite() && r.high_ratio.is_finite(), "{spec:?} {k}");
            }
        }
        // radial derivatives of 4π/r² scale exactly: |∂^k| r^{2+k} = 4π (k+1)!
        let r = growth_check(&PotentialSpec::coulomb(), 2).unwrap();
        assert!((r.high_ratio / (4.0 * PI * 6.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn density_examples() {
        let g = make_grid(8, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let up = hartree_density(&SpinorField::from_fn(g, |_| [one, Z, Z, Z]));
        assert!(up.values().iter().all(|z| *z == one));
        let down = hartree_density(&SpinorField::from_fn(g, |_| [Z, Z, one, Z]));
        assert!(down.values().iter().all(|z| *z == -one));
        let f = |x: [f64; 3]| Complex64::new(x[0].cos(), x[1]);
        let cancel = hartree_density(&SpinorField::from_fn(g, |x| [f(x), Z, f(x), Z]));
        assert!(cancel.values().iter().all(|z| *z == Z));
    }

    #[test]
    fn cosine_is_eigenfunction() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let xi0 = [2.0, 1.0, 0.0];
        // |ψ₁|² = 1 + cos(ξ₀·x)/2 ⇒ density 1 + ½cos(ξ₀·x)
        let psi = SpinorField::from_fn(g, |x| {
            let c = 1.0 + 0.5 * (xi0[0] * x[0] + xi0[1] * x[1]).cos();
            [Complex64::new(c.sqrt(), 0.0), Z, Z, Z]
        });
        let w = hartree_potential(&psi, &PotentialSpec::yukawa(1.0)).unwrap();
        let scale = 4.0 * PI / (1.0 + 5.0);
        for i in 0..g.len() {
            let x = g.position(i);
            let expect = 4.0 * PI + 0.5 * scale * (xi0[0] * x[0] + xi0[1] * x[1]).cos();
            assert!((w.values()[i].re - expect).abs() < 1e-11);
            assert!(w.values()[i].im.abs() < 1e-12);
        }
    }

    #[test]
    fn singular_zero_mode_policy() {
        let g = make_grid(8, 1.0).unwrap();
        let psi = SpinorField::from_fn(g, |_| [Complex64::new(1.0, 0.0), Z, Z, Z]);
        let strict = PotentialSpec::coulomb().with_zero_mode(ZeroModePolicy::Error);
        assert!(matches!(hartree_potential(&psi, &strict), Err(Error::ZeroMode(_))));
        let w = hartree_potential(&psi, &PotentialSpec::coulomb()).unwrap();
        assert!(w.max_abs() < 1e-12);
    }
}
