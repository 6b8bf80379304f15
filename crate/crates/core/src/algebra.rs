//! Exact 4×4 Dirac algebra in the standard (Dirac) representation.
//!
//! Everything here is a pure function of its arguments. The half-wave
//! projectors
//!
//! ```text
//! Π_θ(ξ) = ½ [ I + θ ⟨ξ⟩_m⁻¹ (α·ξ + mβ) ]
//! ```
//!
//! diagonalize the free Dirac symbol, and the free propagator is
//! `U(t, ξ) = e^{-it⟨ξ⟩} Π₊(ξ) + e^{+it⟨ξ⟩} Π₋(ξ) = exp(-it(α·ξ + mβ))`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<Complex64>;
pub type Spinor = Vector4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sign label of a half-wave (`θ ∈ {+, −}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiracMatrices {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    pub pauli: [Matrix2<Complex64>; 3],
}

pub fn pauli_matrices() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// `β = diag(I₂, −I₂)`, `αʲ = [[0, σʲ], [σʲ, 0]]`.
pub fn dirac_matrices() -> DiracMatrices {
    let pauli = pauli_matrices();
    let alpha = pauli.map(|s| {
        let mut a = Mat4::zeros();
        a.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        a.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
        a
    });
    let beta = Mat4::from_diagonal(&Spinor::new(ONE, ONE, -ONE, -ONE));
    DiracMatrices { alpha, beta, pauli }
}

pub fn beta() -> Mat4 {
    Mat4::from_diagonal(&Spinor::new(ONE, ONE, -ONE, -ONE))
}

/// A frequency vector together with the mass that fixes its bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub xi: [f64; 3],
    pub mass: f64,
}

impl FrequencyPoint {
    pub fn new(xi: [f64; 3], mass: f64) -> Self {
        debug_assert!(mass >= 0.0, "mass must be nonnegative");
        Self { xi, mass }
    }

    pub fn norm(&self) -> f64 {
        norm3(self.xi)
    }

    /// `⟨ξ⟩_m`: `(m² + |ξ|²)^{1/2}` for `m > 0`, `|ξ|` for `m = 0`.
    pub fn bracket(&self) -> f64 {
        bracket(self)
    }

    fn checked_bracket(&self) -> Result<f64> {
        let b = self.bracket();
        if b > 0.0 {
            Ok(b)
        } else {
            Err(Error::DegenerateFrequency { xi: self.xi })
        }
    }
}

pub fn bracket(p: &FrequencyPoint) -> f64 {
    if p.mass > 0.0 {
        p.mass.hypot(p.norm())
    } else {
        p.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolTag {
    Projector(Sign),
    Propagator(f64),
    Dirac,
    Custom,
}

#[derive(Clone, Debug)]
pub struct SymbolMatrix {
    pub entries: Mat4,
    pub at: FrequencyPoint,
    pub tag: SymbolTag,
}

/// `α·ξ + mβ` without going through the matrix products.
pub fn dirac_operator(xi: [f64; 3], m: f64) -> Mat4 {
    let [x, y, z] = xi;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // σ·ξ = [[z, x - iy], [x + iy, -z]]
    Mat4::new(
        c(m, 0.0), ZERO, c(z, 0.0), c(x, -y),
        ZERO, c(m, 0.0), c(x, y), c(-z, 0.0),
        c(z, 0.0), c(x, -y), c(-m, 0.0), ZERO,
        c(x, y), c(-z, 0.0), ZERO, c(-m, 0.0),
    )
}

/// `(α·ξ + mβ) v` for a single spinor.
#[inline]
pub fn apply_dirac(xi: [f64; 3], m: f64, v: [Complex64; 4]) -> [Complex64; 4] {
    let [x, y, z] = xi;
    let minus = Complex64::new(x, -y);
    let plus = Complex64::new(x, y);
    // upper = m v_u + (σ·ξ) v_l ; lower = (σ·ξ) v_u - m v_l
    [
        v[0] * m + v[2] * z + v[3] * minus,
        v[1] * m + v[2] * plus - v[3] * z,
        v[0] * z + v[1] * minus - v[2] * m,
        v[0] * plus - v[1] * z - v[3] * m,
    ]
}

pub fn dirac_symbol(p: &FrequencyPoint) -> SymbolMatrix {
    SymbolMatrix { entries: dirac_operator(p.xi, p.mass), at: *p, tag: SymbolTag::Dirac }
}

pub fn projector(p: &FrequencyPoint, theta: Sign) -> Result<SymbolMatrix> {
    let b = p.checked_bracket()?;
    let d = dirac_operator(p.xi, p.mass);
    let entries = (Mat4::identity() + d * Complex64::from(theta.value() / b)) * Complex64::from(0.5);
    Ok(SymbolMatrix { entries, at: *p, tag: SymbolTag::Projector(theta) })
}

/// `U_m(t, ξ) = cos(t⟨ξ⟩) I − i sin(t⟨ξ⟩) ⟨ξ⟩⁻¹ (α·ξ + mβ)`.
///
/// At `m = 0, ξ = 0` the continuous limit (the identity) is returned.
pub fn propagator_symbol(t: f64, p: &FrequencyPoint) -> SymbolMatrix {
    let b = p.bracket();
    let entries = if b > 0.0 {
        let (s, c) = (t * b).sin_cos();
        Mat4::identity() * Complex64::from(c) - dirac_operator(p.xi, p.mass) * (I * (s / b))
    } else {
        Mat4::identity()
    };
    SymbolMatrix { entries, at: *p, tag: SymbolTag::Propagator(t) }
}

/// Alternative propagator conventions, kept only to quantify how far they
/// sit from the exponential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorConvention {
    /// `e^{-it⟨ξ⟩}Π₊ − e^{it⟨ξ⟩}Π₋`
    MinusSplit,
    /// `cos(t⟨ξ⟩) I − (α·ξ + iβ) ⟨ξ⟩⁻¹ sin(t⟨ξ⟩)`
    CosSinDisplay,
}

pub fn propagator_variant(t: f64, p: &FrequencyPoint, convention: PropagatorConvention) -> Result<Mat4> {
    let b = p.checked_bracket()?;
    let (s, c) = (t * b).sin_cos();
    Ok(match convention {
        PropagatorConvention::MinusSplit => {
            let plus = projector(p, Sign::Plus)?.entries;
            let minus = projector(p, Sign::Minus)?.entries;
            plus * Complex64::from_polar(1.0, -t * b) - minus * Complex64::from_polar(1.0, t * b)
        }
        PropagatorConvention::CosSinDisplay => {
            let m = dirac_operator(p.xi, 0.0) + beta() * I;
            Mat4::identity() * Complex64::from(c) - m * Complex64::from(s / b)
        }
    })
}

/// Operator-norm distance between a variant convention and the exponential.
pub fn convention_gap(t: f64, p: &FrequencyPoint, convention: PropagatorConvention) -> Result<f64> {
    let v = propagator_variant(t, p, convention)?;
    Ok(op_norm(&(v - propagator_symbol(t, p).entries)))
}

/// `‖βΠ_θ − (Π_{−θ} + θ m ⟨ξ⟩⁻¹ β) β‖_op`, identically zero in exact arithmetic.
pub fn beta_commutation_residual(p: &FrequencyPoint, theta: Sign) -> Result<f64> {
    let b = p.checked_bracket()?;
    let beta = beta();
    let lhs = beta * projector(p, theta)?.entries;
    let rhs = (projector(p, theta.flip())?.entries + beta * Complex64::from(theta.value() * p.mass / b)) * beta;
    Ok(op_norm(&(lhs - rhs)))
}

/// Largest singular value.
pub fn op_norm(a: &Mat4) -> f64 {
    a.singular_values().max()
}

/// Max-entry norm, used for the exact-zero identities.
pub fn max_entry(a: &Mat4) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Input of [`null_pair_norm`]: two dyadic shells, two unit directions and
/// the angular scale `l` the pair is supposed to be separated at.
#[derive(Clone, Copy, Debug)]
pub struct NullPair {
    pub k1: i32,
    pub k2: i32,
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub theta1: Sign,
    pub theta2: Sign,
    pub mass: f64,
    pub l: i32,
}

/// `‖Π_{θ₁}(2^{k₁}d₁) β Π_{θ₂}(2^{k₂}d₂)‖_op`, which equals the supremum of
/// `|⟨Π_{θ₁}v, βΠ_{θ₂}w⟩|` over unit spinors because projectors are Hermitian.
pub fn null_pair_norm(pair: &NullPair) -> Result<f64> {
    let NullPair { k1, k2, d1, d2, theta1, theta2, mass, l } = *pair;
    for d in [d1, d2] {
        if (norm3(d) - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("direction {d:?} is not a unit vector")));
        }
    }
    if mass > 0.0 {
        if k1 < 0 || k2 < 0 || l < 1 || l > k1.min(k2) + 10 {
            return Err(Error::Precondition(format!(
                "m > 0 needs k1, k2 >= 0 and 1 <= l <= min(k1, k2) + 10 (k1 = {k1}, k2 = {k2}, l = {l})"
            )));
        }
    } else if l > k1.min(k2) + 10 {
        return Err(Error::Precondition(format!("l = {l} exceeds min(k1, k2) + 10")));
    }
    let sep = norm3(sub3(scale3(d1, theta1.value()), scale3(d2, theta2.value())));
    let limit = 2f64.powi(-l);
    if sep > limit * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "|θ1 d1 − θ2 d2| = {sep} exceeds 2^-l = {limit}"
        )));
    }
    let p1 = FrequencyPoint::new(scale3(d1, 2f64.powi(k1)), mass);
    let p2 = FrequencyPoint::new(scale3(d2, 2f64.powi(k2)), mass);
    let a = projector(&p1, theta1)?.entries * beta() * projector(&p2, theta2)?.entries;
    Ok(op_norm(&a))
}

/// `‖Π_{θ₁}(ξ) Π_{θ₂}(η)‖_op`.
pub fn pipi_norm(xi: [f64; 3], eta: [f64; 3], theta1: Sign, theta2: Sign, m: f64) -> Result<f64> {
    let a = projector(&FrequencyPoint::new(xi, m), theta1)?.entries;
    let b = projector(&FrequencyPoint::new(eta, m), theta2)?.entries;
    Ok(op_norm(&(a * b)))
}

/// Unsigned angle between two nonzero vectors.
pub fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    // atan2 form stays accurate for nearly parallel vectors
    let c = cross3(a, b);
    norm3(c).atan2(dot3(a, b))
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    dot3(v, v).sqrt()
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}
