//! Invariant suites: residual tables for the Dirac algebra and the three
//! frequency partitions.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    beta, beta_commutation_residual, dirac_matrices, dirac_operator, max_entry, projector, propagator_symbol,
    FrequencyPoint, Mat4, Sign,
};
use crate::error::Result;
use crate::estimates::trial_rng;
use crate::grid::{cap_set, dyadic, lattice_bump, BoxGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        // NaN residuals fail
        Self { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

/// `exp(A)` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm_taylor(a: &Mat4) -> Mat4 {
    let norm: f64 = (0..4).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a * Complex64::from(2f64.powi(-s));
    let mut term = Mat4::identity();
    let mut sum = Mat4::identity();
    for j in 1..=24 {
        term = term * b * Complex64::from(1.0 / j as f64);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

fn random_point(rng: &mut impl Rng) -> FrequencyPoint {
    let r = 2f64.powf(rng.random_range(-3.0..6.0));
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).sqrt();
    let m = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..3.0) };
    FrequencyPoint::new([r * rho * phi.cos(), r * rho * phi.sin(), r * z], m)
}

/// Every algebraic identity of the half-wave calculus, maximized over
/// `samples` random `(ξ, m, t)`.
pub fn algebra_suite(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let d = dirac_matrices();
    let id = Mat4::identity();
    let two = Complex64::from(2.0);
    let mut clifford = 0.0f64;
    for i in 0..3 {
        clifford = clifford.max(max_entry(&(d.alpha[i] * d.beta + d.beta * d.alpha[i])));
        clifford = clifford.max(max_entry(&(d.alpha[i] - d.alpha[i].adjoint())));
        for j in 0..3 {
            let target = if i == j { id * two } else { Mat4::zeros() };
            clifford = clifford.max(max_entry(&(d.alpha[i] * d.alpha[j] + d.alpha[j] * d.alpha[i] - target)));
        }
    }
    clifford = clifford.max(max_entry(&(d.beta * d.beta - id)));

    let mut rng = trial_rng(seed, 0);
    let (mut idem, mut herm, mut compl, mut orth, mut spec, mut comm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut unit, mut group, mut oracle, mut null) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let p = random_point(&mut rng);
        let plus = projector(&p, Sign::Plus)?.entries;
        let minus = projector(&p, Sign::Minus)?.entries;
        for q in [plus, minus] {
            idem = idem.max(max_entry(&(q * q - q)));
            herm = herm.max(max_entry(&(q - q.adjoint())));
        }
        compl = compl.max(max_entry(&(plus + minus - id)));
        orth = orth.max(max_entry(&(plus * minus)).max(max_entry(&(minus * plus))));
        let dop = dirac_operator(p.xi, p.mass);
        spec = spec.max(max_entry(&(dop - (plus - minus) * Complex64::from(p.bracket()))));
        for th in [Sign::Plus, Sign::Minus] {
            comm = comm.max(beta_commutation_residual(&p, th)?);
        }
        let (t, s) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let u = propagator_symbol(t, &p).entries;
        unit = unit.max(max_entry(&(u * u.adjoint() - id)));
        let us = propagator_symbol(s, &p).entries;
        group = group.max(max_entry(&(us * u - propagator_symbol(s + t, &p).entries)));
        let exact = expm_taylor(&(dop * Complex64::new(0.0, -t)));
        oracle = oracle.max(max_entry(&(u - exact)));
        if p.mass == 0.0 {
            null = null.max(max_entry(&(plus * beta() * plus)));
        }
    }
    Ok(vec![
        Check::new("clifford_relations", clifford, 1e-12),
        Check::new("projector_idempotent", idem, 1e-12),
        Check::new("projector_hermitian", herm, 1e-12),
        Check::new("projector_completeness", compl, 1e-12),
        Check::new("projector_orthogonality", orth, 1e-12),
        Check::new("spectral_identity", spec, 1e-12),
        Check::new("beta_commutation", comm, 1e-12),
        Check::new("propagator_unitary", unit, 1e-12),
        Check::new("propagator_group_law", group, 1e-10),
        Check::new("propagator_vs_expm", oracle, 1e-10),
        Check::new("massless_null_zero", null, 1e-14),
    ])
}

/// Largest deviation from 1 of the dyadic, angular and cube partitions over
/// every nonzero in-band frequency of `grid`.
pub fn decomposition_suite(grid: &BoxGrid, cap_levels: &[u32], cube_scales: &[i32]) -> Result<Vec<Check>> {
    let modes: Vec<usize> = (0..grid.len()).filter(|&i| grid.in_band(i) && grid.frequency(i) != [0.0; 3]).collect();
    let rmin = grid.dual_spacing();
    let (klo, khi) = ((rmin.log2().floor() as i32) - 2, (grid.band_limit() * 3f64.sqrt()).log2().ceil() as i32 + 2);
    let mut dy = 0.0f64;
    for &i in &modes {
        let r = crate::algebra::norm3(grid.frequency(i));
        let s: f64 = (klo..=khi).map(|k| dyadic(k, r)).sum();
        dy = dy.max((s - 1.0).abs());
    }
    let mut checks = vec![Check::new("dyadic_partition", dy, 1e-12)];
    for &l in cap_levels {
        let caps = cap_set(l)?;
        let mut dev = 0.0f64;
        for &i in &modes {
            let xi = grid.frequency(i);
            let s: f64 = caps.active(xi).into_iter().map(|nu| caps.kappa(nu, xi)).sum();
            dev = dev.max((s - 1.0).abs());
        }
        checks.push(Check::new(format!("angular_partition_l{l}"), dev, 1e-12));
    }
    for &k in cube_scales {
        let sc = 2f64.powi(-k);
        let mut dev = 0.0f64;
        for &i in &modes {
            let xi = grid.frequency(i);
            let mut s = 1.0;
            for x in xi {
                let u = x * sc;
                let lo = (u - 2.0 / 3.0).floor() as i64;
                s *= (lo..=lo + 2).map(|c| lattice_bump(u - c as f64)).sum::<f64>();
            }
            dev = dev.max((s - 1.0).abs());
        }
        checks.push(Check::new(format!("cube_partition_k{k}"), dev, 1e-12));
    }
    Ok(checks)
}
