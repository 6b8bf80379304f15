//! Supercritical witness: annulus data `ψ̂ = (χ_{W_λ}, 0, 0, 0)`, the kernel
//! entries of the propagator sandwich, the triple-convolution volume, and a
//! Monte Carlo estimate of the third Picard iterate at `t = ε/λ`.
//!
//! `λ` here is a frequency scale (`freq_scale`), unrelated to the coupling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{beta, cross3, dot3, norm3, propagator_symbol, sub3, FrequencyPoint};
use crate::error::{Error, Result};
use crate::estimates::{fit_exponent, trial_rng, ExponentFit};
use crate::potential::{vhat, PotentialSpec};

/// `W_λ = {λ ≤ |x| ≤ 2λ}` at time `t = ελ^{−1}`, evaluated at `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub freq_scale: f64,
    pub eps: f64,
    pub xi: [f64; 3],
}

impl AnnulusSpec {
    /// Target on the `e₃` axis at radius `1.5λ`.
    pub fn new(freq_scale: f64, eps: f64) -> Self {
        Self { freq_scale, eps, xi: [0.0, 0.0, 1.5 * freq_scale] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_scale > 0.0 && self.freq_scale.is_finite()) {
            return Err(Error::OutOfRange(format!("frequency scale {} must be positive", self.freq_scale)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::OutOfRange(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if self.xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::OutOfRange("target frequency must be finite".into()));
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.eps / self.freq_scale
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        let r = norm3(x);
        (self.freq_scale..=2.0 * self.freq_scale).contains(&r)
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * 7.0 * self.freq_scale.powi(3)
    }
}

/// Uniform point of `W_λ`.
pub fn sample_annulus(lam: f64, rng: &mut impl Rng) -> [f64; 3] {
    let u: f64 = rng.random();
    let r = (lam.powi(3) * (1.0 + 7.0 * u)).cbrt();
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
}

struct Trig {
    c: f64,
    /// `sin(t⟨ξ⟩)/⟨ξ⟩`
    s: f64,
}

fn trig(t: f64, xi: [f64; 3], m: f64) -> Trig {
    let b = m.hypot(norm3(xi));
    if b == 0.0 {
        return Trig { c: 1.0, s: t };
    }
    let (s, c) = (t * b).sin_cos();
    Trig { c, s: s / b }
}

/// `[U(τ, ξ) β U(t, η)]₁₁` in closed form.
pub fn kernel_entry(tau: f64, xi: [f64; 3], t: f64, eta: [f64; 3], m: f64) -> Complex64 {
    let (a, b) = (trig(tau, xi, m), trig(t, eta, m));
    let ss = a.s * b.s;
    Complex64::new(
        a.c * b.c - ss * (m * m - dot3(xi, eta)),
        -m * (a.c * b.s + a.s * b.c) + ss * cross3(xi, eta)[2],
    )
}

/// `[U(τ, ξ)ᵀ β U(t, η)]₁₁` in closed form.
pub fn kernel_entry_transposed(tau: f64, xi: [f64; 3], t: f64, eta: [f64; 3], m: f64) -> Complex64 {
    let (a, b) = (trig(tau, xi, m), trig(t, eta, m));
    let ss = a.s * b.s;
    // (ξ₁ + iξ₂)(η₁ + iη₂)
    let pr = xi[0] * eta[0] - xi[1] * eta[1];
    let pi = xi[0] * eta[1] + xi[1] * eta[0];
    Complex64::new(
        a.c * b.c - ss * (m * m - xi[2] * eta[2] - pr),
        -m * (a.c * b.s + a.s * b.c) + ss * pi,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEntryCheck {
    pub direct: Complex64,
    pub transposed: Complex64,
    /// Largest deviation of either closed form from the explicit 4×4 product.
    pub matrix_gap: f64,
}

/// Both kernel entries at a point of the constraint box
/// `|ξ|, |η| ∈ [λ, 2λ]`, `|τ|, |t| ≤ ε/λ`, checked against the matrix product.
pub fn kernel_entry_check(
    annulus: &AnnulusSpec,
    tau: f64,
    xi: [f64; 3],
    t: f64,
    eta: [f64; 3],
    m: f64,
) -> Result<KernelEntryCheck> {
    annulus.validate()?;
    let lam = annulus.freq_scale;
    let slack = 1e-12 * lam;
    for v in [xi, eta] {
        let r = norm3(v);
        if r < lam - slack || r > 2.0 * lam + slack {
            return Err(Error::Precondition(format!("|{v:?}| = {r} outside [{lam}, {}]", 2.0 * lam)));
        }
    }
    let tmax = annulus.time() * (1.0 + 1e-12);
    if tau.abs() > tmax || t.abs() > tmax {
        return Err(Error::Precondition(format!("times ({tau}, {t}) exceed eps/lambda = {}", annulus.time())));
    }
    let direct = kernel_entry(tau, xi, t, eta, m);
    let transposed = kernel_entry_transposed(tau, xi, t, eta, m);
    let u1 = propagator_symbol(tau, &FrequencyPoint::new(xi, m)).entries;
    let u2 = propagator_symbol(t, &FrequencyPoint::new(eta, m)).entries;
    let d = (u1 * beta() * u2)[(0, 0)];
    let tr = (u1.transpose() * beta() * u2)[(0, 0)];
    let matrix_gap = (d - direct).norm().max((tr - transposed).norm());
    Ok(KernelEntryCheck { direct, transposed, matrix_gap })
}

/// Bounds valid on the whole constraint box: both kernel entries satisfy
/// `Re ≥ cos²a − a²` and `|Im| ≤ 2εm/λ + 4ε²`, with `a = ε(4 + m²/λ²)^{1/2}`.
pub fn kernel_bounds(freq_scale: f64, eps: f64, m: f64) -> (f64, f64) {
    let a = eps * (4.0 + (m / freq_scale).powi(2)).sqrt();
    (a.cos().powi(2) - a * a, 2.0 * eps * m / freq_scale + 4.0 * eps * eps)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut w) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - prev) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.std_error / self.value.abs()
        }
    }
}

fn check_samples(annulus: &AnnulusSpec, spec: &PotentialSpec, samples: usize) -> Result<()> {
    annulus.validate()?;
    spec.validate()?;
    if samples < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

/// `V̂` away from the singular origin; the measure-zero point `η = 0` counts as 0.
fn vhat_or_zero(eta: [f64; 3], spec: &PotentialSpec) -> f64 {
    vhat(eta, spec).unwrap_or(0.0)
}

/// `∬ V̂(η) χ_W(η−σ) χ_W(σ) χ_W(ξ−η) dσ dη` with `σ ∈ W`, `η ∈ ξ − W` sampled
/// uniformly. Exactly 0 when `|ξ| > 6λ`.
pub fn triple_convolution(annulus: &AnnulusSpec, spec: &PotentialSpec, samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(annulus, spec, samples)?;
    let lam = annulus.freq_scale;
    if norm3(annulus.xi) > 6.0 * lam {
        return Ok(McEstimate { value: 0.0, std_error: 0.0 });
    }
    let mut rng = trial_rng(seed, 0);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let sigma = sample_annulus(lam, &mut rng);
        let eta = sub3(annulus.xi, sample_annulus(lam, &mut rng));
        let v = if annulus.contains(sub3(eta, sigma)) { vhat_or_zero(eta, spec) } else { 0.0 };
        s1 += v;
        s2 += v * v;
    }
    Ok(scaled_mean(s1, s2, samples, annulus.volume().powi(2)))
}

fn scaled_mean(s1: f64, s2: f64, n: usize, scale: f64) -> McEstimate {
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    McEstimate { value: scale * mean, std_error: scale * (var / nf).sqrt() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirdIterate {
    /// `|[N(t, ξ)]₁|` from the full complex integrand.
    pub modulus: McEstimate,
    /// `|∬ V̂ ∫ Re(K₁K₂) dτ χχχ|`, the quantity bounded below.
    pub real_part: McEstimate,
}

/// Monte Carlo estimate of the first component of the third iterate,
/// `∬ V̂(η) ∫₀ᵗ K₁K₂ dτ χ_W(η−σ)χ_W(σ)χ_W(ξ−η) dσ dη` with
/// `K₁ = [U(τ,η−σ)ᵀβU(−τ,σ)]₁₁` and `K₂ = [U(t−τ,ξ)βU(τ,ξ−η)]₁₁`. The
/// `τ`-integral uses 32-point Gauss–Legendre.
pub fn third_iterate_lower(
    annulus: &AnnulusSpec,
    spec: &PotentialSpec,
    m: f64,
    samples: usize,
    seed: u64,
) -> Result<ThirdIterate> {
    check_samples(annulus, spec, samples)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::OutOfRange(format!("mass {m} must be finite and >= 0")));
    }
    let lam = annulus.freq_scale;
    let t = annulus.time();
    let xi = annulus.xi;
    let (nodes, weights) = gauss_legendre(32);
    let taus: Vec<f64> = nodes.iter().map(|x| 0.5 * t * (x + 1.0)).collect();
    let wt: Vec<f64> = weights.iter().map(|w| 0.5 * t * w).collect();
    let mut rng = trial_rng(seed, 1);
    let (mut re1, mut re2, mut im1, mut im2, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let sigma = sample_annulus(lam, &mut rng);
        let u = sample_annulus(lam, &mut rng);
        let eta = sub3(xi, u);
        let diff = sub3(eta, sigma);
        let (z, r) = if annulus.contains(diff) {
            let v = vhat_or_zero(eta, spec);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut real = 0.0;
            for (&tau, &w) in taus.iter().zip(&wt) {
                let k1 = kernel_entry_transposed(tau, diff, -tau, sigma, m);
                let k2 = kernel_entry(t - tau, xi, tau, u, m);
                let p = k1 * k2;
                acc += p * w;
                real += p.re * w;
            }
            (acc * v, real * v)
        } else {
            (Complex64::new(0.0, 0.0), 0.0)
        };
        re1 += z.re;
        re2 += z.re * z.re;
        im1 += z.im;
        im2 += z.im * z.im;
        r1 += r;
        r2 += r * r;
    }
    let scale = annulus.volume().powi(2);
    let re = scaled_mean(re1, re2, samples, scale);
    let im = scaled_mean(im1, im2, samples, scale);
    let modulus = McEstimate { value: re.value.hypot(im.value), std_error: re.std_error.hypot(im.std_error) };
    let real = scaled_mean(r1, r2, samples, scale);
    Ok(ThirdIterate { modulus, real_part: McEstimate { value: real.value.abs(), std_error: real.std_error } })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub freq_scales: Vec<f64>,
    pub eps: f64,
    pub mass: f64,
    pub potential: PotentialSpec,
    pub samples: usize,
    /// Target frequencies per scale.
    pub targets: usize,
    /// Random draws for the kernel-entry minima.
    pub kernel_samples: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            freq_scales: vec![8.0, 16.0, 32.0],
            eps: 0.05,
            mass: 0.0,
            potential: PotentialSpec::yukawa(1.0),
            samples: 100_000,
            targets: 32,
            kernel_samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSample {
    pub xi_norm: f64,
    pub n_abs: McEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub freq_scale: f64,
    pub time: f64,
    pub targets: Vec<TargetSample>,
    /// Mean of `|N|` over the targets.
    pub n_mean: f64,
    pub convolution: McEstimate,
    pub kernel_min_real: f64,
    pub kernel_max_imag: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub eps: f64,
    pub mass: f64,
    pub potential: PotentialSpec,
    pub points: Vec<WitnessPoint>,
    pub n_fit: Option<ExponentFit>,
    pub convolution_fit: Option<ExponentFit>,
}

/// Runs the witness at each scale; targets are spread over `W_λ` deterministically.
pub fn witness_report(cfg: &WitnessConfig) -> Result<WitnessReport> {
    let mut points = Vec::with_capacity(cfg.freq_scales.len());
    for (j, &lam) in cfg.freq_scales.iter().enumerate() {
        let base = AnnulusSpec::new(lam, cfg.eps);
        base.validate()?;
        let seed = cfg.seed.wrapping_add(1000 * j as u64);
        let mut rng = trial_rng(seed, 7);
        let xis: Vec<[f64; 3]> =
            (0..cfg.targets.max(1)).map(|i| if i == 0 { base.xi } else { sample_annulus(lam, &mut rng) }).collect();
        let targets = xis
            .par_iter()
            .enumerate()
            .map(|(i, &xi)| {
                let a = AnnulusSpec { xi, ..base };
                let est = third_iterate_lower(&a, &cfg.potential, cfg.mass, cfg.samples, seed + 1 + i as u64)?;
                Ok(TargetSample { xi_norm: norm3(xi), n_abs: est.modulus })
            })
            .collect::<Result<Vec<_>>>()?;
        let n_mean = targets.iter().map(|s| s.n_abs.value).sum::<f64>() / targets.len() as f64;
        let convolution = triple_convolution(&base, &cfg.potential, cfg.samples, seed)?;
        let (mut kmin, mut kmax) = (f64::INFINITY, 0.0f64);
        let t = base.time();
        for _ in 0..cfg.kernel_samples {
            let xi = sample_annulus(lam, &mut rng);
            let eta = sample_annulus(lam, &mut rng);
            let tau = t * (2.0 * rng.random::<f64>() - 1.0);
            let s = t * (2.0 * rng.random::<f64>() - 1.0);
            for k in [kernel_entry(tau, xi, s, eta, cfg.mass), kernel_entry_transposed(tau, xi, s, eta, cfg.mass)] {
                kmin = kmin.min(k.re);
                kmax = kmax.max(k.im.abs());
            }
        }
        points.push(WitnessPoint {
            freq_scale: lam,
            time: t,
            targets,
            n_mean,
            convolution,
            kernel_min_real: kmin,
            kernel_max_imag: kmax,
        });
    }
    let fit = |f: &dyn Fn(&WitnessPoint) -> f64| {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.freq_scale.log2(), f(p))).collect();
        fit_exponent(&pts).ok()
    };
    let n_fit = fit(&|p| p.n_mean);
    let convolution_fit = fit(&|p| p.convolution.value);
    Ok(WitnessReport { eps: cfg.eps, mass: cfg.mass, potential: cfg.potential, points, n_fit, convolution_fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The trilinear bound fails as `λ → ∞`.
    Fails,
    Inconclusive,
    NoFailureDetected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub s: f64,
    pub verdict: Verdict,
    /// `e` in the implied constraint `ε ≲ λ^e`.
    pub constraint_exponent: f64,
    pub threshold: f64,
    pub fit: ExponentFit,
}

/// `‖(χ_{W_λ}, 0, 0, 0)‖_{H^s}`, radial Gauss–Legendre.
fn annulus_sobolev(lam: f64, s: f64, m: f64) -> f64 {
    let (x, w) = gauss_legendre(32);
    let integral: f64 = x
        .iter()
        .zip(&w)
        .map(|(x, w)| {
            let r = lam * (1.5 + 0.5 * x);
            let b = if m > 0.0 { m.hypot(r) } else { r };
            0.5 * lam * w * 4.0 * PI * r * r * b.powf(2.0 * s)
        })
        .sum();
    integral.sqrt()
}

/// Compares the `H^s` proxy of `N`, `mean_ξ(|N|⟨ξ⟩^s)·vol(W_λ)^{1/2}`, with
/// `‖ψ‖³_{H^s}`. If their ratio grows like `λ^a`, boundedness forces
/// `ε ≲ λ^{−a}`; the bound fails when `−a ≤ 2s + 0.2 < 0`.
pub fn supercritical_verdict(report: &WitnessReport, s: f64) -> Result<VerdictReport> {
    if report.points.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: report.points.len() });
    }
    let m = report.mass;
    let pts: Vec<(f64, f64)> = report
        .points
        .iter()
        .map(|p| {
            let w = |r: f64| if m > 0.0 { m.hypot(r) } else { r }.powf(s);
            let proxy = p.targets.iter().map(|t| t.n_abs.value * w(t.xi_norm)).sum::<f64>() / p.targets.len() as f64
                * AnnulusSpec::new(p.freq_scale, report.eps).volume().sqrt();
            (p.freq_scale.log2(), proxy / annulus_sobolev(p.freq_scale, s, m).powi(3))
        })
        .collect();
    let fit = fit_exponent(&pts)?;
    let constraint_exponent = -fit.slope;
    let threshold = 2.0 * s + 0.2;
    let verdict = if s >= 0.0 {
        Verdict::Inconclusive
    } else if constraint_exponent <= threshold && threshold < 0.0 {
        Verdict::Fails
    } else {
        Verdict::NoFailureDetected
    };
    Ok(VerdictReport { s, verdict, constraint_exponent, threshold, fit })
}
