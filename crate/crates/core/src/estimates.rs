//! Monte Carlo checks of the linear and bilinear space-time estimates as
//! scaling laws in the dyadic parameters.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_dirac, norm3, null_pair_norm, scale3, NullPair, Sign};
use crate::error::{Error, Result};
use crate::grid::{
    apply_multiplier, cube_indices, dyadic, mass_dyadic, spatial_norm, symbol_values, trapezoid_weights,
    BoxGrid, Exponent, MultiplierSpec, Representation, SpinorField,
};

/// Time window `[0, 1]` split into this many intervals.
pub const TIME_INTERVALS: usize = 64;

/// Per-trial generator: `seed` selects the key, `trial` the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: i32,
    /// Cube scale of the localized estimate.
    pub k_prime: Option<i32>,
    pub k1: Option<i32>,
    pub k2: Option<i32>,
    pub l: Option<i32>,
    pub theta1: Option<Sign>,
    pub theta2: Option<Sign>,
    pub m: f64,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub trials: usize,
    pub seed: u64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl SweepPoint {
    fn new(k: i32, m: f64, trials: usize, seed: u64, measured: f64, bound: f64) -> Self {
        Self {
            k,
            k_prime: None,
            k1: None,
            k2: None,
            l: None,
            theta1: None,
            theta2: None,
            m,
            p: None,
            q: None,
            trials,
            seed,
            measured,
            bound,
            ratio: measured / bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `(log₂ parameter, log₂ measured)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Least-squares line through `(x, log₂ y)`; `x` is already a log₂ parameter.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: points.len() });
    }
    if let Some(&(_, y)) = points.iter().find(|(_, y)| !(*y > 0.0 && y.is_finite())) {
        return Err(Error::OutOfRange(format!("cannot take log2 of {y}")));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, y.log2())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ExponentFit { points: pts, slope, intercept, residual })
}

fn gaussian_c(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `Π_θ(ξ) v`; the degenerate mode maps `Π₊` to the identity and `Π₋` to 0.
fn project(xi: [f64; 3], m: f64, theta: Sign, v: [Complex64; 4]) -> [Complex64; 4] {
    let b = m.hypot(norm3(xi));
    if b == 0.0 {
        return match theta {
            Sign::Plus => v,
            Sign::Minus => [Complex64::new(0.0, 0.0); 4],
        };
    }
    let d = apply_dirac(xi, m, v);
    let s = theta.value() / b;
    [0, 1, 2, 3].map(|a| (v[a] + d[a] * s) * 0.5)
}

/// Random `P_k^m`-localized data drawn from `rng`; see [`random_annulus_spinor`].
pub fn random_annulus_spinor_with(
    grid: &BoxGrid,
    k: i32,
    theta: Option<Sign>,
    m: f64,
    rng: &mut impl Rng,
) -> Result<SpinorField> {
    if !grid.has_carrier() {
        grid.check_band(k)?;
    }
    let mut f = SpinorField::zeros(*grid, Representation::Fourier);
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let w = mass_dyadic(k, norm3(xi), m);
        if w == 0.0 {
            continue;
        }
        let v = [0; 4].map(|_| gaussian_c(rng) * w);
        f.set(i, theta.map_or(v, |t| project(xi, m, t, v)));
    }
    let n = f.l2_norm();
    if n == 0.0 {
        return Err(Error::Precondition(format!("no lattice frequency in the support of P_{k}")));
    }
    f.scale(Complex64::from(1.0 / n));
    Ok(f.to_physical())
}

/// Gaussian Fourier coefficients on `supp φ_k^m`, weighted by the symbol,
/// optionally projected onto `Π_θ`, unit `L²` norm. Deterministic in `seed`.
pub fn random_annulus_spinor(grid: &BoxGrid, k: i32, theta: Option<Sign>, m: f64, seed: u64) -> Result<SpinorField> {
    random_annulus_spinor_with(grid, k, theta, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn window_times() -> Vec<f64> {
    (0..=TIME_INTERVALS).map(|i| i as f64 / TIME_INTERVALS as f64).collect()
}

/// Samples `e^{−iθt_j⟨D⟩}f` for `t_j = j/TIME_INTERVALS`, stepping each
/// occupied mode by a fixed unimodular factor.
struct HalfWaveSampler {
    support: Vec<usize>,
    step: Vec<Complex64>,
    current: Vec<[Complex64; 4]>,
    buf: SpinorField,
}

impl HalfWaveSampler {
    fn new(f: &SpinorField, m: f64, theta: Sign) -> Self {
        let grid = *f.grid();
        let dt = 1.0 / TIME_INTERVALS as f64;
        let support: Vec<usize> = (0..grid.len()).filter(|&i| f.get(i).iter().any(|z| z.norm_sqr() > 0.0)).collect();
        let step = support
            .iter()
            .map(|&i| Complex64::from_polar(1.0, -theta.value() * dt * m.hypot(norm3(grid.frequency(i)))))
            .collect();
        let current = support.iter().map(|&i| f.get(i)).collect();
        Self { support, step, current, buf: SpinorField::zeros(grid, Representation::Fourier) }
    }

    /// Physical field at sample `j`; samples must be requested in order from 0.
    fn sample(&mut self, j: usize) -> SpinorField {
        if j > 0 {
            for (v, s) in self.current.iter_mut().zip(&self.step) {
                *v = v.map(|z| z * s);
            }
        }
        for (&i, v) in self.support.iter().zip(&self.current) {
            self.buf.set(i, *v);
        }
        self.buf.to_physical()
    }
}

/// `‖e^{−iθt⟨D⟩}f‖_{L^p_t L^q_x([0,1])}`, one slice in memory at a time.
fn window_norm(f: &SpinorField, m: f64, theta: Sign, p: Exponent, q: Exponent) -> Result<f64> {
    let times = window_times();
    let w = trapezoid_weights(&times);
    let mut s = HalfWaveSampler::new(f, m, theta);
    let mut acc = 0.0f64;
    for (j, &wj) in w.iter().enumerate() {
        let v = spatial_norm(&s.sample(j), q)?;
        acc = match p {
            Exponent::Infinity => acc.max(v),
            Exponent::Finite(p) => acc + wj * v.powf(p),
        };
    }
    Ok(match p {
        Exponent::Infinity => acc,
        Exponent::Finite(p) => acc.powf(1.0 / p),
    })
}

fn max_over_trials(trials: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> Result<f64> + Sync) -> Result<f64> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be >= 1".into()));
    }
    let vals: Vec<Result<f64>> = (0..trials as u64).into_par_iter().map(|t| f(&mut trial_rng(seed, t))).collect();
    let mut best = 0.0f64;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

/// `2/p + 3/q = 3/2`, excluding the endpoint `(2, ∞)`.
pub fn strichartz_admissible(p: Exponent, q: Exponent) -> bool {
    let lhs = 2.0 * p.reciprocal() + 3.0 * q.reciprocal();
    (lhs - 1.5).abs() < 1e-12 && !(p == Exponent::Finite(2.0) && q == Exponent::Infinity)
}

/// Largest `‖e^{−it⟨D⟩} P_k^m f‖_{L^p_t L^q_x([0,1])}` over random unit `f`,
/// against the Klein–Gordon loss `⟨2^k⟩_m^{5/4 (1/2 − 1/q)}`.
pub fn strichartz_ratio(
    grid: &BoxGrid,
    k: i32,
    p: Exponent,
    q: Exponent,
    m: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepPoint> {
    if !strichartz_admissible(p, q) {
        return Err(Error::Precondition(format!("(p, q) = ({p}, {q}) is not admissible")));
    }
    if !(m > 0.0) {
        return Err(Error::Precondition("Klein-Gordon Strichartz needs m > 0".into()));
    }
    let spec = MultiplierSpec::mass_dyadic(k, m);
    let measured = max_over_trials(trials, seed, |rng| {
        let f = random_annulus_spinor_with(grid, k, None, m, rng)?;
        let pf = apply_multiplier(&spec, &f)?.to_fourier();
        window_norm(&pf, m, Sign::Plus, p, q)
    })?;
    let bound = m.hypot(2f64.powi(k)).powf(1.25 * (0.5 - q.reciprocal()));
    let mut pt = SweepPoint::new(k, m, trials, seed, measured, bound);
    pt.p = Some(p);
    pt.q = Some(q);
    Ok(pt)
}

/// `(Σ_n ‖Γ_{k',n} P_k^m e^{−it⟨D⟩} f‖²_{L^p L^q})^{1/2}` against `2^{k/p} 2^{k'/p}`.
pub fn localized_strichartz_ratio(
    grid: &BoxGrid,
    k: i32,
    k_prime: i32,
    p: Exponent,
    m: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepPoint> {
    let pf = match p {
        Exponent::Finite(v) if v > 2.0 => v,
        _ => return Err(Error::Precondition(format!("localized estimate needs 2 < p < inf, got {p}"))),
    };
    let q = Exponent::finite(1.0 / (0.5 - 1.0 / pf))?;
    if k_prime > k {
        return Err(Error::Precondition(format!("k' = {k_prime} exceeds k = {k}")));
    }
    let spec = MultiplierSpec::mass_dyadic(k, m);
    let cells = cube_indices(grid, k_prime);
    let measured = max_over_trials(trials, seed, |rng| {
        let f = random_annulus_spinor_with(grid, k, None, m, rng)?;
        let norm = f.l2_norm();
        let pf = apply_multiplier(&spec, &f)?.to_fourier();
        let mut total = 0.0;
        for &cell in &cells {
            let gamma = symbol_values(&MultiplierSpec::cube(k_prime, cell), grid)?;
            let mut piece = pf.clone();
            let mut any = false;
            for c in piece.components_mut() {
                for (z, &w) in c.iter_mut().zip(&gamma) {
                    *z *= w;
                    any |= *z != Complex64::new(0.0, 0.0);
                }
            }
            if !any {
                continue;
            }
            total += window_norm(&piece, m, Sign::Plus, p, q)?.powi(2);
        }
        Ok(total.sqrt() / norm)
    })?;
    let bound = 2f64.powf((k + k_prime) as f64 / pf);
    let mut pt = SweepPoint::new(k, m, trials, seed, measured, bound);
    pt.k_prime = Some(k_prime);
    pt.p = Some(p);
    pt.q = Some(q);
    Ok(pt)
}

/// Which bilinear bound applies to a frequency configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearRegime {
    /// `θ₁θ₂ = −1`: `2^k`.
    OppositeSign,
    /// `θ₁ = θ₂`: `2^{3k/2 − k₁/2}`.
    SameSign,
    /// `m > 0`, `min(k₁, k₂) = 0`: `2^{k/2}`.
    LowMassive,
}

impl BilinearRegime {
    pub fn classify(k1: i32, k2: i32, theta1: Sign, theta2: Sign, m: f64) -> Self {
        if m > 0.0 && k1.min(k2) == 0 {
            BilinearRegime::LowMassive
        } else if theta1 == theta2 {
            BilinearRegime::SameSign
        } else {
            BilinearRegime::OppositeSign
        }
    }

    pub fn bound(self, k: i32, k1: i32) -> f64 {
        match self {
            BilinearRegime::OppositeSign => 2f64.powi(k),
            BilinearRegime::SameSign => 2f64.powf(1.5 * k as f64 - 0.5 * k1 as f64),
            BilinearRegime::LowMassive => 2f64.powf(0.5 * k as f64),
        }
    }
}

/// Packet geometry of the bilinear experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketLayout {
    /// Points per axis.
    pub n: usize,
    /// Envelope width in frequency, in units of `2^k`.
    pub width: f64,
    /// Initial packet offset along the carrier axis for opposite signs.
    pub offset: f64,
}

impl Default for PacketLayout {
    fn default() -> Self {
        Self { n: 64, width: 1.5, offset: 0.5 }
    }
}

impl PacketLayout {
    /// Carrier-frame grid for output scale `k` and carrier `ξ₀`.
    pub fn grid(&self, k: i32, carrier: [f64; 3]) -> Result<BoxGrid> {
        let sigma = self.width * 2f64.powi(k);
        let length = 2.0 + 8.0 / sigma;
        let limit = PI * self.n as f64 / (3.5 * sigma);
        if length > limit {
            return Err(Error::Aliasing { needed: length, limit });
        }
        BoxGrid::with_carrier(self.n, length, carrier)
    }
}

/// Coherent packet `Π_θ φ_{k_i}^m · e^{−|ζ|²/2σ²} e^{−iζ·x₀} v`, unit norm.
fn packet(grid: &BoxGrid, ki: i32, theta: Sign, m: f64, sigma: f64, x0: [f64; 3], v: [Complex64; 4]) -> Result<SpinorField> {
    let mut f = SpinorField::zeros(*grid, Representation::Fourier);
    for i in 0..grid.len() {
        let zeta = grid.envelope_frequency(i);
        let xi = grid.frequency(i);
        let g = (-0.5 * (zeta[0] * zeta[0] + zeta[1] * zeta[1] + zeta[2] * zeta[2]) / (sigma * sigma)).exp();
        let w = g * mass_dyadic(ki, norm3(xi), m);
        if w == 0.0 {
            continue;
        }
        let ph = Complex64::from_polar(w, -(zeta[0] * x0[0] + zeta[1] * x0[1] + zeta[2] * x0[2]));
        f.set(i, project(xi, m, theta, v.map(|z| z * ph)));
    }
    let n = f.l2_norm();
    if n == 0.0 {
        return Err(Error::Precondition(format!("packet at shell {ki} is empty on this grid")));
    }
    f.scale(Complex64::from(1.0 / n));
    Ok(f)
}

/// `(∫₀¹ ‖P_k⟨ψ₁(t), βψ₂(t)⟩‖²_{L²_x} dt)^{1/2}` for free half-waves `ψ_i`.
fn bilinear_norm(f1: &SpinorField, f2: &SpinorField, k: i32, m: f64, theta1: Sign, theta2: Sign) -> Result<f64> {
    let grid = *f1.grid();
    let base = BoxGrid::new(grid.n(), grid.length())?;
    let pk: Vec<f64> = (0..base.len()).map(|i| dyadic(k, norm3(base.frequency(i)))).collect();
    let times = window_times();
    let w = trapezoid_weights(&times);
    let (mut s1, mut s2) = (HalfWaveSampler::new(f1, m, theta1), HalfWaveSampler::new(f2, m, theta2));
    let mut acc = 0.0;
    for (j, &wt) in w.iter().enumerate() {
        let (p1, p2) = (s1.sample(j), s2.sample(j));
        let (a, c) = (p1.components(), p2.components());
        // carriers cancel in ψ̄₁ψ₂, so the product lives on the plain lattice
        let prod: Vec<Complex64> = (0..base.len())
            .map(|i| {
                a[0][i].conj() * c[0][i] + a[1][i].conj() * c[1][i]
                    - a[2][i].conj() * c[2][i]
                    - a[3][i].conj() * c[3][i]
            })
            .collect();
        let h = crate::grid::ScalarField::from_values(base, Representation::Physical, prod).to_fourier();
        let s: f64 = h.values().iter().zip(&pk).map(|(z, w)| z.norm_sqr() * w * w).sum();
        acc += wt * s;
    }
    Ok(acc.sqrt())
}

/// Largest `‖P_k⟨ψ₁, βψ₂⟩‖_{L²_{t,x}([0,1])}` over packet polarizations,
/// against the bound of the pair's regime.
///
/// The `ψ_i` are coherent packets around a shared carrier `2^{(k₁+k₂)/2} e₃`
/// with frequency width `∼ 2^k`; opposite-sign pairs start apart and cross
/// mid-window, same-sign pairs travel together.
#[allow(clippy::too_many_arguments)]
pub fn bilinear_ratio(
    layout: &PacketLayout,
    k: i32,
    k1: i32,
    k2: i32,
    theta1: Sign,
    theta2: Sign,
    m: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepPoint> {
    if k > k1.min(k2) - 3 || (k1 - k2).abs() > 1 {
        return Err(Error::Precondition(format!(
            "need k <= min(k1, k2) - 3 and |k1 - k2| <= 1 (k = {k}, k1 = {k1}, k2 = {k2})"
        )));
    }
    if m > 0.0 && k1.min(k2) < 1 {
        return Err(Error::Precondition("m > 0 requires k1, k2 >= 1".into()));
    }
    let regime = BilinearRegime::classify(k1, k2, theta1, theta2, m);
    let carrier = [0.0, 0.0, 2f64.powf(0.5 * (k1 + k2) as f64)];
    let grid = layout.grid(k, carrier)?;
    let sigma = layout.width * 2f64.powi(k);
    let place = |theta: Sign| match regime {
        BilinearRegime::SameSign => [0.0; 3],
        _ => [0.0, 0.0, -theta.value() * layout.offset],
    };
    let measured = max_over_trials(trials, seed, |rng| {
        let mut unit = || {
            let v = [0; 4].map(|_| gaussian_c(rng));
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.map(|z| z / n)
        };
        let (v1, v2) = (unit(), unit());
        let f1 = packet(&grid, k1, theta1, m, sigma, place(theta1), v1)?;
        let f2 = packet(&grid, k2, theta2, m, sigma, place(theta2), v2)?;
        bilinear_norm(&f1, &f2, k, m, theta1, theta2)
    })?;
    let bound = regime.bound(k, k1.min(k2));
    let mut pt = SweepPoint::new(k, m, trials, seed, measured, bound);
    pt.k1 = Some(k1);
    pt.k2 = Some(k2);
    pt.theta1 = Some(theta1);
    pt.theta2 = Some(theta2);
    Ok(pt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullFormPoint {
    pub l: i32,
    /// `max ‖Π₊(ξ)βΠ₊(η)‖` over directions at most `2^{−l}` apart.
    pub max_norm: f64,
    /// Same quantity at `ξ = η`, zero in exact arithmetic.
    pub aligned: f64,
}

fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [0; 3].map(|_| rng.sample(StandardNormal));
        let n = norm3(v);
        if n > 1e-8 {
            return scale3(v, 1.0 / n);
        }
    }
}

/// `d` rotated by chord `s` towards a random perpendicular direction.
fn rotate_by_chord(d: [f64; 3], s: f64, rng: &mut impl Rng) -> [f64; 3] {
    let r = unit_vector(rng);
    let dot = r[0] * d[0] + r[1] * d[1] + r[2] * d[2];
    let mut e = [r[0] - dot * d[0], r[1] - dot * d[1], r[2] - dot * d[2]];
    let ne = norm3(e);
    e = scale3(e, 1.0 / ne);
    let a = 2.0 * (0.5 * s).asin();
    let (sa, ca) = a.sin_cos();
    let v = [0, 1, 2].map(|j| ca * d[j] + sa * e[j]);
    scale3(v, 1.0 / norm3(v))
}

/// Same-sign angular gain of `Π_θ β Π_θ` across cap scales `l`.
pub fn null_form_sweep(levels: &[i32], theta: Sign, m: f64, k: i32, samples: usize, seed: u64) -> Result<Vec<NullFormPoint>> {
    levels
        .iter()
        .map(|&l| {
            let mut rng = trial_rng(seed, l as u64);
            let h = 2f64.powi(-l);
            let mut max_norm = 0.0f64;
            let mut aligned = 0.0f64;
            for j in 0..samples.max(1) {
                let d1 = unit_vector(&mut rng);
                // the first draw sits on the edge of the admissible set
                let s = if j == 0 { h } else { h * rng.random::<f64>() };
                let d2 = rotate_by_chord(d1, s * (1.0 - 1e-13), &mut rng);
                let pair = NullPair { k1: k, k2: k, d1, d2, theta1: theta, theta2: theta, mass: m, l };
                max_norm = max_norm.max(null_pair_norm(&pair)?);
                aligned = aligned.max(null_pair_norm(&NullPair { d2: d1, ..pair })?);
            }
            Ok(NullFormPoint { l, max_norm, aligned })
        })
        .collect()
}
