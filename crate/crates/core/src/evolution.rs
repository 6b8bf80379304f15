//! Free Dirac flow, the Hartree nonlinearity, a Strang split-step solver and
//! a Duhamel/Picard iteration, plus half-wave and scattering diagnostics.
//!
//! Sign conventions: `U(t) = exp(−it(α·D + mβ))`, `N(ψ) = λ (V ∗ ⟨ψ,βψ⟩) βψ`,
//! and `ψ(t) = U(t)ψ₀ + i ∫₀ᵗ U(t−τ) N(ψ(τ)) dτ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{apply_dirac, norm3, Sign};
use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, BoxGrid, Representation, SpinorField, Trajectory};
use crate::potential::{hartree_density, PotentialSpec, PotentialSymbol};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub mass: f64,
    pub coupling: f64,
    pub potential: PotentialSpec,
    pub dt: f64,
    pub horizon: f64,
    pub picard_iters: usize,
    pub sobolev_index: f64,
    /// Store every `save_every`-th step in the trajectory.
    pub save_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            coupling: 1.0,
            potential: PotentialSpec::yukawa(1.0),
            dt: 1.0 / 64.0,
            horizon: 1.0,
            picard_iters: 4,
            sobolev_index: 0.25,
            save_every: 1,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::OutOfRange(m));
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return bad(format!("mass {} must be finite and >= 0", self.mass));
        }
        if !self.coupling.is_finite() {
            return bad("coupling must be finite".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return bad(format!("horizon {} must be >= dt {}", self.horizon, self.dt));
        }
        if self.save_every == 0 {
            return bad("save_every must be >= 1".into());
        }
        if !self.sobolev_index.is_finite() {
            return bad("sobolev index must be finite".into());
        }
        self.potential.validate()
    }

    /// Number of steps, `round(T/dt)`; `T` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        let s = self.horizon / self.dt;
        let r = s.round();
        if (s - r).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::OutOfRange(format!("horizon {} is not a multiple of dt {}", self.horizon, self.dt)));
        }
        Ok(r as usize)
    }
}

/// Modewise `cos(t⟨ξ⟩)` and `sin(t⟨ξ⟩)/⟨ξ⟩` for the free flow over time `t`.
#[derive(Clone, Debug)]
pub struct LinearFlow {
    grid: BoxGrid,
    mass: f64,
    cos: Vec<f64>,
    sinc: Vec<f64>,
}

impl LinearFlow {
    pub fn new(grid: &BoxGrid, t: f64, mass: f64) -> Self {
        let (mut cos, mut sinc) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for i in 0..grid.len() {
            let b = mass.hypot(norm3(grid.frequency(i)));
            if b > 0.0 {
                let (s, c) = (t * b).sin_cos();
                cos.push(c);
                sinc.push(s / b);
            } else {
                cos.push(1.0);
                sinc.push(0.0);
            }
        }
        Self { grid: *grid, mass, cos, sinc }
    }

    /// In place on a Fourier field.
    pub fn apply_fourier(&self, f: &mut SpinorField) {
        debug_assert_eq!(f.representation(), Representation::Fourier);
        debug_assert!(f.grid().same_shape(&self.grid));
        for i in 0..self.grid.len() {
            let v = f.get(i);
            let d = apply_dirac(self.grid.frequency(i), self.mass, v);
            let (c, s) = (self.cos[i], self.sinc[i]);
            f.set(i, [0, 1, 2, 3].map(|a| v[a] * c - I * s * d[a]));
        }
    }

    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let mut f = psi.to_fourier();
        self.apply_fourier(&mut f);
        if psi.is_physical() {
            f.to_physical()
        } else {
            f
        }
    }
}

/// `U_m(t)ψ₀`, mode by mode; keeps the input representation.
pub fn linear_evolve(psi0: &SpinorField, t: f64, m: f64) -> SpinorField {
    LinearFlow::new(psi0.grid(), t, m).apply(psi0)
}

/// `N(ψ) = λ (V ∗ ⟨ψ,βψ⟩) βψ`, physical in and out.
pub fn nonlinearity(psi: &SpinorField, cfg: &EvolutionConfig) -> Result<SpinorField> {
    let sym = PotentialSymbol::new(psi.grid(), &cfg.potential)?;
    nonlinearity_with(psi, cfg.coupling, &sym)
}

fn nonlinearity_with(psi: &SpinorField, coupling: f64, sym: &PotentialSymbol) -> Result<SpinorField> {
    let phys = psi.to_physical();
    let w = sym.convolve(&hartree_density(&phys))?;
    let wv = w.values();
    Ok(phys.map_points(|i, v| {
        let a = coupling * wv[i].re;
        [v[0] * a, v[1] * a, -v[2] * a, -v[3] * a]
    }))
}

/// `ψ ← exp(iλ dt (V∗ρ) β) ψ`; exact since the phase leaves `ρ` unchanged.
fn nonlinear_phase(psi: &mut SpinorField, coupling: f64, dt: f64, sym: &PotentialSymbol) -> Result<()> {
    let w = sym.convolve(&hartree_density(psi))?;
    let comps = psi.components_mut();
    for (i, wi) in w.values().iter().enumerate() {
        let ph = Complex64::from_polar(1.0, coupling * dt * wi.re);
        comps[0][i] *= ph;
        comps[1][i] *= ph;
        let cj = ph.conj();
        comps[2][i] *= cj;
        comps[3][i] *= cj;
    }
    Ok(())
}

/// Reusable Strang stepper for one grid and config.
pub struct Stepper {
    half: LinearFlow,
    sym: PotentialSymbol,
    coupling: f64,
    dt: f64,
}

impl Stepper {
    pub fn new(grid: &BoxGrid, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            half: LinearFlow::new(grid, 0.5 * cfg.dt, cfg.mass),
            sym: PotentialSymbol::new(grid, &cfg.potential)?,
            coupling: cfg.coupling,
            dt: cfg.dt,
        })
    }

    /// One step on a Fourier field, in place.
    pub fn advance(&self, f: &mut SpinorField) -> Result<()> {
        self.half.apply_fourier(f);
        if self.coupling != 0.0 {
            let mut p = f.to_physical();
            nonlinear_phase(&mut p, self.coupling, self.dt, &self.sym)?;
            *f = p.to_fourier();
        }
        self.half.apply_fourier(f);
        Ok(())
    }
}

/// One Strang step: half free flow, nonlinear phase, half free flow.
pub fn step(psi: &SpinorField, cfg: &EvolutionConfig) -> Result<SpinorField> {
    let s = Stepper::new(psi.grid(), cfg)?;
    let mut f = psi.to_fourier();
    s.advance(&mut f)?;
    Ok(if psi.is_physical() { f.to_physical() } else { f })
}

pub fn charge(psi: &SpinorField) -> f64 {
    psi.l2_norm()
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Physical fields at every `save_every`-th step, first and last included.
    pub trajectory: Trajectory,
    pub charge: Vec<f64>,
    pub sobolev: Vec<f64>,
}

impl Solution {
    pub fn max_charge_drift(&self) -> f64 {
        let c0 = self.charge[0];
        let d = self.charge.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max);
        if c0 > 0.0 {
            d / c0
        } else {
            d
        }
    }
}

/// Strang integration over `[0, T]`, aborting on non-finite states.
pub fn solve(psi0: &SpinorField, cfg: &EvolutionConfig) -> Result<Solution> {
    let m = cfg.mass;
    let steps = cfg.steps()?;
    let stepper = Stepper::new(psi0.grid(), cfg)?;
    let mut f = psi0.to_fourier();
    let (mut times, mut fields, mut charges, mut sob) = (vec![], vec![], vec![], vec![]);
    let mut record = |n: usize, f: &SpinorField| -> Result<()> {
        times.push(n as f64 * cfg.dt);
        charges.push(charge(f));
        sob.push(sobolev_norm(f, cfg.sobolev_index, m)?);
        fields.push(f.to_physical());
        Ok(())
    };
    record(0, &f)?;
    for n in 1..=steps {
        stepper.advance(&mut f)?;
        if !f.is_finite() {
            return Err(Error::NonFinite { t: n as f64 * cfg.dt, what: "solver state".into() });
        }
        if n % cfg.save_every == 0 || n == steps {
            record(n, &f)?;
        }
    }
    // the last sample may break uniformity when save_every does not divide steps
    let trajectory = Trajectory::new(times, fields)?;
    Ok(Solution { trajectory, charge: charges, sobolev: sob })
}

#[derive(Clone, Debug)]
pub struct PicardOrbit {
    /// `ψ^{(0)}, …, ψ^{(J)}` on the solver time grid.
    pub iterates: Vec<Trajectory>,
    /// `sup_t ‖ψ^{(j)} − ψ^{(j−1)}‖_{H^s}`, with `ψ^{(−1)} = 0`.
    pub increments: Vec<f64>,
    /// `r_j = increments[j+1] / increments[j]`, `0/0 := 0`.
    pub factors: Vec<f64>,
    pub diverged: bool,
}

/// Picard iteration of the Duhamel map on the grid `t_n = n·dt`.
pub fn picard_orbit(psi0: &SpinorField, cfg: &EvolutionConfig) -> Result<PicardOrbit> {
    cfg.validate()?;
    if cfg.picard_iters < 2 {
        return Err(Error::OutOfRange(format!("picard_iters = {} must be >= 2", cfg.picard_iters)));
    }
    let grid = *psi0.grid();
    let steps = cfg.steps()?;
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 * cfg.dt).collect();
    let forward: Vec<LinearFlow> = times.iter().map(|&t| LinearFlow::new(&grid, t, cfg.mass)).collect();
    let backward: Vec<LinearFlow> = times.iter().map(|&t| LinearFlow::new(&grid, -t, cfg.mass)).collect();
    let sym = PotentialSymbol::new(&grid, &cfg.potential)?;
    let s = cfg.sobolev_index;
    let h0 = psi0.to_fourier();

    let free: Vec<SpinorField> = forward
        .iter()
        .map(|u| {
            let mut f = h0.clone();
            u.apply_fourier(&mut f);
            f
        })
        .collect();

    let sup_gap = |a: &[SpinorField], b: Option<&[SpinorField]>| -> Result<f64> {
        let mut m = 0.0f64;
        for (n, x) in a.iter().enumerate() {
            let d = match b {
                Some(b) => sobolev_norm(&x.sub(&b[n]), s, cfg.mass)?,
                None => sobolev_norm(x, s, cfg.mass)?,
            };
            m = m.max(d);
        }
        Ok(m)
    };

    let mut iterates = vec![free];
    let mut increments = vec![sup_gap(&iterates[0], None)?];
    for _ in 0..cfg.picard_iters {
        let prev = iterates.last().expect("nonempty");
        // g(τ_n) = U(−τ_n) N(ψ(τ_n))
        let mut g = Vec::with_capacity(prev.len());
        for (n, f) in prev.iter().enumerate() {
            let mut nf = nonlinearity_with(f, cfg.coupling, &sym)?.to_fourier();
            backward[n].apply_fourier(&mut nf);
            g.push(nf);
        }
        let mut next = Vec::with_capacity(prev.len());
        let mut acc = SpinorField::zeros(grid, Representation::Fourier);
        for n in 0..prev.len() {
            if n > 0 {
                acc.axpy(Complex64::from(0.5 * cfg.dt), &g[n - 1]);
                acc.axpy(Complex64::from(0.5 * cfg.dt), &g[n]);
            }
            let mut f = h0.clone();
            f.axpy(I, &acc);
            forward[n].apply_fourier(&mut f);
            if !f.is_finite() {
                return Err(Error::NonFinite { t: times[n], what: "picard iterate".into() });
            }
            next.push(f);
        }
        increments.push(sup_gap(&next, Some(prev))?);
        iterates.push(next);
    }
    let factors: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    let diverged = factors.windows(2).any(|w| w[0] > 1.0 && w[1] > 1.0);
    let iterates = iterates
        .into_iter()
        .map(|fs| Trajectory::new(times.clone(), fs.into_iter().map(|f| f.to_physical()).collect()))
        .collect::<Result<_>>()?;
    Ok(PicardOrbit { iterates, increments, factors, diverged })
}

#[derive(Clone, Debug)]
pub struct HalfWavePair {
    pub plus: SpinorField,
    pub minus: SpinorField,
}

impl HalfWavePair {
    pub fn reconstruct(&self) -> SpinorField {
        self.plus.add(&self.minus)
    }

    /// `(e^{−it⟨D⟩}ψ₊, e^{+it⟨D⟩}ψ₋)`.
    pub fn evolve(&self, t: f64, m: f64) -> HalfWavePair {
        HalfWavePair {
            plus: half_wave_flow(&self.plus, t, m, Sign::Plus),
            minus: half_wave_flow(&self.minus, t, m, Sign::Minus),
        }
    }
}

/// `e^{−iθt⟨D⟩_m}ψ`.
pub fn half_wave_flow(psi: &SpinorField, t: f64, m: f64, theta: Sign) -> SpinorField {
    let mut f = psi.to_fourier();
    let grid = *f.grid();
    for c in 0..4 {
        for i in 0..grid.len() {
            let b = m.hypot(norm3(grid.frequency(i)));
            f.components_mut()[c][i] *= Complex64::from_polar(1.0, -theta.value() * t * b);
        }
    }
    if psi.is_physical() {
        f.to_physical()
    } else {
        f
    }
}

/// `ψ± = Π±(D)ψ`. At a degenerate mode (`m = 0`, `ξ = 0`) everything goes to `ψ₊`.
pub fn split_halfwaves(psi: &SpinorField, m: f64) -> HalfWavePair {
    let f = psi.to_fourier();
    let grid = *f.grid();
    let mut plus = SpinorField::zeros(grid, Representation::Fourier);
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let v = f.get(i);
        let b = m.hypot(norm3(xi));
        if b > 0.0 {
            let d = apply_dirac(xi, m, v);
            plus.set(i, [0, 1, 2, 3].map(|a| (v[a] + d[a] / b) * 0.5));
        } else {
            plus.set(i, v);
        }
    }
    let minus = f.sub(&plus);
    if psi.is_physical() {
        HalfWavePair { plus: plus.to_physical(), minus: minus.to_physical() }
    } else {
        HalfWavePair { plus, minus }
    }
}

/// Gaussian packet centred in the box: `e₁ e^{−|ξ|²/(2w²)}` in Fourier space,
/// restricted to one half-wave branch if `branch` is given, scaled so that
/// `‖ψ‖_{H^s} = amplitude`.
pub fn gaussian_packet(
    grid: &BoxGrid,
    m: f64,
    width: f64,
    branch: Option<Sign>,
    amplitude: f64,
    s: f64,
) -> Result<SpinorField> {
    if !(width > 0.0 && width.is_finite() && amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::OutOfRange(format!("packet width {width} / amplitude {amplitude} out of range")));
    }
    let c = 0.5 * grid.length();
    let mut f = SpinorField::zeros(*grid, Representation::Fourier);
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let r2 = xi.iter().map(|x| x * x).sum::<f64>();
        let w = (-0.5 * r2 / (width * width)).exp();
        let phase = Complex64::from_polar(w, -c * (xi[0] + xi[1] + xi[2]));
        let zero = Complex64::new(0.0, 0.0);
        f.set(i, [phase, zero, zero, zero]);
    }
    let mut f = match branch {
        None => f,
        Some(Sign::Plus) => split_halfwaves(&f, m).plus,
        Some(Sign::Minus) => split_halfwaves(&f, m).minus,
    };
    let n = sobolev_norm(&f, s, m)?;
    if n == 0.0 {
        return Err(Error::Precondition("packet has vanishing norm on this grid".into()));
    }
    f.scale((amplitude / n).into());
    Ok(f.to_physical())
}

/// Fraction of the charge within `0.1 L` of the box faces.
pub fn edge_charge_fraction(psi: &SpinorField) -> f64 {
    let p = psi.to_physical();
    let grid = *p.grid();
    let (l, c) = (grid.length(), 0.5 * grid.length());
    let (mut edge, mut total) = (0.0, 0.0);
    for i in 0..grid.len() {
        let x = grid.position(i);
        let w: f64 = p.components().iter().map(|v| v[i].norm_sqr()).sum();
        total += w;
        if x.iter().any(|&xj| (xj - c).abs() > 0.4 * l) {
            edge += w;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterVerdict {
    /// Profile gaps strictly decrease.
    Decaying,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// `(φ₊(t_j), φ₋(t_j))`.
    pub profiles: Vec<HalfWavePair>,
    /// `d_j = (‖Δφ₊‖²_{H^s} + ‖Δφ₋‖²_{H^s})^{1/2}` between consecutive samples.
    pub gaps: Vec<f64>,
    pub verdict: ScatterVerdict,
}

/// Pull each sample back along the free half-wave flows.
pub fn scattering_profile(traj: &Trajectory, cfg: &EvolutionConfig) -> Result<ScatteringReport> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let m = cfg.mass;
    let profiles: Vec<HalfWavePair> = traj
        .times()
        .iter()
        .zip(traj.fields())
        .map(|(&t, f)| split_halfwaves(&f.to_fourier(), m).evolve(-t, m))
        .collect();
    let mut gaps = Vec::with_capacity(profiles.len().saturating_sub(1));
    for w in profiles.windows(2) {
        let dp = sobolev_norm(&w[1].plus.sub(&w[0].plus), cfg.sobolev_index, m)?;
        let dm = sobolev_norm(&w[1].minus.sub(&w[0].minus), cfg.sobolev_index, m)?;
        gaps.push(dp.hypot(dm));
    }
    let verdict = if gaps.len() >= 2 && gaps.windows(2).all(|w| w[1] < w[0]) {
        ScatterVerdict::Decaying
    } else {
        ScatterVerdict::Inconclusive
    };
    Ok(ScatteringReport { times: traj.times().to_vec(), profiles, gaps, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{projector, FrequencyPoint};
    use crate::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_random(grid: BoxGrid, seed: u64, amp: f64) -> SpinorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpinorField::zeros(grid, Representation::Fourier);
        for i in 0..grid.len() {
            let r = norm3(grid.frequency(i));
            let w = (-r * r / 4.0).exp();
            f.set(i, [0; 4].map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * w));
        }
        let n = f.l2_norm();
        f.scale((amp / n).into());
        f.to_physical()
    }

    #[test]
    fn free_flow_basics() {
        let g = make_grid(16, 6.0).unwrap();
        let f = smooth_random(g, 1, 1.0);
        assert!(linear_evolve(&f, 0.0, 1.0).sub(&f).l2_norm() < 1e-14);
        let u1 = linear_evolve(&f, 1.0, 1.0);
        assert!((charge(&u1) - charge(&f)).abs() < 1e-12);
        let half = linear_evolve(&linear_evolve(&f, 0.5, 1.0), 0.5, 1.0);
        assert!(half.sub(&u1).l2_norm() < 1e-10);
    }

    #[test]
    fn plus_eigenmode_phase() {
        let g = make_grid(8, 2.0 * std::f64::consts::PI).unwrap();
        let xi0 = [1.0, -2.0, 0.0];
        let p = projector(&FrequencyPoint::new(xi0, 1.0), Sign::Plus).unwrap().entries;
        let v = p.column(0).into_owned();
        let k = (0..g.len()).find(|&i| g.frequency(i) == xi0).unwrap();
        let mut f = SpinorField::zeros(g, Representation::Fourier);
        f.set(k, [v[0], v[1], v[2], v[3]]);
        let t = 0.7;
        let out = linear_evolve(&f, t, 1.0);
        let ph = Complex64::from_polar(1.0, -t * 6f64.sqrt());
        for a in 0..4 {
            assert!((out.get(k)[a] - v[a] * ph).norm() < 1e-14);
        }
    }

    #[test]
    fn nonlinearity_examples() {
        let g = make_grid(8, 3.0).unwrap();
        let f = smooth_random(g, 2, 1.0);
        let cfg = EvolutionConfig { coupling: 0.0, ..Default::default() };
        assert_eq!(nonlinearity(&f, &cfg).unwrap().max_abs(), 0.0);
        let a = |x: [f64; 3]| Complex64::new(x[0].sin(), x[1].cos());
        let zero = Complex64::new(0.0, 0.0);
        let balanced = SpinorField::from_fn(g, |x| [a(x), zero, a(x), zero]);
        let cfg = EvolutionConfig::default();
        assert!(nonlinearity(&balanced, &cfg).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn free_step_and_unitarity() {
        let g = make_grid(16, 8.0).unwrap();
        let f = smooth_random(g, 3, 0.5);
        let free = EvolutionConfig { coupling: 0.0, dt: 0.1, ..Default::default() };
        assert!(step(&f, &free).unwrap().sub(&linear_evolve(&f, 0.1, 1.0)).l2_norm() < 1e-13);
        let cfg = EvolutionConfig { coupling: 5.0, dt: 0.1, ..Default::default() };
        let s = step(&f, &cfg).unwrap();
        assert!((charge(&s) / charge(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = make_grid(8, 4.0).unwrap();
        let z = SpinorField::zeros(g, Representation::Physical);
        let cfg = EvolutionConfig { horizon: 0.25, dt: 0.125, ..Default::default() };
        let sol = solve(&z, &cfg).unwrap();
        assert_eq!(sol.trajectory.len(), 3);
        assert!(sol.trajectory.fields().iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn halfwave_split() {
        let g = make_grid(8, 4.0).unwrap();
        let f = smooth_random(g, 4, 1.0);
        for m in [0.0, 1.0] {
            let hw = split_halfwaves(&f, m);
            assert!(hw.reconstruct().sub(&f).l2_norm() < 1e-12);
            let again = split_halfwaves(&hw.plus, m);
            assert!(again.minus.l2_norm() < 1e-12);
            let evolved = split_halfwaves(&linear_evolve(&f, 0.9, m), m);
            let direct = hw.evolve(0.9, m);
            assert!(evolved.plus.sub(&direct.plus).l2_norm() < 1e-10);
            assert!(evolved.minus.sub(&direct.minus).l2_norm() < 1e-10);
        }
    }

    #[test]
    fn free_profiles_are_constant() {
        let g = make_grid(8, 4.0).unwrap();
        let f = smooth_random(g, 5, 1.0);
        let cfg = EvolutionConfig { coupling: 0.0, horizon: 0.5, dt: 0.125, ..Default::default() };
        let sol = solve(&f, &cfg).unwrap();
        let rep = scattering_profile(&sol.trajectory, &cfg).unwrap();
        assert!(rep.gaps.iter().all(|&d| d < 1e-10));
    }

    #[test]
    fn picard_free_case() {
        let g = make_grid(8, 4.0).unwrap();
        let f = smooth_random(g, 6, 1.0);
        let cfg = EvolutionConfig { coupling: 0.0, horizon: 0.25, dt: 0.125, picard_iters: 3, ..Default::default() };
        let orbit = picard_orbit(&f, &cfg).unwrap();
        assert!(orbit.factors.iter().all(|&r| r == 0.0));
        assert!(!orbit.diverged);
        assert!(orbit.iterates[1].fields()[2].sub(&orbit.iterates[0].fields()[2]).l2_norm() == 0.0);
    }

    #[test]
    fn config_guards() {
        let bad = EvolutionConfig { dt: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let odd = EvolutionConfig { dt: 0.3, horizon: 1.0, ..Default::default() };
        assert!(odd.steps().is_err());
    }
}
