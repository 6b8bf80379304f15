use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::fft3;
use super::BoxGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Physical,
    Fourier,
}

impl Representation {
    pub fn code(self) -> u32 {
        match self {
            Representation::Physical => 0,
            Representation::Fourier => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Representation::Physical),
            1 => Some(Representation::Fourier),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Unitary transform of one component buffer.
///
/// Forward: `ψ̂ = L^{3/2}/n³ · DFT(ψ)`; inverse: `ψ = L^{-3/2} · IDFT(ψ̂)`,
/// so that `Σ|ψ̂|² = (L/n)³ Σ|ψ|²`.
fn transform_buffer(grid: &BoxGrid, data: &mut [Complex64], direction: Direction) {
    let n = grid.n();
    let l32 = grid.length().powf(1.5);
    match direction {
        Direction::Forward => {
            fft3(data, n, true);
            let s = l32 / grid.len() as f64;
            data.iter_mut().for_each(|z| *z *= s);
        }
        Direction::Inverse => {
            fft3(data, n, false);
            let s = 1.0 / l32;
            data.iter_mut().for_each(|z| *z *= s);
        }
    }
}

fn target(direction: Direction) -> Representation {
    match direction {
        Direction::Forward => Representation::Fourier,
        Direction::Inverse => Representation::Physical,
    }
}

macro_rules! impl_common {
    ($ty:ty) => {
        impl $ty {
            pub fn grid(&self) -> &BoxGrid {
                &self.grid
            }

            pub fn representation(&self) -> Representation {
                self.repr
            }

            pub fn is_physical(&self) -> bool {
                self.repr == Representation::Physical
            }

            pub fn to_fourier(&self) -> Self {
                self.transformed(Direction::Forward)
            }

            pub fn to_physical(&self) -> Self {
                self.transformed(Direction::Inverse)
            }

            /// Weight turning coefficient sums into integrals.
            fn measure(&self) -> f64 {
                match self.repr {
                    Representation::Physical => self.grid.cell_volume(),
                    Representation::Fourier => 1.0,
                }
            }
        }
    };
}

/// Four-component complex field, stored component-major.
#[derive(Clone, Debug)]
pub struct SpinorField {
    grid: BoxGrid,
    repr: Representation,
    comps: [Vec<Complex64>; 4],
}

impl_common!(SpinorField);

impl SpinorField {
    pub fn zeros(grid: BoxGrid, repr: Representation) -> Self {
        let v = vec![ZERO; grid.len()];
        Self { grid, repr, comps: [v.clone(), v.clone(), v.clone(), v] }
    }

    pub fn from_components(grid: BoxGrid, repr: Representation, comps: [Vec<Complex64>; 4]) -> Self {
        for c in &comps {
            assert_eq!(c.len(), grid.len(), "component length does not match grid");
        }
        Self { grid, repr, comps }
    }

    /// Physical field from a function of the grid position.
    pub fn from_fn(grid: BoxGrid, f: impl Fn([f64; 3]) -> [Complex64; 4]) -> Self {
        let mut out = Self::zeros(grid, Representation::Physical);
        for i in 0..grid.len() {
            out.set(i, f(grid.position(i)));
        }
        out
    }

    /// Fourier field from a function of the full frequency (carrier included).
    pub fn from_fourier_fn(grid: BoxGrid, f: impl Fn([f64; 3]) -> [Complex64; 4]) -> Self {
        let mut out = Self::zeros(grid, Representation::Fourier);
        for i in 0..grid.len() {
            out.set(i, f(grid.frequency(i)));
        }
        out
    }

    pub fn components(&self) -> &[Vec<Complex64>; 4] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>; 4] {
        &mut self.comps
    }

    pub fn component(&self, a: usize) -> &[Complex64] {
        &self.comps[a]
    }

    #[inline]
    pub fn get(&self, idx: usize) -> [Complex64; 4] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx], self.comps[3][idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [Complex64; 4]) {
        for (c, x) in self.comps.iter_mut().zip(v) {
            c[idx] = x;
        }
    }

    pub fn transformed(&self, direction: Direction) -> Self {
        let mut out = self.clone();
        out.transform_in_place(direction);
        out
    }

    /// No-op when already in the target representation.
    pub fn transform_in_place(&mut self, direction: Direction) {
        if self.repr == target(direction) {
            return;
        }
        for c in self.comps.iter_mut() {
            transform_buffer(&self.grid, c, direction);
        }
        self.repr = target(direction);
    }

    /// `L²` norm, valid in either representation.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        (s * self.measure()).sqrt()
    }

    /// `⟨self, other⟩_{L²}`, antilinear in `self`.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        assert!(self.grid.same_shape(&other.grid) && self.repr == other.repr);
        let mut acc = ZERO;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                acc += x.conj() * y;
            }
        }
        acc * self.measure()
    }

    pub fn scale(&mut self, s: Complex64) {
        self.comps.iter_mut().flat_map(|c| c.iter_mut()).for_each(|z| *z *= s);
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: Complex64, other: &SpinorField) {
        assert!(self.grid.same_shape(&other.grid) && self.repr == other.repr);
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (p, q) in x.iter_mut().zip(y) {
                *p += a * q;
            }
        }
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        out
    }

    /// Exchange upper and lower 2-spinor blocks.
    pub fn swap_blocks(&self) -> Self {
        let mut out = self.clone();
        out.comps.swap(0, 2);
        out.comps.swap(1, 3);
        out
    }

    /// Periodic translation by whole cells (physical representation only).
    pub fn shift(&self, cells: [i64; 3]) -> Self {
        assert!(self.is_physical(), "shift acts on physical fields");
        let mut out = Self::zeros(self.grid, self.repr);
        for i in 0..self.grid.len() {
            let j = self.grid.shifted(i, cells);
            for a in 0..4 {
                out.comps[a][j] = self.comps[a][i];
            }
        }
        out
    }

    /// Pointwise map over all grid sites in the current representation.
    pub fn map_points(&self, f: impl Fn(usize, [Complex64; 4]) -> [Complex64; 4]) -> Self {
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            out.set(i, f(i, self.get(i)));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flat_map(|c| c.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Unitary per-component transform; returns a field in the target representation.
pub fn transform(psi: &SpinorField, direction: Direction) -> SpinorField {
    psi.transformed(direction)
}

/// One complex scalar per grid site.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: BoxGrid,
    repr: Representation,
    values: Vec<Complex64>,
}

impl_common!(ScalarField);

impl ScalarField {
    pub fn zeros(grid: BoxGrid, repr: Representation) -> Self {
        Self { grid, repr, values: vec![ZERO; grid.len()] }
    }

    pub fn from_values(grid: BoxGrid, repr: Representation, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { grid, repr, values }
    }

    pub fn from_real(grid: BoxGrid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { grid, repr: Representation::Physical, values: values.iter().map(|&x| x.into()).collect() }
    }

    pub fn from_fn(grid: BoxGrid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, repr: Representation::Physical, values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn transformed(&self, direction: Direction) -> Self {
        let mut out = self.clone();
        if out.repr != target(direction) {
            transform_buffer(&out.grid, &mut out.values, direction);
            out.repr = target(direction);
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.measure()).sqrt()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn shift(&self, cells: [i64; 3]) -> Self {
        assert!(self.is_physical(), "shift acts on physical fields");
        let mut out = Self::zeros(self.grid, self.repr);
        for i in 0..self.grid.len() {
            out.values[self.grid.shifted(i, cells)] = self.values[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: BoxGrid, seed: u64) -> SpinorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpinorField::zeros(grid, Representation::Physical);
        for c in f.components_mut() {
            for z in c.iter_mut() {
                *z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        f
    }

    #[test]
    fn constant_goes_to_zero_mode() {
        let g = make_grid(8, 3.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let f = SpinorField::from_fn(g, |_| [one, ZERO, ZERO, ZERO]);
        let h = transform(&f, Direction::Forward);
        let zero = (0..g.len()).find(|&i| g.frequency(i) == [0.0; 3]).unwrap();
        for i in 0..g.len() {
            let expect = if i == zero { 3f64.powf(1.5) } else { 0.0 };
            assert!((h.component(0)[i].re - expect).abs() < 1e-12);
            assert!(h.component(0)[i].im.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let g = make_grid(16, 5.0).unwrap();
        let f = random_field(g, 3);
        let h = f.to_fourier();
        assert!((h.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-12);
        let back = h.to_physical();
        assert!(back.sub(&f).l2_norm() / f.l2_norm() < 1e-12);
        // transform to the current representation does nothing
        assert!(h.to_fourier().sub(&h).l2_norm() == 0.0);
    }

    #[test]
    fn plane_wave_lands_on_its_mode() {
        let g = make_grid(8, 2.0 * std::f64::consts::PI).unwrap();
        let f = SpinorField::from_fn(g, |x| {
            [ZERO, Complex64::from_polar(1.0, 2.0 * x[0] - x[2]), ZERO, ZERO]
        });
        let h = f.to_fourier();
        let peak = (0..g.len()).max_by(|&a, &b| h.component(1)[a].norm().total_cmp(&h.component(1)[b].norm())).unwrap();
        assert_eq!(g.frequency(peak), [2.0, 0.0, -1.0]);
    }

    #[test]
    fn swap_and_shift() {
        let g = make_grid(8, 1.0).unwrap();
        let f = random_field(g, 9);
        let s = f.swap_blocks();
        assert_eq!(s.get(5)[0], f.get(5)[2]);
        let t = f.shift([1, 2, 3]).shift([-1, -2, -3]);
        assert_eq!(t.sub(&f).max_abs(), 0.0);
    }
}
