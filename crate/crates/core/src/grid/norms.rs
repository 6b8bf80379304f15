use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BoxGrid, SpinorField};
use crate::algebra::norm3;
use crate::error::{Error, Result};

/// Lebesgue exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::OutOfRange(format!("exponent {p} outside [1, inf]")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) => Exponent::finite(p),
            Exponent::Infinity => Ok(self),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => {
                let p: f64 = t.parse().map_err(|_| Error::OutOfRange(format!("bad exponent {s:?}")))?;
                Exponent::finite(p)
            }
        }
    }
}

/// Fields sampled at uniformly spaced times on one grid.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<SpinorField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<SpinorField>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::Precondition(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if let Some(first) = fields.first() {
            if fields.iter().any(|f| !f.grid().same_shape(first.grid())) {
                return Err(Error::Precondition("trajectory fields live on different grids".into()));
            }
        }
        if times.len() >= 2 {
            let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            if !(dt > 0.0) {
                return Err(Error::Precondition("times must increase".into()));
            }
            for w in times.windows(2) {
                if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::Precondition("time step is not uniform".into()));
                }
            }
        }
        Ok(Self { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpinorField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> Option<&BoxGrid> {
        self.fields.first().map(|f| f.grid())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<SpinorField>) {
        (self.times, self.fields)
    }
}

/// Uniform-step trapezoid weights; a single sample gets weight 0.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mut w = vec![dt; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// `a^{q/2}`, exact for the common integer cases.
#[inline]
fn half_power(a: f64, q: f64) -> f64 {
    if q == 2.0 {
        a
    } else if q == 3.0 {
        a * a.sqrt()
    } else if q == 4.0 {
        a * a
    } else if q == 6.0 {
        a * a * a
    } else {
        a.powf(0.5 * q)
    }
}

/// `‖ψ‖_{L^q_x}` of the pointwise Euclidean norm, by Riemann sum.
pub fn spatial_norm(psi: &SpinorField, q: Exponent) -> Result<f64> {
    let q = q.validate()?;
    let phys;
    let f = if psi.is_physical() {
        psi
    } else {
        phys = psi.to_physical();
        &phys
    };
    let c = f.components();
    let squares = (0..f.grid().len()).map(|i| c[0][i].norm_sqr() + c[1][i].norm_sqr() + c[2][i].norm_sqr() + c[3][i].norm_sqr());
    Ok(match q {
        Exponent::Infinity => squares.fold(0.0, f64::max).sqrt(),
        Exponent::Finite(q) => {
            let s: f64 = squares.map(|a| half_power(a, q)).sum();
            (s * f.grid().cell_volume()).powf(1.0 / q)
        }
    })
}

/// `‖ψ‖_{L^p_t L^q_x}` over the trajectory window.
pub fn mixed_norm(traj: &Trajectory, p: Exponent, q: Exponent) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let p = p.validate()?;
    let inner: Vec<f64> = traj.fields().iter().map(|f| spatial_norm(f, q)).collect::<Result<_>>()?;
    Ok(match p {
        Exponent::Infinity => inner.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let w = trapezoid_weights(traj.times());
            let s: f64 = inner.iter().zip(&w).map(|(a, w)| w * a.powf(p)).sum();
            s.powf(1.0 / p)
        }
    })
}

/// Weighted Fourier `ℓ²` norm: `⟨ξ⟩^s` for `m > 0`, `|ξ|^s` for `m = 0`.
pub fn sobolev_norm(psi: &SpinorField, s: f64, m: f64) -> Result<f64> {
    let f = psi.to_fourier();
    let grid = *f.grid();
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let r = norm3(grid.frequency(i));
        let mag: f64 = f.get(i).iter().map(|z| z.norm_sqr()).sum();
        let w = if m > 0.0 {
            m.hypot(r).powf(2.0 * s)
        } else if r == 0.0 {
            if s < 0.0 && mag > 0.0 {
                return Err(Error::ZeroMode(format!(
                    "homogeneous norm with s = {s} needs a vanishing zero mode"
                )));
            }
            if s == 0.0 { 1.0 } else { 0.0 }
        } else {
            r.powf(2.0 * s)
        };
        acc += w * mag;
    }
    Ok(acc.sqrt())
}
