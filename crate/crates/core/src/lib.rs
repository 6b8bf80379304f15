//! Spectral laboratory for the cubic Hartree-type Dirac equation
//! `(−i∂t + α·D + mβ)ψ = λ(V ∗ ⟨ψ, βψ⟩)βψ` on a periodic box.

pub mod algebra;
pub mod error;
pub mod grid;
pub mod potential;
pub mod evolution;
pub mod estimates;
pub mod illposed;
pub mod suites;

pub use algebra::{FrequencyPoint, Mat4, Sign, SymbolMatrix};
pub use error::{Error, Result};
pub use estimates::{ExponentFit, SweepPoint};
pub use evolution::EvolutionConfig;
pub use grid::{BoxGrid, Exponent, Representation, ScalarField, SpinorField, Trajectory};
pub use illposed::{AnnulusSpec, WitnessReport};
pub use potential::{PotentialKind, PotentialSpec, ZeroModePolicy};
pub use suites::Check;
