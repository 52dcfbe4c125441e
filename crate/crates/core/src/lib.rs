//! Projector–nilpotent functional calculus for complex matrices.
//!
//! * [`numerics`]: dense complex linear algebra and the `cmat v1` format.
//! * [`spectra`]: Riesz projectors, nilpotent parts and full spectral
//!   decompositions `X = Σ (λ P + N)`.
//! * [`funcspace`]: analytic functions of several complex variables with
//!   exact mixed partial derivatives.
//! * [`calculus`]: univariate calculus, tensor lifting of non-commuting
//!   tuples, the multivariate expansion with its three-term split, and two
//!   independent oracles (contour integrals and lifted power series).
//! * [`approx`]: oscillator models, finite sections and the convergence
//!   experiments built on them.

pub mod approx;
pub mod calculus;
pub mod funcspace;
pub mod numerics;
pub mod spectra;

pub use calculus::{CalculusResult, LiftedSystem};
pub use funcspace::{AnalyticFunction, MultiIndex};
pub use numerics::{ComplexMatrix, EigenResult, C64};
pub use spectra::{Contour, Decomposition, SpectralComponent};
