//! Finite spectral laboratory for pullback measures on truncated field spaces.
//!
//! Fields live on the flat torus `(R / 2πZ)^2` and are represented by their
//! Fourier coefficients on the square `|k1|, |k2| <= N`. On top of that
//! representation the crate provides
//!
//! * [`spectral`]: differential, multiplication and polynomial operators,
//! * [`gaussian`]: white-noise and smoothed Gaussian samplers,
//! * [`detkit`]: Schatten norms, Fredholm and regularized determinants,
//! * [`findim`]: the finite-dimensional degree / pullback-measure suite,
//! * [`wzlg`]: the Landau–Ginzburg map, its Newton sampler and phase estimator,
//! * [`wick`]: Wick pairings, cycles-and-chain partitions and the
//!   correlation identity with its Gaussian-moment oracle.

pub mod detkit;
pub mod error;
pub mod findim;
pub mod gaussian;
pub mod mc;
pub mod poly;
pub mod spectral;
pub mod wick;
pub mod wzlg;

pub use error::{Error, Result};
pub use mc::McEstimate;
pub use num_complex::Complex64;
pub use spectral::{FreqIndex, RealifiedOperator, SpectralField};
