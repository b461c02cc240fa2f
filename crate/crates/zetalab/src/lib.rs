//! Numerical laboratory for the Riemann zeta function on the critical line.
//!
//! The crate is organized around five layers:
//!
//! * [`zeta`]: pointwise evaluation: the Riemann–Siegel phase `theta`, the
//!   Hardy Z-function, `|zeta(1/2+it)|^2`, and `zeta(sigma+it)` by
//!   Euler–Maclaurin summation.
//! * [`quad`]: deterministic, oscillation-aware adaptive quadrature and
//!   cumulative-integral tables.
//! * [`ladder`]: the monotone rescaling function `phi` defined through the
//!   second-moment integral `J(T) = ∫_0^T |zeta(1/2+it)|^2 dt`, its forward
//!   and reverse iterates, and the geometric/integral growth laws they obey.
//! * [`fourier`]: the Fourier system on `[0, 2l]`, its zeta-weighted
//!   transform under iterated `phi`, and dual-path evaluation of the
//!   transformed inner products.
//! * [`functional`]: finite-height evaluation of the limit functionals the
//!   transformed system satisfies, including the exact Fermat-rational
//!   targets, with trend analysis and `1/ln` extrapolation.

// Guards written as `!(x > 0.0)` intentionally classify NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fourier;
pub mod functional;
pub mod ladder;
pub mod quad;
pub mod zeta;

pub use fourier::{FourierMode, ModeKind, TransformSpec, WeightKind};
pub use functional::{ConvergenceReport, Extrapolation, FermatRational, FermatVerdict};
pub use ladder::{Ladder, LadderConfig, ReverseTower};
pub use quad::{CumulativeTable, Interval, QuadResult};
pub use zeta::PrecisionPolicy;

/// The Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ln(2*pi).
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub(crate) const TWO_PI: f64 = std::f64::consts::TAU;
