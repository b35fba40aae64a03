//! Small numerical toolkit shared by the physics modules: adaptive
//! quadrature, bracketed root finding, an adaptive Runge-Kutta integrator
//! and monotone cubic interpolation.

mod interp;
mod ode;
mod quadrature;
mod roots;

pub use interp::MonotoneCubic;
pub use ode::{integrate_adaptive, OdeOptions, OdeSolution};
pub use quadrature::{integrate, Integral, QuadOptions};
pub use roots::{newton_bisect, RootOptions};
