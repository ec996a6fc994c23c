//! Numerical verification toolkit for growth and uniqueness estimates of
//! exterior solutions of reduced wave equations -Delta u + q(x) u = 0 with
//! discontinuous coefficients.
//!
//! The solution on the exterior domain |x| > R0 is reduced to an operator
//! ODE for v(r) = r^((N-1)/2) u(r omega) over an angular basis, integrated
//! radially with exact restarts at declared interface radii. On top of the
//! trajectories the crate evaluates the energy functionals that drive the
//! growth machinery, audits the hypotheses the estimates need (sign and
//! decay structure of the coefficient split, gauge bounds, weight growth),
//! and checks every derived inequality along the computed data: weighted
//! monotonicity, the two-case tail dichotomy, and the surface-integral
//! bound that rules out eventual decay.

pub mod audit;
pub mod coeff;
pub mod distcalc;
pub mod functionals;
pub mod media;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod run;
pub mod scenario;
pub mod sphere;
