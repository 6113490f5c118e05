//! Numerical laboratory for heavy-tailed (alpha-stable Levy-driven) gradient
//! dynamics: exact stable samplers, coupled Euler-Maruyama simulation,
//! empirical Wasserstein estimators, and the closed-form stability and
//! generalization bounds they are compared against.

pub mod bounds;
pub mod dynamics;
pub mod losses;
pub mod specfun;
pub mod stable;
pub mod wasserstein;
