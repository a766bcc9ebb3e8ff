//! Numerical laboratory for the prescribed scalar curvature problem on the
//! LeBrun orbifolds `O(-n)` and on round footballs `S^4/Γ`.

pub mod asymptotics;
pub mod bubble;
pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod pohozaev;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
