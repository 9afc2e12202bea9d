//! Solvability of the generalized ⋆-Sylvester equation `AXB + CX⋆D = E` and
//! the generalized Sylvester equation `AXB − CXD = E` with rectangular
//! complex coefficients.

pub mod dense;
pub mod equation;
pub mod error;
pub mod families;
pub mod gsylv;
pub mod kcf;
pub mod oracle;
pub mod pencil;
pub mod random;
pub mod report;
pub mod star;
pub mod suite;
pub mod tolerance;

pub use equation::{GSylvInstance, Instance, StarEquationInstance};
pub use error::{Result, SylvError};
