//! Lie point symmetries of the two-dimensional viscoelastic equation
//!
//! ```text
//! u_tt - a (u_xxt + u_yyt) - b (u_xx + u_yy) = f
//! ```
//!
//! The crate verifies symmetry generators through the prolonged invariance
//! condition, builds the commutator and adjoint tables of the symmetry
//! algebra, maps algebra elements to representatives of the optimal system
//! of one-dimensional subalgebras, reduces the equation by similarity
//! variables and samples the flows of the generators.

pub mod adjoint;
pub mod expr;
pub mod flows;
pub mod reduction;
pub mod symmetry;
