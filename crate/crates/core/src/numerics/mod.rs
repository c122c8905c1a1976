//! Precision contract, scalars, linear algebra and the flat-section integrator.

pub mod branch;
pub mod complex;
pub mod constants;
pub mod eigen;
pub mod matrix;
pub mod nilpotent;
pub mod ode;
pub mod precision;

pub use branch::{branch_power, BranchedValue, ZPoint};
pub use complex::{pi, Complex};
pub use constants::{euler_gamma, zeta_value};
pub use eigen::{eigen_decompose, EigenCluster, EigenDecomposition};
pub use matrix::CMatrix;
pub use nilpotent::gamma_of_one_plus_nilpotent;
pub use ode::{integrate_to, ode_integrate, FlatSystem, OdeOptions, OdeOutcome, Ray};
pub use precision::PrecisionContext;
