//! Numerical laboratory for limit cycles of planar polynomial vector fields.

pub mod bifurc;
pub mod cycles;
pub mod error;
pub mod field;
pub mod flow;
pub mod retmap;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Family, FamilyKind, Polynomial2, VectorField2};
pub use flow::{IntegratorConfig, Trajectory};
pub use retmap::ReturnSample;
