//! Convex-integration laboratory for the incompressible Euler equations on the
//! periodic 3-torus.
//!
//! The field layer is generic over the scalar type (`f32`/`f64`); everything
//! built on top of it runs in `f64`, exposed through the aliases below.

pub mod beltrami;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod inverse_div;
pub mod iteration;
pub mod linalg;
pub mod parameters;
pub mod pipeline;
pub mod real;
pub mod verify;

pub use error::{Error, Result};
pub use field::GridSpec;
pub use real::Real;

pub type ScalarField = field::ScalarField<f64>;
pub type VectorField = field::VectorField<f64>;
pub type TensorField = field::TensorField<f64>;

pub type ScalarField32 = field::ScalarField<f32>;
pub type VectorField32 = field::VectorField<f32>;
pub type TensorField32 = field::TensorField<f32>;

pub type Complex = num_complex::Complex<f64>;
