//! Beltrami frequency families, polarizations and the γ coefficient map.

mod family;
mod field;
mod gamma;
pub mod io;

pub use family::{build_families, FrequencyFamily, Parity};
pub use field::{beltrami_average, beltrami_field};
pub use gamma::{certify_r0, gamma, sphere_directions, GammaCoefficients, SPHERE_SAMPLES};
