//! Complex linear-algebra and statistics kernels shared by every other module.

pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod stats;

pub use linalg::{
    hermitian_eigenvalues, min_singular_value, pseudo_inverse, qr_orthonormal, singular_values,
};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use rng::{SimRng, StreamDomain};
pub use sampling::sample_complex_gaussian;
pub use special::regularized_lower_gamma;
pub use stats::ks_distance;
