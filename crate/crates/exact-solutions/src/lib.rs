//! Closed-form objects on the half-space: the backward heat kernel, the
//! 3/2-homogeneous profiles, Hermite tensor polynomials, the distinguished
//! stationary polynomial `h_{2m}`, and parabolically homogeneous extension.

mod error;
mod extend;
pub mod goldens;
mod h2m;
mod hermite;
mod kernel;
mod profile;

pub use error::ExactError;
pub use extend::homogeneous_extend;
pub use h2m::{eval_h2m, h2m_unnormalized, H2m};
pub use hermite::{
    assemble_element, eval_hermite, hermite_basis, hermite_normalizer, hermite_poly,
    HermiteElement, MultiIndex,
};
pub use kernel::eval_kernel;
pub use profile::{eval_profile32, normalize_profile, profile_shape, slit_collar_mask, Profile32};

pub type Result<T> = std::result::Result<T, ExactError>;
