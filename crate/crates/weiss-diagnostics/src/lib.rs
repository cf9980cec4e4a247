//! Energy functionals, projections onto the stationary families, trace
//! bookkeeping and decay-law fits.

mod energy;
mod epi;
mod error;
mod fit;
mod limit;
mod proj2m;
mod proj32;
mod residuals;
mod trace;

pub use energy::{boundary_integral, modified_energy, weiss_energy, weiss_original};
pub use epi::{epiperimetric_check, EpiPair, EpiReport, EpiVariant};
pub use error::DiagError;
pub use fit::{
    envelope_rate, fit_decay, fit_exponential, fit_logarithmic, log_bracket, log_f, log_f_prime,
    log_g, DecayFit, DecayModel,
};
pub use limit::{limit_extraction, LimitProfile, LimitReport, LimitTarget};
pub use proj2m::{lambda_2m, project_e2m, Decomposition2m, E2mBasis};
pub use proj32::{
    normal_derivative_profile, project_e32, weiss_split_32, Decomposition32, ProfileFamily,
    SampledProfiles, Split32,
};
pub use residuals::{evolution_residuals_2m, Differencing, Residuals2m, StepResidual2m};
pub use trace::{Monitor, Snapshot, TraceRow, WeissTrace};

pub type Result<T> = std::result::Result<T, DiagError>;
