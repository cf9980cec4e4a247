//! Free boundary analysis of parabolic thin obstacle solutions given in
//! original coordinates: contact sets on the boundary slab, the weighted
//! space-time average `H_u(r)` and the vanishing order read off its
//! log-log slope, classification of free boundary points, blow-ups,
//! graph reconstruction of the regular part, and the frequency gap
//! around even integers.

mod blowup;
mod classify;
mod contact;
mod error;
mod gap;
mod graph;
mod hcurve;
mod holder;

pub use blowup::{blowup, on_free_boundary, BlowupEntry, BlowupReport, BlowupSetup};
pub use classify::{
    classify, classify_kappa, sample_points, BlowupParams, Classification, FreeBoundarySample,
};
pub use contact::{extract_contact, Axis, BoundaryTimeField, ContactSet};
pub use error::FbError;
pub use gap::{
    eigen_run_error, eigen_weiss, excluded_up_to, frequency_gap_experiment, gap_inequality_holds,
    log_grid, GapConfig, GapRow, GapSide, GapTable,
};
pub use graph::{
    holder_quotients, reconstruct_graph, theta_estimate, theta_sweep, GraphReport, GraphSample,
    GraphWindow, HolderRow, HOLDER_GROWTH,
};
pub use hcurve::{compute_h, dyadic_radii, Center, HCurve, HQuadrature, Translated};
pub use holder::{holder_maps, HolderMapRow};

pub type Result<T> = std::result::Result<T, FbError>;
