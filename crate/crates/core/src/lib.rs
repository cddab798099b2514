//! Explicit deep ReLU network constructions.
//!
//! The crate builds the networks of a constructive approximation theory for
//! products: a width-4 sawtooth squaring network, scalar and dot products via
//! the polarization identity, real and complex matrix-vector products, and
//! exact affine representations. Networks are plain layer sequences that can
//! be combined, evaluated exactly, differentiated almost everywhere, measured
//! and serialized. The [`verification`] module checks the resulting error and
//! size bounds empirically.

pub mod calculus;
pub mod constructors;
pub mod data;
pub mod error;
pub mod fnn;
pub mod io;
pub mod matrix;
pub mod rng;
pub mod verification;

pub use calculus::{
    compose_selection, concatenate, identity_fnn, match_depth, parallelize_disjoint,
    parallelize_shared, select_inputs, selection_matrix, superpose,
};
pub use constructors::{
    affine_construction, affine_representation, complex_matvec_net, dot_product_net, matvec_net,
    predicted_budget, ProductParams,
    scalar_product_net, square_net, Accuracy, BoundBudget, Construction, ConstructionRecord,
    NetKind,
};
pub use data::{equispaced_real_dataset, pack_complex, pack_matvec, qpsk_rayleigh_dataset, Dataset};
pub use error::{Error, Result};
pub use fnn::{Fnn, Layer, NetworkMetrics};
pub use matrix::Matrix;
pub use rng::CounterRng;
pub use verification::{
    check_budget, square_error_curve, ComplianceReport, ErrorReport, Sampling, Target,
};
