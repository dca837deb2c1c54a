//! Pure-state algebra and projective measurement.
//!
//! Every register is treated as a qudit of explicit dimension. States are
//! either dense ([`StateVector`]) or sparse ([`SparseState`]); projectors are
//! dense matrices or implicit Gram lists of orthonormal kets.

mod measurement;
mod state;

pub use measurement::{
    collapse, orthonormality_error, outcome_probability, BinaryMeasurement, DenseProjector,
    GramProjector, MeasurementOutcome, Outcome, ProjectorOperator, MAX_DENSE_DIM,
    OPERATOR_TOLERANCE,
};
pub use state::{
    direct_sum, inner_product, sparse_inner_product, tensor_product, Ket, SparseState, StateVector,
    STATE_TOLERANCE,
};
