//! Exact k-replica commutants of matchgate and Clifford-matchgate circuits.

pub mod applications;
pub mod bridge;
pub mod clifford;
pub mod combinat;
pub mod dense;
pub mod error;
pub mod gt;
pub mod majorana;
pub mod pairing;
pub mod verify;
pub mod weights;

pub use applications::{
    matchgate_twirl, vacuum_projector, vacuum_state, vacuum_trace, Ensemble, Estimate, FpMode,
    Record, SreMode, StateVector,
};
pub use bridge::{bridge_operator, casimir, Bridges};
pub use clifford::{cm_dim, cm_twirl, pattern_operator, PatternOccupancy, PatternSpace};
pub use dense::{mc_twirl, to_dense, DenseMatrix};
pub use error::{MgcError, Result};
pub use gt::{gt_basis, GtBasis, GtBasisElement};
pub use majorana::{
    hs_inner, op_adjoint, op_multiply, op_trace, parity_operator, string_product, MajoranaString,
    OperatorExpansion, ReplicatedString, SignedPermutation, C64,
};
pub use pairing::{pairing_operator, PairingConfig};
pub use weights::{
    commutant_dim, enumerate_weights, weyl_dim, CasimirSpec, GtPattern, HighestWeight,
};
