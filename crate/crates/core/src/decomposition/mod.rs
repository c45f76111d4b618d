//! Operators between `F_p(M)` and ℓ_p-sums of free spaces over annuli.

mod approximants;
mod family;
mod matrix;
mod operators;
mod weights;

pub use approximants::{approximant_weights, commuting_approximants, hat_weight, verify_commuting_bap, BapReport};
pub use family::{log_radii, log_window, AnnulusFamily, FamilyFile, FamilyInterval, LOG_SNAP};
pub use matrix::{Label, LinearMapMatrix};
pub use operators::{
    family_gap, free_basis, measure_t, norm_bound_t, operator_p, operator_s, operator_t, separated_family_bound,
    sum_basis, t_images, verify_etp_identity, verify_pst_identity, verify_separated_inverse, AmenabilityMap,
    DisjointBlock, EtpReport, PstReport, SeparatedReport, IDENTITY_TOL,
};
pub use weights::{build_disjoint_bumps, build_hat_partition, overlap, trapezoid, PartitionReport, WeightSystem, REFINE};
