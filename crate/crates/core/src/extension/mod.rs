//! Extension maps `M → F_p(N)` restricting to `δ` on a subset `N`: Whitney covers,
//! single-point removal and sampled amenability ratios.

mod maps;
mod whitney;

pub use maps::{
    amenability_defect, crucial_check, doubling_bound, doubling_extension_map, extension_from_cover, point_removal_map,
    within_bound, AmenabilityReport, CrucialCheck, ExtensionMap, ExtensionReport, RemovalReport,
};
pub use whitney::{
    dyadic_scale, subset_space, whitney_cover, PropertyCheck, WhitneyIndex, WhitneyReport, WhitneySystem, CHECK_TOL,
    DOUBLING_EXACT_THRESHOLD,
};
