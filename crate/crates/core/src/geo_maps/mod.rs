//! Maps on samples of normed spaces built from the scaling `σ_x(t) = t x`:
//! radial retraction, outward amenability map, `R`-closed maps and the
//! stereographic chart of the sphere.

mod retraction;
mod sigma;
mod sphere;

pub use retraction::{
    clamp_images, outward_amenability_map, radial_retraction, radius, ray_amenability_maps, OutwardReport, RetractionReport,
};
pub use sigma::{
    nearest_point, sigma_coords, snap_map, snap_sigma, verify_r_closed, verify_self_similar, RClosedReport, Scaling,
    SelfSimilarReport, AXIOM_TOL, SNAP_TOL,
};
pub use sphere::{
    eta, fibonacci_sphere, mirrored_band_residual, project, stereographic, xi, SphereSample, StereoReport, StereoRow,
    RADIUS_TOL, UNIT_TOL,
};
