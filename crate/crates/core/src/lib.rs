//! Lipschitz-free p-space norms over finite pointed metric spaces, and
//! certified finite realizations of the classical operators between free
//! spaces and ℓ_p-sums of free spaces over annuli.
//!
//! The crate is organized bottom-up:
//!
//! * [`metric`]: pointed metric spaces, annuli, nets, doubling estimates.
//! * [`free_norm`]: norms of molecules (exact at p = 1 with a dual
//!   certificate, exact by enumeration on small spaces, local-search upper
//!   bounds otherwise) and measured Lipschitz constants.
//! * [`decomposition`]: partitions of unity in log scale and the operators
//!   `P`, `T`, `S`, `E` as explicit matrices.
//! * [`extension`]: Whitney covers of a subset, the doubling extension map,
//!   point removal and sampled amenability ratios.
//! * [`geo_maps`]: radial retraction, outward amenability map, self-similar
//!   axioms and the stereographic projection of the sphere.
//!
//! Pair loops run on rayon when the `parallel` feature (default) is on and
//! sequentially otherwise; results are identical either way.

pub mod decomposition;
pub mod error;
pub mod extension;
pub mod free_norm;
pub mod geo_maps;
pub mod metric;
pub mod par;

pub use error::{Error, Result};
pub use free_norm::{Backend, FreeNormResult, Molecule, UpperConfig};
pub use metric::{IntervalSpec, NormKind, PointedMetricSpace};
