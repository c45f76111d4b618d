//! Scalar scaling `σ_x(t) = 0 + t (x − 0)` on embedded samples and the axioms it satisfies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;

/// Snap tolerance for locating `σ_x(t)` in a sample.
pub const SNAP_TOL: f64 = 1e-9;

/// Tolerance of the sampled axiom and `R`-closedness checks.
pub const AXIOM_TOL: f64 = 1e-9;

/// Admissible parameter set `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `A = [0, 1]`.
    Contraction,
    /// `A = {0} ∪ [1, ∞)`.
    Dilation,
}

impl Scaling {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Scaling::Contraction => rng.gen_range(0.0..=1.0),
            Scaling::Dilation => {
                if rng.gen_bool(0.1) {
                    0.0
                } else {
                    1.0 + rng.gen_range(0.0..4.0)
                }
            }
        }
    }
}

/// Coordinates of `σ_x(t)` relative to the base point.
pub fn sigma_coords(space: &PointedMetricSpace, x: usize, t: f64) -> Result<Vec<f64>> {
    let b = space.point(space.base()).ok_or(Error::NotEmbedded)?;
    let v = space.point(x).ok_or(Error::NotEmbedded)?;
    Ok(b.iter().zip(v).map(|(b, v)| b + t * (v - b)).collect())
}

/// Nearest sample point to `coords` and its distance in the ambient norm.
pub fn nearest_point(space: &PointedMetricSpace, coords: &[f64]) -> Result<(usize, f64)> {
    let norm = space.norm_kind();
    let mut best = (0, f64::INFINITY);
    for i in 0..space.len() {
        let d = norm.distance(space.point(i).ok_or(Error::NotEmbedded)?, coords);
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

/// Sample point within [`SNAP_TOL`] (relative to the coordinate scale) of `σ_x(t)`.
pub fn snap_sigma(space: &PointedMetricSpace, x: usize, t: f64) -> Result<usize> {
    let c = sigma_coords(space, x, t)?;
    let (i, gap) = nearest_point(space, &c)?;
    let scale = space.norm_kind().norm(&c).max(1.0);
    if gap <= SNAP_TOL * scale {
        Ok(i)
    } else {
        Err(Error::NotSigmaClosed { point: x, gap })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfSimilarReport {
    pub scaling: Scaling,
    pub samples: usize,
    pub g1_worst: f64,
    /// Worst `d(σ_x(t), σ_x(s)) − |s − t| d(x, 0)`, relative to its scale.
    pub g2_worst: f64,
    /// Worst `d(σ_x(t), σ_y(t)) − t d(x, y)`, relative to its scale.
    pub g3_worst: f64,
    pub pass: bool,
}

/// Samples `(x, y, s, t)` and checks the three axioms of `σ` in the ambient normed space.
pub fn verify_self_similar(space: &PointedMetricSpace, scaling: Scaling, samples: usize, seed: u64) -> Result<SelfSimilarReport> {
    let norm = space.norm_kind();
    let base = space.point(space.base()).ok_or(Error::NotEmbedded)?.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut g1, mut g2, mut g3) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..samples {
        let x = rng.gen_range(0..space.len());
        let y = rng.gen_range(0..space.len());
        let (s, t) = (scaling.sample(&mut rng), scaling.sample(&mut rng));
        let px = space.point(x).unwrap();
        let scale = norm.distance(px, &base).max(1.0);
        g1 = g1
            .max(norm.distance(&sigma_coords(space, x, 0.0)?, &base) / scale)
            .max(norm.distance(&sigma_coords(space, x, 1.0)?, px) / scale);
        let lhs = norm.distance(&sigma_coords(space, x, t)?, &sigma_coords(space, x, s)?);
        let rhs = (s - t).abs() * norm.distance(px, &base);
        g2 = g2.max((lhs - rhs) / rhs.max(1.0));
        let lhs = norm.distance(&sigma_coords(space, x, t)?, &sigma_coords(space, y, t)?);
        let rhs = t * norm.distance(px, space.point(y).unwrap());
        g3 = g3.max((lhs - rhs) / rhs.max(1.0));
    }
    Ok(SelfSimilarReport {
        scaling,
        samples,
        g1_worst: g1,
        g2_worst: g2,
        g3_worst: g3,
        pass: g1 <= AXIOM_TOL && g2 <= AXIOM_TOL && g3 <= AXIOM_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RClosedReport {
    pub radix: f64,
    /// Points whose image stays inside the sample.
    pub mapped: usize,
    pub escaped: usize,
    pub base_fixed: bool,
    /// Worst `|d(f(x), f(y)) − R d(x, y)| / (R d(x, y))`.
    pub worst_relative_error: f64,
    pub witness: Option<(usize, usize)>,
    pub pass: bool,
}

/// Applies `f` to the coordinates of every point and snaps the result into the sample.
pub fn snap_map<F>(space: &PointedMetricSpace, f: F) -> Result<Vec<Option<usize>>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    (0..space.len())
        .map(|x| {
            let img = f(space.point(x).ok_or(Error::NotEmbedded)?);
            let (i, gap) = nearest_point(space, &img)?;
            Ok((gap <= SNAP_TOL * space.norm_kind().norm(&img).max(1.0)).then_some(i))
        })
        .collect()
}

/// Checks `d(f(x), f(y)) = R d(x, y)` on the points whose images are defined.
pub fn verify_r_closed(space: &PointedMetricSpace, image: &[Option<usize>], radix: f64) -> Result<RClosedReport> {
    if image.len() != space.len() {
        return Err(Error::DimensionMismatch(format!("{} images for {} points", image.len(), space.len())));
    }
    let dom: Vec<usize> = (0..space.len()).filter(|&x| image[x].is_some()).collect();
    let base_fixed = image[space.base()] == Some(space.base());
    let a = space.alpha();
    let mut worst: f64 = 0.0;
    let mut witness = None;
    for (k, &x) in dom.iter().enumerate() {
        for &y in &dom[k + 1..] {
            // distances carry the snowflake exponent, so the factor is R^alpha
            let want = radix.powf(a) * space.d(x, y);
            let got = space.d(image[x].unwrap(), image[y].unwrap());
            let err = (got - want).abs() / want;
            if err > worst {
                worst = err;
                witness = Some((x, y));
            }
        }
    }
    Ok(RClosedReport {
        radix,
        mapped: dom.len(),
        escaped: space.len() - dom.len(),
        base_fixed,
        worst_relative_error: worst,
        witness,
        pass: base_fixed && worst <= AXIOM_TOL,
    })
}
