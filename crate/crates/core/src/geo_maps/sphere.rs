//! Samples of the unit sphere `S^d ⊂ R^(d+1)` and the stereographic chart from the north pole.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖v‖₂ − 1|` for sample points.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance for image radii against `ξ(h)`.
pub const RADIUS_TOL: f64 = 1e-9;

/// Unit vectors in `R^(d+1)`; the last coordinate is the height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphereSample {
    pub points: Vec<Vec<f64>>,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl SphereSample {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim < 2 {
            return Err(Error::BadParameter("sphere points need at least two coordinates".into()));
        }
        for (i, v) in points.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!("point {i} has {} coordinates, expected {dim}", v.len())));
            }
            if (euclid(v) - 1.0).abs() > UNIT_TOL {
                return Err(Error::BadParameter(format!("point {i} is not a unit vector")));
            }
        }
        Ok(SphereSample { points })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pts: Vec<Vec<f64>> =
            serde_json::from_str(text).map_err(|e| Error::BadParameter(format!("line {}: {e}", e.line())))?;
        Self::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn height(&self, i: usize) -> f64 {
        *self.points[i].last().unwrap()
    }

    pub fn max_unit_error(&self) -> f64 {
        self.points.iter().map(|v| (euclid(v) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `n` points on `S^2` along the golden-angle spiral.
pub fn fibonacci_sphere(n: usize) -> SphereSample {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            let v = [r * th.cos(), r * th.sin(), z];
            let len = euclid(&v);
            v.iter().map(|c| c / len).collect()
        })
        .collect();
    SphereSample { points }
}

/// `ξ(h) = √((1 + h) / (1 − h))`, the image radius of the height-`h` level.
pub fn xi(h: f64) -> f64 {
    ((1.0 + h) / (1.0 - h)).sqrt()
}

/// `η(s) = max{1 − s²/2, −1}`, the height at Euclidean distance `s` from the north pole.
pub fn eta(s: f64) -> f64 {
    (1.0 - s * s / 2.0).max(-1.0)
}

/// `x ↦ (x_i / (1 − x_(d+1)))_i`.
pub fn project(v: &[f64]) -> Vec<f64> {
    let h = *v.last().unwrap();
    v[..v.len() - 1].iter().map(|x| x / (1.0 - h)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StereoRow {
    pub h: f64,
    pub radius: f64,
    pub xi: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StereoReport {
    pub image: Vec<Vec<f64>>,
    pub rows: Vec<StereoRow>,
    pub max_radius_error: f64,
    /// Worst `|η(|v − ν|) − h|`.
    pub band_error: f64,
    pub injective: bool,
    /// Image radius strictly increasing in `h` across distinct heights.
    pub monotone: bool,
}

impl StereoReport {
    /// Rows as CSV with header `h,radius,xi,abs_error`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Numerical(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
    }
}

/// Projects the sample from the north pole and checks the level-set radii.
pub fn stereographic(sample: &SphereSample) -> Result<StereoReport> {
    let dim = sample.points.first().map_or(0, Vec::len);
    let mut nu = vec![0.0; dim];
    if let Some(last) = nu.last_mut() {
        *last = 1.0;
    }
    let mut rows = Vec::with_capacity(sample.len());
    let mut image = Vec::with_capacity(sample.len());
    let mut band_error: f64 = 0.0;
    for (i, v) in sample.points.iter().enumerate() {
        let h = sample.height(i);
        if euclid_dist(v, &nu) <= UNIT_TOL {
            return Err(Error::PoleInDomain(i));
        }
        let img = project(v);
        let radius = euclid(&img);
        let x = xi(h);
        rows.push(StereoRow { h, radius, xi: x, abs_error: (radius - x).abs() });
        band_error = band_error.max((eta(euclid_dist(v, &nu)) - h).abs());
        image.push(img);
    }
    let max_radius_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].h.total_cmp(&rows[b].h));
    let monotone = order.windows(2).all(|w| {
        let (a, b) = (&rows[w[0]], &rows[w[1]]);
        a.h == b.h || a.radius < b.radius
    });
    let mut injective = true;
    'outer: for a in 0..image.len() {
        for b in (a + 1)..image.len() {
            if euclid_dist(&image[a], &image[b]) == 0.0 {
                injective = false;
                break 'outer;
            }
        }
    }
    Ok(StereoReport { image, rows, max_radius_error, band_error, injective, monotone })
}

/// `max |d(a, b) − d(Fa, Fb)|` over sample points with `h ≤ 0`, `F` flipping the last coordinate.
pub fn mirrored_band_residual(sample: &SphereSample) -> f64 {
    let lower: Vec<&Vec<f64>> = sample.points.iter().filter(|v| *v.last().unwrap() <= 0.0).collect();
    let flip = |v: &Vec<f64>| {
        let mut w = v.clone();
        let last = w.len() - 1;
        w[last] = -w[last];
        w
    };
    let upper: Vec<Vec<f64>> = lower.iter().map(|v| flip(v)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..lower.len() {
        for b in (a + 1)..lower.len() {
            worst = worst.max((euclid_dist(lower[a], lower[b]) - euclid_dist(&upper[a], &upper[b])).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_radii() {
        assert_eq!(xi(0.0), 1.0);
        assert!((xi(0.5) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(xi(-1.0), 0.0);
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(3.0), -1.0);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        let s = fibonacci_sphere(100);
        assert_eq!(s.len(), 100);
        assert!(s.max_unit_error() <= 1e-12);
        let rep = stereographic(&s).unwrap();
        assert!(rep.max_radius_error <= RADIUS_TOL);
        assert!(rep.injective && rep.monotone);
        assert!(mirrored_band_residual(&s) <= 1e-12);
    }

    #[test]
    fn pole_is_rejected() {
        let s = SphereSample::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(stereographic(&s).unwrap_err(), Error::PoleInDomain(1));
        let south = SphereSample::new(vec![vec![0.0, 0.0, -1.0]]).unwrap();
        assert_eq!(stereographic(&south).unwrap().image[0], vec![0.0, 0.0]);
    }
}
