//! Deterministic fixture generators emitting space files.

use std::collections::BTreeMap;

use lipfree::geo_maps::fibonacci_sphere;
use lipfree::metric::{NormKind, SpaceFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

/// Largest sample any generator emits.
pub const POINT_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `Z^dim ∩ [lo, hi]^dim`.
    GridZd { dim: usize, lo: i64, hi: i64, norm: NormKind },
    /// `N^dim ∩ [0, n]^dim`.
    GridNd { dim: usize, n: i64, norm: NormKind },
    /// `n` points of `S^2` on the golden-angle spiral.
    SphereFibonacci { n: usize },
    /// The origin plus `n − 1` uniform points of the ball of radius `radius` in `R^dim`.
    RandomBall { n: usize, dim: usize, radius: f64, seed: u64, norm: NormKind },
    /// The origin plus `rays` equally spaced rays in the plane with points at `radii`.
    AnnulusRays { rays: usize, radii: Vec<f64>, norm: NormKind },
    /// `0, step, …, (n − 1) step` on the real line.
    Line { n: usize, step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub generator: Generator,
    pub alpha: f64,
}

fn take<T: std::str::FromStr>(kv: &mut BTreeMap<String, String>, key: &str, default: Option<T>) -> Result<T> {
    match kv.remove(key) {
        Some(v) => v.parse().map_err(|_| CliError::Usage(format!("cannot parse {key}={v}"))),
        None => default.ok_or_else(|| CliError::Usage(format!("generator needs {key}="))),
    }
}

fn take_norm(kv: &mut BTreeMap<String, String>, default: NormKind) -> Result<NormKind> {
    match kv.remove("norm") {
        Some(v) => Ok(NormKind::parse(&v)?),
        None => Ok(default),
    }
}

impl GenSpec {
    /// Parses `kind,key=val,...`, e.g. `grid-zd,dim=2,lo=0,hi=3` or `annulus-rays,rays=8,radii=1:2:4`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = text.split(',');
        let kind = fields.next().unwrap_or("").trim().to_string();
        let mut kv = BTreeMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got {f:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let alpha = take(&mut kv, "alpha", Some(1.0))?;
        let generator = match kind.as_str() {
            "grid-zd" => Generator::GridZd {
                dim: take(&mut kv, "dim", Some(2))?,
                lo: take(&mut kv, "lo", Some(-3))?,
                hi: take(&mut kv, "hi", Some(3))?,
                norm: take_norm(&mut kv, NormKind::Sup)?,
            },
            "grid-nd" => Generator::GridNd {
                dim: take(&mut kv, "dim", Some(2))?,
                n: take(&mut kv, "n", Some(6))?,
                norm: take_norm(&mut kv, NormKind::Sup)?,
            },
            "sphere-fibonacci" => {
                let d: usize = take(&mut kv, "d", Some(2))?;
                if d != 2 {
                    return Err(CliError::Usage(format!("sphere-fibonacci supports d=2 only, got d={d}")));
                }
                Generator::SphereFibonacci { n: take(&mut kv, "n", Some(100))? }
            }
            "random-ball" => Generator::RandomBall {
                n: take(&mut kv, "n", Some(50))?,
                dim: take(&mut kv, "dim", Some(2))?,
                radius: take(&mut kv, "radius", Some(1.0))?,
                seed: take(&mut kv, "seed", Some(0))?,
                norm: take_norm(&mut kv, NormKind::Euclidean)?,
            },
            "annulus-rays" => {
                let radii = match kv.remove("radii") {
                    Some(v) => v
                        .split(':')
                        .map(|r| r.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad radius {r:?}"))))
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![1.0, 2.0, 4.0],
                };
                Generator::AnnulusRays {
                    rays: take(&mut kv, "rays", Some(8))?,
                    radii,
                    norm: take_norm(&mut kv, NormKind::Euclidean)?,
                }
            }
            "line" => Generator::Line { n: take(&mut kv, "n", Some(10))?, step: take(&mut kv, "step", Some(1.0))? },
            other => return Err(CliError::Usage(format!("unknown generator {other:?}"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(CliError::Usage(format!("unknown generator parameter {k:?} for {kind}")));
        }
        Ok(GenSpec { generator, alpha })
    }

    /// Number of points the generator emits.
    pub fn size(&self) -> Result<usize> {
        let side = |lo: i64, hi: i64| if hi >= lo { (hi - lo + 1) as u128 } else { 0 };
        let n: u128 = match &self.generator {
            Generator::GridZd { dim, lo, hi, .. } => side(*lo, *hi).saturating_pow(*dim as u32),
            Generator::GridNd { dim, n, .. } => side(0, *n).saturating_pow(*dim as u32),
            Generator::SphereFibonacci { n } | Generator::RandomBall { n, .. } | Generator::Line { n, .. } => *n as u128,
            Generator::AnnulusRays { rays, radii, .. } => 1 + (*rays as u128) * radii.len() as u128,
        };
        Ok(n.min(usize::MAX as u128) as usize)
    }

    pub fn generate(&self) -> Result<SpaceFile> {
        let size = self.size()?;
        if size > POINT_CAP {
            return Err(CliError::TooLarge { size, cap: POINT_CAP });
        }
        if size == 0 {
            return Err(CliError::Usage("generator emits no points".into()));
        }
        let (points, norm) = match &self.generator {
            Generator::GridZd { dim, lo, hi, norm } => (lattice(*dim, *lo, *hi), *norm),
            Generator::GridNd { dim, n, norm } => (lattice(*dim, 0, *n), *norm),
            Generator::SphereFibonacci { n } => (fibonacci_sphere(*n).points, NormKind::Euclidean),
            Generator::RandomBall { n, dim, radius, seed, norm } => (random_ball(*n, *dim, *radius, *seed, *norm), *norm),
            Generator::AnnulusRays { rays, radii, norm } => (annulus_rays(*rays, radii)?, *norm),
            Generator::Line { n, step } => ((0..*n).map(|i| vec![i as f64 * step]).collect(), NormKind::Euclidean),
        };
        // base: the origin when present, else the first point
        let base = points.iter().position(|v| v.iter().all(|c| *c == 0.0)).unwrap_or(0);
        Ok(SpaceFile { points: Some(points), matrix: None, norm, alpha: self.alpha, base })
    }
}

fn lattice(dim: usize, lo: i64, hi: i64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |c| {
                    let mut w = v.clone();
                    w.push(c as f64);
                    w
                })
            })
            .collect();
    }
    out
}

fn random_ball(n: usize, dim: usize, radius: f64, seed: u64, norm: NormKind) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![0.0; dim]];
    while pts.len() < n {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
        let r = norm.norm(&v);
        if r <= radius && r > 0.0 {
            pts.push(v);
        }
    }
    pts
}

fn annulus_rays(rays: usize, radii: &[f64]) -> Result<Vec<Vec<f64>>> {
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::Usage("ray radii must be positive".into()));
    }
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 0..rays {
        let th = k as f64 * std::f64::consts::TAU / rays as f64;
        let (s, c) = th.sin_cos();
        for &r in radii {
            pts.push(vec![r * c, r * s]);
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipfree::PointedMetricSpace;

    #[test]
    fn grid_box_counts() {
        let f = GenSpec::parse("grid-zd,dim=2,lo=0,hi=3").unwrap().generate().unwrap();
        assert_eq!(f.points.as_ref().unwrap().len(), 16);
        assert_eq!(f.norm, NormKind::Sup);
        assert_eq!(f.base, 0);
    }

    #[test]
    fn caps_and_unknown_keys() {
        assert!(matches!(
            GenSpec::parse("grid-zd,dim=3,lo=0,hi=20").unwrap().generate(),
            Err(CliError::TooLarge { size: 9261, .. })
        ));
        assert!(GenSpec::parse("grid-zd,wat=1").is_err());
        assert!(GenSpec::parse("torus").is_err());
    }

    #[test]
    fn rays_adjoin_the_origin() {
        let f = GenSpec::parse("annulus-rays,rays=8,radii=1:2:4").unwrap().generate().unwrap();
        assert_eq!(f.points.as_ref().unwrap().len(), 25);
        let s = PointedMetricSpace::from_file(f).unwrap();
        assert_eq!(s.point(s.base()).unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn random_ball_is_seeded() {
        let a = GenSpec::parse("random-ball,n=30,seed=4").unwrap().generate().unwrap();
        let b = GenSpec::parse("random-ball,n=30,seed=4").unwrap().generate().unwrap();
        assert_eq!(a, b);
        assert!(a.points.unwrap().iter().all(|v| NormKind::Euclidean.norm(v) <= 1.0));
    }
}
