//! Radial retraction onto a ball and the outward map onto the complement of a ball.

use serde::Serialize;

use super::sigma::{nearest_point, sigma_coords, snap_sigma, SNAP_TOL};
use crate::decomposition::{AmenabilityMap, AnnulusFamily, DisjointBlock};
use crate::error::{Error, Result};
use crate::extension::ExtensionMap;
use crate::free_norm::{lipschitz_constant, Backend, LipschitzResult, Molecule};
use crate::metric::{require_p, IntervalSpec, PointedMetricSpace};

/// Radius `‖x − 0‖` in the ambient norm (before snowflaking).
pub fn radius(space: &PointedMetricSpace, x: usize) -> f64 {
    space.underlying(x, space.base())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetractionReport {
    pub s: f64,
    /// `map[x] = r(x)`.
    pub map: Vec<usize>,
    pub lipschitz: LipschitzResult,
    pub bound: f64,
    /// `max(0, measured − 2)`.
    pub slack: f64,
    pub fixes_ball: bool,
    pub idempotent: bool,
}

/// `r(x) = σ_x(min{1, S / d(x, 0)})`, snapped into the sample.
pub fn radial_retraction(space: &PointedMetricSpace, s: f64) -> Result<RetractionReport> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::BadParameter(format!("radius S = {s} must be positive")));
    }
    let map: Vec<usize> = (0..space.len())
        .map(|x| {
            let rho = radius(space, x);
            if rho <= s {
                Ok(x)
            } else {
                snap_sigma(space, x, s / rho)
            }
        })
        .collect::<Result<_>>()?;
    let lipschitz = lipschitz_constant(space, |i, j| Ok(space.d(map[i], map[j])))?;
    let fixes_ball = (0..space.len()).all(|x| radius(space, x) > s || map[x] == x);
    let idempotent = (0..space.len()).all(|x| map[map[x]] == map[x]);
    Ok(RetractionReport {
        s,
        slack: (lipschitz.value - 2.0).max(0.0),
        map,
        lipschitz,
        bound: 2.0,
        fixes_ball,
        idempotent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutwardReport {
    pub s: f64,
    pub p: f64,
    pub alpha: f64,
    pub lipschitz: LipschitzResult,
    pub lipschitz_exact: bool,
    pub bound: f64,
    pub restricts_to_delta: bool,
}

/// Molecule on `target` for a source point: `δ(y)` inside `[s1, s2]`, retracted
/// to radius `s2` above it, `(ρ/s1)^α δ(σ_y(s1/ρ))` below it.
fn scaled_image(source: &PointedMetricSpace, target: &PointedMetricSpace, y: usize, s1: f64, s2: f64) -> Result<Molecule> {
    let rho = radius(source, y);
    if rho == 0.0 {
        return Ok(Molecule::zero(target.len()));
    }
    let (t, weight) = if rho < s1 {
        (s1 / rho, (rho / s1).powf(source.alpha()))
    } else if rho > s2 {
        (s2 / rho, 1.0)
    } else {
        (1.0, 1.0)
    };
    let c = sigma_coords(source, y, t)?;
    let (k, gap) = nearest_point(target, &c)?;
    if gap > SNAP_TOL * source.norm_kind().norm(&c).max(1.0) {
        return Err(Error::NotSigmaClosed { point: y, gap });
    }
    Ok(Molecule::delta(target, k).scaled(weight))
}

/// The outward map of `N` into `F_p(N_[S,∞))`, both with the base adjoined.
pub fn outward_amenability_map(
    space: &PointedMetricSpace,
    subset: &[usize],
    s: f64,
    p: f64,
    backend: &Backend,
) -> Result<(ExtensionMap, OutwardReport)> {
    require_p(p)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::BadParameter(format!("radius S = {s} must be positive")));
    }
    if subset.contains(&space.base()) {
        return Err(Error::BadSubset("the base point must not belong to N".into()));
    }
    let mut src: Vec<usize> = subset.to_vec();
    src.push(space.base());
    src.sort_unstable();
    src.dedup();
    let source = space.subspace(&src, src.binary_search(&space.base()).unwrap())?;
    let tgt: Vec<usize> = src.iter().copied().filter(|&x| x == space.base() || radius(space, x) >= s).collect();
    let target = space.subspace(&tgt, tgt.binary_search(&space.base()).unwrap())?;
    let images: Vec<Molecule> =
        (0..source.len()).map(|y| scaled_image(&source, &target, y, s, f64::INFINITY)).collect::<Result<_>>()?;
    let target_points = tgt.iter().map(|g| src.binary_search(g).unwrap()).collect();
    let map = ExtensionMap { target, target_points, images };
    let lipschitz = map.lipschitz(&source, p, backend)?;
    let report = OutwardReport {
        s,
        p,
        alpha: space.alpha(),
        lipschitz,
        lipschitz_exact: backend.is_exact_for(map.target.len(), p),
        bound: 3f64.powf(1.0 / p),
        restricts_to_delta: map.restricts_to_delta(),
    };
    Ok((map, report))
}

/// Images of the points of `source` as molecules on `target`, for radii clamped to `[s1, s2]`:
/// points beyond `s2` are retracted, points below `s1` pushed outward with weight `(ρ/s1)^α`.
pub fn clamp_images(source: &PointedMetricSpace, target: &PointedMetricSpace, s1: f64, s2: f64) -> Result<Vec<Molecule>> {
    if !(s1 >= 0.0 && s1 <= s2) {
        return Err(Error::BadParameter(format!("need 0 <= s1 <= s2, got {s1}, {s2}")));
    }
    (0..source.len()).map(|y| scaled_image(source, target, y, s1, s2)).collect()
}

/// Amenability maps `E_n` for disjoint blocks on a σ-closed sample: radii inside
/// `J_n` are clamped to `R^{I_n}` by retraction above and the outward map below.
pub fn ray_amenability_maps(
    space: &PointedMetricSpace,
    radix: f64,
    blocks: &[DisjointBlock],
) -> Result<Vec<Option<AmenabilityMap>>> {
    let outer = AnnulusFamily::new(
        space,
        radix,
        blocks.iter().map(|b| IntervalSpec::open(b.outer.0, b.outer.1).map(|iv| (b.id, iv))).collect::<Result<_>>()?,
    )?;
    let inner = AnnulusFamily::new(space, radix, blocks.iter().map(|b| (b.id, b.inner)).collect())?;
    let alpha = space.alpha();
    blocks
        .iter()
        .enumerate()
        .map(|(n, b)| {
            // log scale lives on snowflaked distances: d = ρ^α
            let s1 = radix.powf(b.inner.lo / alpha);
            let s2 = radix.powf(b.inner.hi / alpha);
            clamp_images(outer.subspace(n), inner.subspace(n), s1, s2).map(|images| Some(AmenabilityMap { images }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn retraction_on_a_line() {
        let s = line(&[0.0, 1.0, 3.0]);
        let rep = radial_retraction(&s, 1.0).unwrap();
        assert_eq!(rep.map, vec![0, 1, 1]);
        assert!(rep.lipschitz.value <= 2.0 && rep.fixes_ball && rep.idempotent);
        assert!(matches!(radial_retraction(&line(&[0.0, 1.0, 3.0]), 2.0), Err(Error::NotSigmaClosed { .. })));
    }

    #[test]
    fn outward_formula() {
        let s = line(&[0.0, 1.0, 2.0, 4.0]);
        let (map, rep) = outward_amenability_map(&s, &[1, 2, 3], 2.0, 1.0, &Backend::default()).unwrap();
        // d(x, 0) = S/2 maps to (1/2) δ(2x)
        let k = map.target.index_of_id(2).unwrap();
        assert_eq!(map.images[1], Molecule::delta(&map.target, k).scaled(0.5));
        assert!(rep.restricts_to_delta);
        assert!(rep.lipschitz.value <= rep.bound * (1.0 + 1e-6));
        assert!(matches!(
            outward_amenability_map(&s, &[0, 1], 2.0, 1.0, &Backend::default()),
            Err(Error::BadSubset(_))
        ));
    }

    #[test]
    fn ray_maps_give_exact_etp_identity() {
        use crate::decomposition::verify_etp_identity;
        let mut pts = vec![vec![0.0, 0.0]];
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::PI / 4.0;
            for j in 0..24 {
                let r = 2f64.powf(j as f64 / 4.0);
                pts.push(vec![r * th.cos(), r * th.sin()]);
            }
        }
        let s = PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap();
        let blocks = [
            DisjointBlock { id: 1, inner: IntervalSpec::closed(0.0, 2.0).unwrap(), outer: (-0.5, 2.5) },
            DisjointBlock { id: 2, inner: IntervalSpec::closed(3.0, 5.5).unwrap(), outer: (2.5, 6.0) },
        ];
        let maps = ray_amenability_maps(&s, 2.0, &blocks).unwrap();
        let rep = verify_etp_identity(&s, 2.0, &blocks, 0.5, 1.0, &maps, &Backend::default()).unwrap();
        assert!(rep.residual <= 1e-10, "{}", rep.residual);
        assert!(rep.weights_pointwise_ok);
        assert!(rep.measured_t.value <= rep.bound_t);
    }
}
