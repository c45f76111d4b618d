//! Measured Lipschitz constants of maps defined on the points of a space.

use serde::Serialize;

use super::{free_norm, lp_sum_norm, Backend, Molecule, SumElement};
use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzResult {
    pub value: f64,
    /// Pair realizing the maximum, `None` for spaces with one point.
    pub pair: Option<(usize, usize)>,
}

/// `max_{i<j} diff(i, j) / d(i, j)` over all unordered pairs.
///
/// When `diff` returns an upper bound for the true distance of the images the
/// result is an upper bound for the true constant.
pub fn lipschitz_constant<F>(source: &PointedMetricSpace, diff: F) -> Result<LipschitzResult>
where
    F: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    let pairs = par::pairs(source.len());
    lipschitz_over_pairs(source, &pairs, diff)
}

/// Same as [`lipschitz_constant`] restricted to the given pairs.
pub fn lipschitz_over_pairs<F>(source: &PointedMetricSpace, pairs: &[(usize, usize)], diff: F) -> Result<LipschitzResult>
where
    F: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    let best = par::try_max(pairs, |(i, j)| Ok(diff(i, j)? / source.d(i, j)))?;
    Ok(match best {
        Some((value, pair)) => LipschitzResult { value, pair: Some(pair) },
        None => LipschitzResult { value: 0.0, pair: None },
    })
}

/// Lipschitz constant of `x ↦ images[x]` into `F_p(target)`.
pub fn lipschitz_molecule_map(
    source: &PointedMetricSpace,
    target: &PointedMetricSpace,
    images: &[Molecule],
    p: f64,
    backend: &Backend,
) -> Result<LipschitzResult> {
    if images.len() != source.len() {
        return Err(Error::DimensionMismatch(format!("{} images for {} points", images.len(), source.len())));
    }
    lipschitz_constant(source, |i, j| {
        let diff = images[i].sub(&images[j]);
        if diff.is_zero() {
            return Ok(0.0);
        }
        Ok(free_norm(target, &diff, p, backend)?.value)
    })
}

/// Lipschitz constant of `x ↦ images[x]` into the ℓ_p-sum of `subspaces`.
pub fn lipschitz_sum_map(
    source: &PointedMetricSpace,
    subspaces: &[PointedMetricSpace],
    images: &[SumElement],
    backend: &Backend,
) -> Result<LipschitzResult> {
    if images.len() != source.len() {
        return Err(Error::DimensionMismatch(format!("{} images for {} points", images.len(), source.len())));
    }
    lipschitz_constant(source, |i, j| lp_sum_norm(subspaces, &sum_difference(&images[i], &images[j]), backend))
}

/// `a − b` part by part.
pub fn sum_difference(a: &SumElement, b: &SumElement) -> SumElement {
    let mut parts: Vec<(usize, Molecule)> = a.parts.clone();
    for (id, m) in &b.parts {
        match parts.iter_mut().find(|(k, _)| k == id) {
            Some((_, existing)) => existing.add_scaled(m, -1.0),
            None => parts.push((*id, m.scaled(-1.0))),
        }
    }
    parts.sort_by_key(|(k, _)| *k);
    SumElement { p: a.p, parts }
}

/// Lipschitz constant of `x ↦ images[x]` into `(R^k, |·|)` for the given norm.
pub fn lipschitz_vector_map(
    source: &PointedMetricSpace,
    images: &[Vec<f64>],
    norm: crate::metric::NormKind,
) -> Result<LipschitzResult> {
    if images.len() != source.len() {
        return Err(Error::DimensionMismatch(format!("{} images for {} points", images.len(), source.len())));
    }
    lipschitz_constant(source, |i, j| Ok(norm.distance(&images[i], &images[j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn identity_into_free_space_is_isometric() {
        let s = line(&[0.0, 1.0, 2.5, 4.0]);
        let images: Vec<Molecule> = (0..4).map(|i| Molecule::delta(&s, i)).collect();
        let r = lipschitz_molecule_map(&s, &s, &images, 1.0, &Backend::Flow).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_map_is_zero() {
        let s = line(&[0.0, 1.0, 2.0]);
        let r = lipschitz_vector_map(&s, &vec![vec![3.0]; 3], NormKind::Euclidean).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn doubling_map_on_segment() {
        let s = line(&[0.0, 0.25, 0.5, 1.0]);
        let images: Vec<Vec<f64>> = s.coords().unwrap().iter().map(|c| vec![2.0 * c[0]]).collect();
        let r = lipschitz_vector_map(&s, &images, NormKind::Euclidean).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert_eq!(r.pair, Some((0, 1)));
    }
}
