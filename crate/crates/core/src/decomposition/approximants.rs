//! Diagonal approximants `S_m(δ(x)) = Σ_{|n|≤m} ψ_n(log_R d(0, x)) δ(x)` built from hat weights.

use serde::Serialize;

use super::family::log_radii;
use super::matrix::LinearMapMatrix;
use super::operators::{free_basis, norm_bound_t};
use crate::error::{Error, Result};
use crate::free_norm::{lipschitz_molecule_map, Backend, LipschitzResult, Molecule};
use crate::metric::{require_p, PointedMetricSpace};

/// `max{1 − |u − R n| / R, 0}`.
pub fn hat_weight(radix: f64, n: i64, u: f64) -> f64 {
    (1.0 - (u - radix * n as f64).abs() / radix).max(0.0)
}

/// `w_m(x) = Σ_{|n|≤m} ψ_n(log_R d(0, x))` for every point; zero at the base.
pub fn approximant_weights(space: &PointedMetricSpace, radix: f64, m: usize) -> Vec<f64> {
    let m = m as i64;
    log_radii(space, radix, &[])
        .into_iter()
        .map(|u| if u.is_finite() { (-m..=m).map(|n| hat_weight(radix, n, u)).sum() } else { 0.0 })
        .collect()
}

/// Matrices of `S_0, …, S_{m_max}` on the δ-basis.
pub fn commuting_approximants(space: &PointedMetricSpace, radix: f64, m_max: usize) -> Result<Vec<LinearMapMatrix>> {
    if !(radix > 1.0 && radix.is_finite()) {
        return Err(Error::BadParameter(format!("R = {radix} must exceed 1")));
    }
    let labels = free_basis(space);
    let nonbase: Vec<usize> = (0..space.len()).filter(|&x| x != space.base()).collect();
    Ok((0..=m_max)
        .map(|m| {
            let w = approximant_weights(space, radix, m);
            let mut s = LinearMapMatrix::zeros(labels.clone(), labels.clone());
            for (i, &x) in nonbase.iter().enumerate() {
                s.set(i, i, w[x]);
            }
            s
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BapReport {
    pub radix: f64,
    pub m_max: usize,
    /// `max_{m,m'} ‖S_m S_{m'} − S_{min(m,m')}‖` over all pairs.
    pub min_relation_residual: f64,
    pub worst: (usize, usize),
    /// Same maximum restricted to `m ≠ m'`.
    pub off_diagonal_residual: f64,
    pub commutator_residual: f64,
    /// Smallest `m ≤ m_max` with `S_m = Id`.
    pub identity_from: Option<usize>,
    pub norms: Vec<LipschitzResult>,
    pub sup_norm: f64,
    pub bound: f64,
    pub limit_constant: f64,
}

/// Builds `S_0..S_{m_max}`, checks the semigroup relation and measures each `‖S_m‖`.
pub fn verify_commuting_bap(
    space: &PointedMetricSpace,
    radix: f64,
    m_max: usize,
    p: f64,
    backend: &Backend,
) -> Result<BapReport> {
    require_p(p)?;
    let mats = commuting_approximants(space, radix, m_max)?;
    let mut min_relation_residual: f64 = 0.0;
    let mut off_diagonal_residual: f64 = 0.0;
    let mut commutator_residual: f64 = 0.0;
    let mut worst = (0, 0);
    for m in 0..=m_max {
        for m2 in 0..=m_max {
            let prod = mats[m].compose(&mats[m2])?;
            let res = prod.max_abs_diff(&mats[m.min(m2)])?;
            if res > min_relation_residual {
                min_relation_residual = res;
                worst = (m, m2);
            }
            if m != m2 {
                off_diagonal_residual = off_diagonal_residual.max(res);
            }
            commutator_residual = commutator_residual.max(prod.max_abs_diff(&mats[m2].compose(&mats[m])?)?);
        }
    }
    let identity_from =
        (0..=m_max).find(|&m| mats[m].identity_residual().map(|r| r == 0.0).unwrap_or(false));

    let mut norms = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let w = approximant_weights(space, radix, m);
        let images: Vec<Molecule> = (0..space.len()).map(|x| Molecule::delta(space, x).scaled(w[x])).collect();
        norms.push(lipschitz_molecule_map(space, space, &images, p, backend)?);
    }
    let sup_norm = norms.iter().map(|l| l.value).fold(0.0, f64::max);
    Ok(BapReport {
        radix,
        m_max,
        min_relation_residual,
        worst,
        off_diagonal_residual,
        commutator_residual,
        identity_from,
        norms,
        sup_norm,
        bound: norm_bound_t(p, 2, radix, 1.0 / radix, 1.0)?,
        limit_constant: 4f64.powf(1.0 / p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    #[test]
    fn hats_sum_to_one() {
        for u in [-3.7, 0.0, 0.3, 2.0, 9.99] {
            let s: f64 = (-10..=10).map(|n| hat_weight(2.0, n, u)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_m_is_identity_and_off_diagonal_relation_is_exact() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0], vec![10.0]];
        let s = PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap();
        let rep = verify_commuting_bap(&s, 2.0, 4, 1.0, &Backend::default()).unwrap();
        assert_eq!(rep.identity_from, Some(2));
        assert!(rep.off_diagonal_residual <= 1e-12);
        assert_eq!(rep.commutator_residual, 0.0);
        assert!(rep.sup_norm <= rep.bound);
    }
}
