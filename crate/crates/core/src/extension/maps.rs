//! Maps `f: M → F_p(N)` that restrict to `δ` on `N`, and their measured constants.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::whitney::{check_subset, subset_space, WhitneyReport, WhitneySystem, CHECK_TOL, DOUBLING_EXACT_THRESHOLD};
use crate::decomposition::{Label, LinearMapMatrix};
use crate::error::{Error, Result};
use crate::free_norm::{free_norm, lipschitz_molecule_map, Backend, LipschitzResult, Molecule};
use crate::metric::{require_p, PointedMetricSpace, BOUND_REL_TOL};
use crate::par;

/// `x ↦ images[x]`, molecules on the subspace `target` of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMap {
    pub target: PointedMetricSpace,
    /// Global index in `M` of each target point.
    pub target_points: Vec<usize>,
    pub images: Vec<Molecule>,
}

impl ExtensionMap {
    /// Lipschitz constant of the map into `F_p(target)`.
    pub fn lipschitz(&self, source: &PointedMetricSpace, p: f64, backend: &Backend) -> Result<LipschitzResult> {
        lipschitz_molecule_map(source, &self.target, &self.images, p, backend)
    }

    /// True when `images[x] = δ(x)` for every target point.
    pub fn restricts_to_delta(&self) -> bool {
        self.target_points.iter().enumerate().all(|(k, &g)| self.images[g] == Molecule::delta(&self.target, k))
    }

    /// `max |L_f ∘ L_ι − Id|` on the δ-basis of the target.
    pub fn idempotent_residual(&self, source: &PointedMetricSpace) -> Result<f64> {
        let nb: Vec<Label> = (0..self.target.len())
            .filter(|&k| k != self.target.base())
            .map(|k| Label { block: None, point: self.target.id(k) })
            .collect();
        let mb: Vec<Label> = (0..source.len())
            .filter(|&x| x != source.base())
            .map(|x| Label { block: None, point: source.id(x) })
            .collect();
        let mut lf = LinearMapMatrix::zeros(nb.clone(), mb.clone());
        let rows = lf.row_lookup();
        for (c, x) in (0..source.len()).filter(|&x| x != source.base()).enumerate() {
            let img = &self.images[x];
            for k in (0..self.target.len()).filter(|&k| k != self.target.base()) {
                let v = img.coeff(k);
                if v != 0.0 {
                    lf.set(rows[&Label { block: None, point: self.target.id(k) }], c, v);
                }
            }
        }
        let mut li = LinearMapMatrix::zeros(mb, nb);
        let rows = li.row_lookup();
        for c in 0..li.cols().len() {
            let l = li.cols()[c];
            let r = *rows.get(&l).ok_or_else(|| Error::BadSubset("target point missing from the source".into()))?;
            li.set(r, c, 1.0);
        }
        lf.compose(&li)?.identity_residual()
    }
}

/// `112 · 15^(1/p) · D^(4/p)`.
pub fn doubling_bound(p: f64, d: f64) -> f64 {
    112.0 * 15f64.powf(1.0 / p) * d.powf(4.0 / p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrucialCheck {
    pub pass: bool,
    /// `max Σ|ψ_i(x) − ψ_i(y)|^p / (2 · 8^p · K · d^p(x,y) / A^p)`.
    pub worst_ratio: f64,
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub p: f64,
    pub cover: WhitneyReport,
    pub crucial: CrucialCheck,
    pub weights_ok: bool,
    pub restricts_to_delta: bool,
    pub lipschitz: LipschitzResult,
    pub lipschitz_exact: bool,
    pub bound: f64,
    pub d_eff: f64,
    pub idempotent_residual: f64,
}

/// The map `f(x) = δ(x)` on `N`, `Σ ψ_i(x) δ(x_i)` off `N`.
pub fn extension_from_cover(sys: &WhitneySystem) -> Result<ExtensionMap> {
    let space = sys.space();
    let subset = sys.subset().to_vec();
    let target = subset_space(space, &subset)?;
    let mut local = vec![usize::MAX; space.len()];
    for (k, &g) in subset.iter().enumerate() {
        local[g] = k;
    }
    let mut images = Vec::with_capacity(space.len());
    for x in 0..space.len() {
        if sys.in_subset(x) {
            images.push(Molecule::delta(&target, local[x]));
        } else {
            let mut m = Molecule::zero(target.len());
            for (i, w) in sys.psi(x) {
                m.add_scaled(&Molecule::delta(&target, local[sys.indices()[i].y]), w);
            }
            images.push(m);
        }
    }
    Ok(ExtensionMap { target, target_points: subset, images })
}

/// Pairwise weight-variation check over `x, y ∉ N`.
pub fn crucial_check(sys: &WhitneySystem, p: f64) -> CrucialCheck {
    let space = sys.space();
    let outside: Vec<usize> = (0..space.len()).filter(|&x| !sys.in_subset(x)).collect();
    let psi: Vec<Vec<(usize, f64)>> = (0..space.len()).map(|x| if sys.in_subset(x) { Vec::new() } else { sys.psi(x) }).collect();
    let k = sys.overlap_bound();
    let mut pairs = Vec::new();
    for (a, &x) in outside.iter().enumerate() {
        for &y in &outside[a + 1..] {
            pairs.push((x, y));
        }
    }
    let best = par::try_max(&pairs, |(x, y)| {
        let mut lhs = 0.0;
        let (px, py) = (&psi[x], &psi[y]);
        for &(i, w) in px {
            let v = py.iter().find(|e| e.0 == i).map_or(0.0, |e| e.1);
            lhs += (w - v).abs().powf(p);
        }
        for &(i, v) in py {
            if !px.iter().any(|e| e.0 == i) {
                lhs += v.powf(p);
            }
        }
        let a = sys.dist_to_subset(x).max(sys.dist_to_subset(y));
        let rhs = 2.0 * 8f64.powf(p) * k * space.d(x, y).powf(p) / a.powf(p);
        Ok(lhs / rhs)
    })
    .expect("infallible");
    match best {
        Some((v, pair)) => CrucialCheck { pass: v <= 1.0 + CHECK_TOL, worst_ratio: v, witness: Some(pair) },
        None => CrucialCheck { pass: true, worst_ratio: 0.0, witness: None },
    }
}

/// Builds the cover, the extension map and all measured quantities.
pub fn doubling_extension_map(
    space: &PointedMetricSpace,
    subset: &[usize],
    p: f64,
    backend: &Backend,
) -> Result<(ExtensionMap, ExtensionReport)> {
    require_p(p)?;
    let sys = WhitneySystem::build(space, subset, DOUBLING_EXACT_THRESHOLD)?;
    let cover = sys.check();
    if !cover.pass() {
        return Err(Error::InternalInvariantBroken(format!("cover properties failed: {cover:?}")));
    }
    let map = extension_from_cover(&sys)?;
    let weights_ok = (0..space.len()).filter(|&x| !sys.in_subset(x)).all(|x| {
        let w = sys.psi(x);
        w.iter().all(|e| e.1 >= 0.0) && (w.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() <= 1e-12
    });
    let crucial = crucial_check(&sys, p);
    let lipschitz = map.lipschitz(space, p, backend)?;
    let d_eff = sys.d_hat().max(2) as f64;
    let report = ExtensionReport {
        p,
        crucial,
        weights_ok,
        restricts_to_delta: map.restricts_to_delta(),
        lipschitz,
        lipschitz_exact: backend.is_exact_for(map.target.len(), p),
        bound: doubling_bound(p, d_eff),
        d_eff,
        idempotent_residual: map.idempotent_residual(space)?,
        cover,
    };
    Ok((map, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalReport {
    pub removed: usize,
    /// Base of `M ∖ {x0}`: the point nearest to `x0`.
    pub new_base: usize,
    pub lipschitz: LipschitzResult,
    pub bound: f64,
    /// `max (d^p(x0,x) + 2 d^p(x0,0)) / (3 d^p(x0,x))` over `x ≠ x0, 0`.
    pub sum_inequality_worst: f64,
    pub sum_inequality_ok: bool,
}

/// `f = δ` on `M ∖ {x0}` and `f(x0) = 0`, with the base moved to the point nearest `x0`.
pub fn point_removal_map(
    space: &PointedMetricSpace,
    x0: usize,
    p: f64,
    backend: &Backend,
) -> Result<(ExtensionMap, RemovalReport)> {
    require_p(p)?;
    if space.len() < 2 {
        return Err(Error::TooSmall);
    }
    if x0 >= space.len() {
        return Err(Error::BadSubset(format!("point {x0} out of range")));
    }
    let rest: Vec<usize> = (0..space.len()).filter(|&x| x != x0).collect();
    let mut new_base = rest[0];
    for &x in &rest {
        if space.d(x0, x) < space.d(x0, new_base) {
            new_base = x;
        }
    }
    let base_pos = rest.iter().position(|&x| x == new_base).unwrap();
    let target = space.subspace(&rest, base_pos)?;
    let source = space.with_base(new_base)?;
    let images: Vec<Molecule> = (0..space.len())
        .map(|x| match rest.binary_search(&x) {
            Ok(k) => Molecule::delta(&target, k),
            Err(_) => Molecule::zero(target.len()),
        })
        .collect();
    let map = ExtensionMap { target, target_points: rest.clone(), images };
    let lipschitz = map.lipschitz(&source, p, backend)?;

    let d0 = space.d(x0, new_base).powf(p);
    let mut worst: f64 = 0.0;
    let mut chain_ok = true;
    for &x in rest.iter().filter(|&&x| x != new_base) {
        let lhs = d0 + space.d(x, new_base).powf(p);
        let mid = space.d(x0, x).powf(p) + 2.0 * d0;
        let rhs = 3.0 * space.d(x0, x).powf(p);
        chain_ok &= lhs <= mid * (1.0 + CHECK_TOL);
        worst = worst.max(mid / rhs);
    }
    let report = RemovalReport {
        removed: x0,
        new_base,
        lipschitz,
        bound: 2f64.powf(1.0 / p),
        sum_inequality_worst: worst,
        sum_inequality_ok: chain_ok && worst <= 1.0 + CHECK_TOL,
    };
    Ok((map, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmenabilityReport {
    pub p: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Both norms of every ratio were computed exactly, so `max_ratio` is a lower bound for `‖L_ι^{-1}‖`.
    pub certified: bool,
    /// `(ratio, support size)` per sample.
    pub ratios: Vec<(f64, usize)>,
}

/// Sampled `‖μ‖_{F_p(N)} / ‖μ‖_{F_p(M)}` over random molecules supported in `N`.
pub fn amenability_defect(
    space: &PointedMetricSpace,
    subset: &[usize],
    p: f64,
    samples: usize,
    seed: u64,
    backend: &Backend,
) -> Result<AmenabilityReport> {
    require_p(p)?;
    let subset = check_subset(space, subset)?;
    let nsub = subset_space(space, &subset)?;
    let nonbase: Vec<usize> = (0..nsub.len()).filter(|&k| k != nsub.base()).collect();
    let certified = backend.is_exact_for(nsub.len(), p) && backend.is_exact_for(space.len(), p);
    if nonbase.is_empty() {
        return Ok(AmenabilityReport { p, samples: 0, max_ratio: 1.0, min_ratio: 1.0, certified, ratios: Vec::new() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(samples);
    while ratios.len() < samples {
        let size = rng.gen_range(1..=nonbase.len().min(4));
        let chosen: Vec<usize> = nonbase.choose_multiple(&mut rng, size).copied().collect();
        let coeffs: Vec<(usize, f64)> = chosen.iter().map(|&k| (k, rng.gen_range(-1.0..1.0))).collect();
        let mu_n = Molecule::from_coeffs(&nsub, &coeffs)?;
        if mu_n.is_zero() {
            continue;
        }
        let mut dense = vec![0.0; space.len()];
        for (k, &g) in subset.iter().enumerate() {
            dense[g] = mu_n.coeff(k);
        }
        let mu_m = Molecule::from_dense(dense)?;
        let num = free_norm(&nsub, &mu_n, p, backend)?.value;
        let den = free_norm(space, &mu_m, p, backend)?.value;
        ratios.push((num / den, size));
    }
    let max_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_ratio = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    Ok(AmenabilityReport { p, samples, max_ratio, min_ratio, certified, ratios })
}

/// `measured ≤ bound · (1 + 1e-9)`.
pub fn within_bound(measured: f64, bound: f64) -> bool {
    measured <= bound * (1.0 + BOUND_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn extension_on_a_line() {
        let s = line(&[0.0, 1.0, 2.0, 3.0, 5.0, 8.0]);
        let (map, rep) = doubling_extension_map(&s, &[0, 1, 2], 1.0, &Backend::default()).unwrap();
        assert!(map.restricts_to_delta());
        assert!(rep.weights_ok && rep.crucial.pass);
        assert!(rep.lipschitz.value <= rep.bound);
        assert!(rep.idempotent_residual <= 1e-10);
    }

    #[test]
    fn two_point_removal() {
        let s = line(&[0.0, 1.0]);
        let (_, rep) = point_removal_map(&s, 1, 0.5, &Backend::default()).unwrap();
        assert_eq!(rep.lipschitz.value, 0.0);
    }

    #[test]
    fn three_point_removal() {
        let s = line(&[0.0, 1.0, 2.0]);
        let (map, rep) = point_removal_map(&s, 2, 1.0, &Backend::default()).unwrap();
        assert_eq!(rep.new_base, 1);
        assert!(map.images[2].is_zero());
        assert!(rep.lipschitz.value <= 2.0 + 1e-12);
        assert!(rep.sum_inequality_ok);
        assert!(matches!(point_removal_map(&line(&[0.0]), 0, 1.0, &Backend::default()), Err(Error::TooSmall)));
    }

    #[test]
    fn amenability_at_p1_is_isometric() {
        let s = line(&[0.0, 1.0, 2.0, 4.0, 7.0]);
        let rep = amenability_defect(&s, &[0, 2, 4], 1.0, 30, 3, &Backend::default()).unwrap();
        assert!(rep.max_ratio <= 1.0 + 1e-9 && rep.min_ratio >= 1.0 - 1e-9);
        let all = amenability_defect(&s, &[0, 1, 2, 3, 4], 0.5, 10, 3, &Backend::default()).unwrap();
        assert!(all.ratios.iter().all(|r| (r.0 - 1.0).abs() < 1e-12));
    }
}
