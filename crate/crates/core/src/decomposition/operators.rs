//! The operators `P`, `S`, `T`, `E` between `F_p(M)` and ℓ_p-sums over annuli,
//! the closed-form bounds they obey, and the identity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::family::{log_window, AnnulusFamily};
use super::matrix::{Label, LinearMapMatrix};
use super::weights::{build_disjoint_bumps, build_hat_partition, overlap, PartitionReport, WeightSystem};
use crate::error::{Error, Result};
use crate::free_norm::{
    free_norm, lipschitz_molecule_map, lipschitz_sum_map, lp_sum_norm, Backend, LipschitzResult, Molecule,
    SumElement,
};
use crate::metric::{require_p, IntervalSpec, PointedMetricSpace};

/// Residual threshold for identity compositions.
pub const IDENTITY_TOL: f64 = 1e-10;

/// `C(p, k, R, K1, K2)` bounding the operator built from `K1`-Lipschitz weights bounded by `K2`.
pub fn norm_bound_t(p: f64, k: usize, radix: f64, k1: f64, k2: f64) -> Result<f64> {
    require_p(p)?;
    if !(radix > 1.0) || k == 0 || !(k1 > 0.0) || !(k2 > 0.0) {
        return Err(Error::BadParameter(format!("bad bound inputs k={k}, R={radix}, K1={k1}, K2={k2}")));
    }
    let lr = radix.ln();
    let a = k1.powf(p) / lr.powf(p);
    let b = (k1.powf(p) * radix.powf(p) / lr.powf(p)).max(k2.powf(p) * radix.powf(p) / (radix - 1.0).powf(p));
    Ok((2.0 * k as f64).powf(1.0 / p) * (a + b).powf(1.0 / p))
}

/// `(K^p + 1)^(1/p) (K^p − 1)^(−1/p)`, the inverse bound for a `K`-separated partition.
pub fn separated_family_bound(k: f64, p: f64) -> Result<f64> {
    require_p(p)?;
    if !(k > 1.0) {
        return Err(Error::BadParameter(format!("gap K = {k} must exceed 1")));
    }
    if k.is_infinite() {
        return Ok(1.0);
    }
    let kp = k.powf(p);
    Ok(((kp + 1.0) / (kp - 1.0)).powf(1.0 / p))
}

/// Nonbase points of `space` as `F_p(M)` basis labels.
pub fn free_basis(space: &PointedMetricSpace) -> Vec<Label> {
    (0..space.len()).filter(|&i| i != space.base()).map(|i| Label { block: None, point: space.id(i) }).collect()
}

fn part_basis(block: i64, sub: &PointedMetricSpace) -> Vec<Label> {
    (0..sub.len()).filter(|&i| i != sub.base()).map(|i| Label { block: Some(block), point: sub.id(i) }).collect()
}

/// Basis of the ℓ_p-sum over the parts of `family`.
pub fn sum_basis(family: &AnnulusFamily) -> Vec<Label> {
    (0..family.len()).flat_map(|n| part_basis(family.id(n), family.subspace(n))).collect()
}

/// `P`: `(μ_n) ↦ Σ L_n(μ_n)`, the sum of canonical inclusions.
pub fn operator_p(family: &AnnulusFamily) -> LinearMapMatrix {
    let mut m = LinearMapMatrix::zeros(free_basis(family.space()), sum_basis(family));
    let rows = m.row_lookup();
    for c in 0..m.cols().len() {
        let target = Label { block: None, point: m.cols()[c].point };
        let r = rows[&target];
        m.set(r, c, 1.0);
    }
    m
}

/// Weight of `x` in part `n`: `ψ_n(log_R d(0, x))`, zero at the base.
fn weight_of(family: &AnnulusFamily, weights: &WeightSystem, n: usize, x: usize) -> f64 {
    if x == family.space().base() {
        0.0
    } else {
        weights.psi(n, family.log_radius(x))
    }
}

/// `T`: `δ(x) ↦ (ψ_n(log_R d(0, x)) δ_n(x))_n`.
pub fn operator_t(family: &AnnulusFamily, weights: &WeightSystem) -> Result<LinearMapMatrix> {
    if weights.len() != family.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} parts", weights.len(), family.len())));
    }
    let space = family.space();
    let mut m = LinearMapMatrix::zeros(sum_basis(family), free_basis(space));
    let rows = m.row_lookup();
    for (c, x) in (0..space.len()).filter(|&x| x != space.base()).enumerate() {
        for n in 0..family.len() {
            let w = weight_of(family, weights, n, x);
            if w == 0.0 {
                continue;
            }
            if family.local_index(n, x).is_none() {
                return Err(Error::SupportMismatch { part: n, u: family.log_radius(x) });
            }
            let r = rows[&Label { block: Some(family.id(n)), point: space.id(x) }];
            m.set(r, c, w);
        }
    }
    Ok(m)
}

/// Images `x ↦ T(δ(x))` as sum elements, for measuring `‖T‖`.
pub fn t_images(family: &AnnulusFamily, weights: &WeightSystem, p: f64) -> Vec<SumElement> {
    let space = family.space();
    (0..space.len())
        .map(|x| {
            let parts = (0..family.len())
                .filter_map(|n| {
                    let w = weight_of(family, weights, n, x);
                    let loc = family.local_index(n, x)?;
                    (w != 0.0).then(|| (n, Molecule::delta(family.subspace(n), loc).scaled(w)))
                })
                .collect();
            SumElement { p, parts }
        })
        .collect()
}

/// Measured `‖T‖` as the Lipschitz constant of `x ↦ T(δ(x))`.
pub fn measure_t(family: &AnnulusFamily, weights: &WeightSystem, p: f64, backend: &Backend) -> Result<LipschitzResult> {
    let images = t_images(family, weights, p);
    lipschitz_sum_map(family.space(), family.subspaces(), &images, backend)
}

/// `S`: block inclusion of the sum over `inner` into the sum over `outer`.
pub fn operator_s(inner: &AnnulusFamily, outer: &AnnulusFamily) -> Result<LinearMapMatrix> {
    let mut m = LinearMapMatrix::zeros(sum_basis(outer), sum_basis(inner));
    let rows = m.row_lookup();
    for c in 0..m.cols().len() {
        let l = m.cols()[c];
        let r = *rows.get(&l).ok_or_else(|| {
            Error::BadFamily(format!("point {} of part {:?} is missing from the outer part", l.point, l.block))
        })?;
        m.set(r, c, 1.0);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PstReport {
    pub residual: f64,
    pub weight_sum_error: f64,
    pub partition: PartitionReport,
    pub k: usize,
    pub r: f64,
    pub radix: f64,
    pub k1: f64,
    pub k2: f64,
    pub measured_t: LipschitzResult,
    pub bound_t: f64,
    pub parts: usize,
}

/// Builds `T` on `J_n = interior of I_n`, `S` and `P`, and checks `P∘S∘T = Id`.
///
/// The weights are the partition of unity on the `J_n` with margin `r`, so
/// the cores `[lo_n + r, hi_n − r]` must cover the log radii of the space.
pub fn verify_pst_identity(
    space: &PointedMetricSpace,
    radix: f64,
    intervals: &[(i64, IntervalSpec)],
    r: f64,
    p: f64,
    backend: &Backend,
) -> Result<PstReport> {
    require_p(p)?;
    let mut j_specs = Vec::new();
    let mut j_open = Vec::new();
    for &(id, iv) in intervals {
        if iv.hi - iv.lo < 2.0 * r {
            return Err(Error::BadFamily(format!("interval {id} is shorter than 2r")));
        }
        j_specs.push((id, IntervalSpec::open(iv.lo, iv.hi)?));
        j_open.push((iv.lo, iv.hi));
    }
    let k = overlap(&j_open);
    let window = log_window(space, radix)?;
    let weights = build_hat_partition(&j_open, r, k, window)?;
    let j_family = AnnulusFamily::new(space, radix, j_specs)?;
    let i_family = AnnulusFamily::new(space, radix, intervals.to_vec())?;

    let t = operator_t(&j_family, &weights)?;
    let s = operator_s(&j_family, &i_family)?;
    let pm = operator_p(&i_family);
    let residual = pm.compose(&s)?.compose(&t)?.identity_residual()?;

    let weight_sum_error = (0..space.len())
        .filter(|&x| x != space.base())
        .map(|x| ((0..weights.len()).map(|n| weight_of(&j_family, &weights, n, x)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let measured_t = measure_t(&j_family, &weights, p, backend)?;
    let k1 = weights.lipschitz_bound();
    let bound_t = norm_bound_t(p, k, radix, k1, 1.0)?;
    Ok(PstReport {
        residual,
        weight_sum_error,
        partition: weights.measure(),
        k,
        r,
        radix,
        k1,
        k2: 1.0,
        measured_t,
        bound_t,
        parts: intervals.len(),
    })
}

/// A map `M*_{J} → F_p(M*_{I})` extending δ on `M*_{I}`: `images[y]` is the
/// image of the `y`-th point of the `J`-part, as a molecule on the `I`-part.
#[derive(Debug, Clone, PartialEq)]
pub struct AmenabilityMap {
    pub images: Vec<Molecule>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtpReport {
    pub residual: f64,
    pub weights_pointwise_ok: bool,
    pub measured_t: LipschitzResult,
    pub bound_t: f64,
    pub measured_e: Vec<LipschitzResult>,
    pub amenability_constant: f64,
    pub complementation_bound: f64,
    pub r: f64,
    pub radix: f64,
}

/// One block of the disjoint construction: `I_n ⊆ [a_n + r, b_n − r]`, `J_n = (a_n, b_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjointBlock {
    pub id: i64,
    pub inner: IntervalSpec,
    pub outer: (f64, f64),
}

/// Checks `E∘T∘P = Id` on the sum over the `I_n` for pairwise disjoint `J_n`.
pub fn verify_etp_identity(
    space: &PointedMetricSpace,
    radix: f64,
    blocks: &[DisjointBlock],
    r: f64,
    p: f64,
    maps: &[Option<AmenabilityMap>],
    backend: &Backend,
) -> Result<EtpReport> {
    require_p(p)?;
    for b in blocks {
        let (a, hi) = b.outer;
        if b.inner.lo < a + r || b.inner.hi > hi - r {
            return Err(Error::BadFamily(format!("I_{} is not inside [a + r, b - r]", b.id)));
        }
    }
    let outer: Vec<(f64, f64)> = blocks.iter().map(|b| b.outer).collect();
    let weights = build_disjoint_bumps(&outer, r)?;
    let j_family = AnnulusFamily::new(
        space,
        radix,
        blocks.iter().map(|b| IntervalSpec::open(b.outer.0, b.outer.1).map(|iv| (b.id, iv))).collect::<Result<_>>()?,
    )?;
    let i_family = AnnulusFamily::new(space, radix, blocks.iter().map(|b| (b.id, b.inner)).collect())?;

    let mut maps_ok = Vec::with_capacity(blocks.len());
    for n in 0..blocks.len() {
        match maps.get(n).and_then(|m| m.as_ref()) {
            Some(m) if m.images.len() == j_family.subspace(n).len() => maps_ok.push(m),
            Some(m) => {
                return Err(Error::DimensionMismatch(format!(
                    "amenability map {n} has {} images for {} points",
                    m.images.len(),
                    j_family.subspace(n).len()
                )))
            }
            None => return Err(Error::MissingAmenability(n)),
        }
    }

    // pointwise: ψ_n = 1 on I_n, 0 outside J_n
    let mut weights_pointwise_ok = true;
    for x in (0..space.len()).filter(|&x| x != space.base()) {
        let u = i_family.log_radius(x);
        for (n, b) in blocks.iter().enumerate() {
            let w = weights.psi(n, u);
            if b.inner.contains(u) && w != 1.0 {
                weights_pointwise_ok = false;
            }
            if !(u > b.outer.0 && u < b.outer.1) && w != 0.0 {
                weights_pointwise_ok = false;
            }
        }
    }

    let t = operator_t(&j_family, &weights)?;
    let pm = operator_p(&i_family);
    let mut e = LinearMapMatrix::zeros(sum_basis(&i_family), sum_basis(&j_family));
    let rows = e.row_lookup();
    let cols = e.col_lookup();
    for n in 0..blocks.len() {
        let (jsub, isub) = (j_family.subspace(n), i_family.subspace(n));
        for y in (0..jsub.len()).filter(|&y| y != jsub.base()) {
            let c = cols[&Label { block: Some(blocks[n].id), point: jsub.id(y) }];
            let img = &maps_ok[n].images[y];
            if img.len() != isub.len() {
                return Err(Error::DimensionMismatch(format!("image of point {y} in part {n} has wrong length")));
            }
            for z in (0..isub.len()).filter(|&z| z != isub.base()) {
                let v = img.coeff(z);
                if v != 0.0 {
                    e.set(rows[&Label { block: Some(blocks[n].id), point: isub.id(z) }], c, v);
                }
            }
        }
    }
    let residual = e.compose(&t)?.compose(&pm)?.identity_residual()?;

    let measured_t = measure_t(&j_family, &weights, p, backend)?;
    let bound_t = norm_bound_t(p, 1, radix, 1.0 / r, 1.0)?;
    let mut measured_e = Vec::with_capacity(blocks.len());
    for n in 0..blocks.len() {
        measured_e.push(lipschitz_molecule_map(
            j_family.subspace(n),
            i_family.subspace(n),
            &maps_ok[n].images,
            p,
            backend,
        )?);
    }
    let amenability_constant = measured_e.iter().map(|l| l.value).fold(1.0, f64::max);
    Ok(EtpReport {
        residual,
        weights_pointwise_ok,
        measured_t,
        bound_t,
        measured_e,
        amenability_constant,
        complementation_bound: amenability_constant * bound_t,
        r,
        radix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatedReport {
    pub gap: f64,
    pub bound: f64,
    pub max_ratio: f64,
    /// Both norms of every ratio were computed exactly.
    pub certified: bool,
    pub samples: usize,
    pub square: bool,
}

/// Gap `inf_{m<n} inf A_n / sup A_m` of annuli listed in increasing order.
pub fn family_gap(annuli: &[IntervalSpec]) -> f64 {
    let mut k = f64::INFINITY;
    for n in 0..annuli.len() {
        for m in 0..n {
            k = k.min(annuli[n].lo / annuli[m].hi);
        }
    }
    k
}

/// Samples `‖e‖ / ‖P e‖` over random sum elements for a separated partition into annuli.
pub fn verify_separated_inverse(
    space: &PointedMetricSpace,
    annuli: &[IntervalSpec],
    p: f64,
    samples: usize,
    seed: u64,
    backend: &Backend,
) -> Result<SeparatedReport> {
    require_p(p)?;
    if annuli.is_empty() {
        return Err(Error::BadFamily("no annuli".into()));
    }
    let gap = family_gap(annuli);
    if !(gap > 1.0) {
        return Err(Error::BadFamily(format!("gap K = {gap} does not exceed 1")));
    }
    let base = space.base();
    for x in (0..space.len()).filter(|&x| x != base) {
        let hits = annuli.iter().filter(|a| a.contains(space.dist_to_base(x))).count();
        if hits != 1 {
            return Err(Error::BadFamily(format!("point {x} lies in {hits} annuli")));
        }
    }
    let parts: Vec<PointedMetricSpace> =
        annuli.iter().map(|a| space.restrict(a, true)).collect::<Result<_>>()?;
    let sum_dim: usize = parts.iter().map(|s| s.len() - 1).sum();
    let square = sum_dim == space.len() - 1;
    let bound = separated_family_bound(gap, p)?;
    let certified = backend.is_exact_for(space.len(), p) && parts.iter().all(|s| backend.is_exact_for(s.len(), p));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    let mut done = 0;
    while done < samples {
        let mut elem = SumElement { p, parts: Vec::new() };
        let mut total = vec![0.0; space.len()];
        for (n, sub) in parts.iter().enumerate() {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let mut coeffs = Vec::new();
            for y in (0..sub.len()).filter(|&y| y != sub.base()) {
                if rng.gen_bool(0.6) {
                    let a: f64 = rng.gen_range(-1.0..1.0);
                    coeffs.push((y, a));
                    let g = space.index_of_id(sub.id(y)).expect("part point lives in the space");
                    total[g] += a;
                    total[base] -= a;
                }
            }
            if !coeffs.is_empty() {
                elem.parts.push((n, Molecule::from_coeffs(sub, &coeffs)?));
            }
        }
        if elem.parts.is_empty() {
            continue;
        }
        let pe = Molecule::from_dense(total)?;
        let den = free_norm(space, &pe, p, backend)?.value;
        if den == 0.0 {
            continue;
        }
        let num = lp_sum_norm(&parts, &elem, backend)?;
        max_ratio = max_ratio.max(num / den);
        done += 1;
    }
    Ok(SeparatedReport { gap, bound, max_ratio, certified, samples, square })
}
