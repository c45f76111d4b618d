//! Whitney-type covers of `M ∖ N` by neighborhoods of nearest-net cells.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;

/// Relative slack allowed in the exhaustive checks.
pub const CHECK_TOL: f64 = 1e-12;

/// Default ball size up to which the doubling estimate uses exact covers.
pub const DOUBLING_EXACT_THRESHOLD: usize = 24;

/// One index `i = (y, n)` of the cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyIndex {
    /// Net point `x_i = y`, a global index into `M`.
    pub y: usize,
    pub scale: i32,
    /// `W_(y,n)`, global indices.
    pub cell: Vec<usize>,
    /// `V_(y,n)`, global indices.
    pub nbhd: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhitneySystem {
    space: PointedMetricSpace,
    subset: Vec<usize>,
    in_subset: Vec<bool>,
    dist_n: Vec<f64>,
    indices: Vec<WhitneyIndex>,
    /// `phi[i][x] = d(x, M ∖ V_i)`.
    phi: Vec<Vec<f64>>,
    /// Per point, the indices with `φ_i(x) > 0`.
    active: Vec<Vec<usize>>,
    d_hat: usize,
}

/// Outcome of one exhaustive property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    /// Worst observed value of the checked ratio (the bound is 1 for ratios).
    pub worst: f64,
    pub witness: Option<(usize, usize)>,
}

impl PropertyCheck {
    fn new() -> Self {
        PropertyCheck { pass: true, worst: 0.0, witness: None }
    }

    fn record(&mut self, value: f64, ok: bool, witness: (usize, usize)) {
        if value > self.worst || (!ok && self.pass) {
            self.worst = self.worst.max(value);
            self.witness = Some(witness);
        }
        self.pass &= ok;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyReport {
    /// `d(x_i, x) / (7 d(x, N))` over `x ∈ V_i`.
    pub h1: PropertyCheck,
    /// Overlap count divided by `K`; also fails if some point is uncovered.
    pub h2: PropertyCheck,
    /// `|φ_i(x) − φ_i(y)| / d(x, y)` and the support condition.
    pub h3: PropertyCheck,
    /// `(d(x, N)/4) / max_i φ_i(x)`; must stay below 1.
    pub h4: PropertyCheck,
    /// `|Φ(x) − Φ(y)| / (2K d(x, y))`.
    pub big_phi_lipschitz: PropertyCheck,
    /// `(d(x, N)/4) / Φ(x)`.
    pub big_phi_lower: PropertyCheck,
    pub overlap_max: usize,
    /// `overlap_histogram[c]` = number of points of `M ∖ N` lying in exactly `c` sets.
    pub overlap_histogram: Vec<usize>,
    pub d_hat: usize,
    pub k_bound: f64,
    pub indices: usize,
    pub scales: Vec<i32>,
}

impl WhitneyReport {
    pub fn pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass && self.h4.pass && self.big_phi_lipschitz.pass && self.big_phi_lower.pass
    }
}

/// `n` with `2^n ≤ d < 2^(n+1)`.
pub fn dyadic_scale(d: f64) -> i32 {
    let mut n = d.log2().floor() as i32;
    while 2f64.powi(n) > d {
        n -= 1;
    }
    while 2f64.powi(n + 1) <= d {
        n += 1;
    }
    n
}

/// Sorted, validated subset: nonempty, in range, without repeats, containing the base.
pub(crate) fn check_subset(space: &PointedMetricSpace, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    if s.is_empty() {
        return Err(Error::BadSubset("empty subset".into()));
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadSubset("repeated index".into()));
    }
    if *s.last().unwrap() >= space.len() {
        return Err(Error::BadSubset(format!("index {} out of range", s.last().unwrap())));
    }
    if s.binary_search(&space.base()).is_err() {
        return Err(Error::BadSubset("subset must contain the base point".into()));
    }
    Ok(s)
}

/// `N` as a pointed subspace, same base, points in increasing index order.
pub fn subset_space(space: &PointedMetricSpace, subset: &[usize]) -> Result<PointedMetricSpace> {
    let s = check_subset(space, subset)?;
    let base_pos = s.binary_search(&space.base()).unwrap();
    space.subspace(&s, base_pos)
}

impl WhitneySystem {
    /// Builds the cover without running the property checks.
    pub fn build(space: &PointedMetricSpace, subset: &[usize], doubling_threshold: usize) -> Result<Self> {
        let subset = check_subset(space, subset)?;
        let n = space.len();
        let mut in_subset = vec![false; n];
        for &i in &subset {
            in_subset[i] = true;
        }
        let dist_n: Vec<f64> = (0..n).map(|x| space.dist_to_set(x, &subset)).collect();
        let outside: Vec<usize> = (0..n).filter(|&x| !in_subset[x]).collect();

        let mut scales: Vec<i32> = outside.iter().map(|&x| dyadic_scale(dist_n[x])).collect();
        scales.sort_unstable();
        scales.dedup();

        let mut indices = Vec::new();
        for &sc in &scales {
            let radius = 2f64.powi(sc);
            let net = space.maximal_separated_net(&subset, radius)?;
            let mut cells: Vec<Vec<usize>> = vec![Vec::new(); net.len()];
            for &x in outside.iter().filter(|&&x| dyadic_scale(dist_n[x]) == sc) {
                // first nearest net point in stored order
                let mut best = 0;
                for k in 1..net.len() {
                    if space.d(x, net[k]) < space.d(x, net[best]) {
                        best = k;
                    }
                }
                cells[best].push(x);
            }
            let half = 2f64.powi(sc - 1);
            for (k, cell) in cells.into_iter().enumerate() {
                if cell.is_empty() {
                    continue;
                }
                let nbhd: Vec<usize> =
                    outside.iter().copied().filter(|&x| space.dist_to_set(x, &cell) < half).collect();
                indices.push(WhitneyIndex { y: net[k], scale: sc, cell, nbhd });
            }
        }

        let mut phi = Vec::with_capacity(indices.len());
        let mut active = vec![Vec::new(); n];
        for (i, idx) in indices.iter().enumerate() {
            let mut inside = vec![false; n];
            for &x in &idx.nbhd {
                inside[x] = true;
            }
            // the complement always contains N, so it is never empty
            let comp: Vec<usize> = (0..n).filter(|&z| !inside[z]).collect();
            let row: Vec<f64> = (0..n).map(|x| if inside[x] { space.dist_to_set(x, &comp) } else { 0.0 }).collect();
            for x in 0..n {
                if row[x] > 0.0 {
                    active[x].push(i);
                }
            }
            phi.push(row);
        }

        let nsub = subset_space(space, &subset)?;
        let d_hat = nsub.doubling_constant_upper(doubling_threshold).value;
        Ok(WhitneySystem { space: space.clone(), subset, in_subset, dist_n, indices, phi, active, d_hat })
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn in_subset(&self, x: usize) -> bool {
        self.in_subset[x]
    }

    pub fn dist_to_subset(&self, x: usize) -> f64 {
        self.dist_n[x]
    }

    pub fn indices(&self) -> &[WhitneyIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn phi(&self, i: usize, x: usize) -> f64 {
        self.phi[i][x]
    }

    pub fn big_phi(&self, x: usize) -> f64 {
        self.active[x].iter().map(|&i| self.phi[i][x]).sum()
    }

    /// Nonzero `(i, ψ_i(x))` for `x ∉ N`.
    pub fn psi(&self, x: usize) -> Vec<(usize, f64)> {
        let total = self.big_phi(x);
        self.active[x].iter().map(|&i| (i, self.phi[i][x] / total)).collect()
    }

    /// Greedy doubling bound `D̂` of `N`.
    pub fn d_hat(&self) -> usize {
        self.d_hat
    }

    /// `K = 3 max(D̂, 2)^4`.
    pub fn overlap_bound(&self) -> f64 {
        3.0 * (self.d_hat.max(2) as f64).powi(4)
    }

    /// Exhaustive checks of the four cover properties and of `Φ`.
    pub fn check(&self) -> WhitneyReport {
        let n = self.space.len();
        let outside: Vec<usize> = (0..n).filter(|&x| !self.in_subset[x]).collect();
        let k = self.overlap_bound();

        let mut h1 = PropertyCheck::new();
        for (i, idx) in self.indices.iter().enumerate() {
            let ok_y = self.in_subset[idx.y];
            for &x in &idx.nbhd {
                let ratio = self.space.d(idx.y, x) / (7.0 * self.dist_n[x]);
                h1.record(ratio, ok_y && ratio <= 1.0 + CHECK_TOL, (x, i));
            }
        }

        let mut h2 = PropertyCheck::new();
        let mut counts = vec![0usize; n];
        for idx in &self.indices {
            for &x in &idx.nbhd {
                counts[x] += 1;
            }
        }
        let overlap_max = outside.iter().map(|&x| counts[x]).max().unwrap_or(0);
        let mut overlap_histogram = vec![0usize; overlap_max + 1];
        for &x in &outside {
            overlap_histogram[counts[x]] += 1;
            h2.record(counts[x] as f64 / k, counts[x] >= 1 && counts[x] as f64 <= k, (x, counts[x]));
        }

        let mut h3 = PropertyCheck::new();
        for (i, idx) in self.indices.iter().enumerate() {
            let mut inside = vec![false; n];
            for &x in &idx.nbhd {
                inside[x] = true;
            }
            for &x in &outside {
                let v = self.phi[i][x];
                if v < 0.0 || (v > 0.0 && !inside[x]) {
                    h3.record(f64::INFINITY, false, (x, i));
                }
            }
            for (a, &x) in outside.iter().enumerate() {
                for &y in &outside[a + 1..] {
                    let ratio = (self.phi[i][x] - self.phi[i][y]).abs() / self.space.d(x, y);
                    h3.record(ratio, ratio <= 1.0 + CHECK_TOL, (x, y));
                }
            }
        }

        let mut h4 = PropertyCheck::new();
        let mut lower = PropertyCheck::new();
        for &x in &outside {
            let best = self.active[x].iter().map(|&i| self.phi[i][x]).fold(0.0, f64::max);
            let target = self.dist_n[x] / 4.0;
            let ratio = if best > 0.0 { target / best } else { f64::INFINITY };
            h4.record(ratio, best > target, (x, 0));
            let total = self.big_phi(x);
            let ratio = if total > 0.0 { target / total } else { f64::INFINITY };
            lower.record(ratio, total >= target * (1.0 - CHECK_TOL), (x, 0));
        }

        let mut lip = PropertyCheck::new();
        let totals: Vec<f64> = (0..n).map(|x| self.big_phi(x)).collect();
        for (a, &x) in outside.iter().enumerate() {
            for &y in &outside[a + 1..] {
                let ratio = (totals[x] - totals[y]).abs() / (2.0 * k * self.space.d(x, y));
                lip.record(ratio, ratio <= 1.0 + CHECK_TOL, (x, y));
            }
        }

        let mut scales: Vec<i32> = self.indices.iter().map(|i| i.scale).collect();
        scales.dedup();
        WhitneyReport {
            h1,
            h2,
            h3,
            h4,
            big_phi_lipschitz: lip,
            big_phi_lower: lower,
            overlap_max,
            overlap_histogram,
            d_hat: self.d_hat,
            k_bound: k,
            indices: self.indices.len(),
            scales,
        }
    }
}

/// Builds the cover and fails with `InternalInvariantBroken` if a property check fails.
pub fn whitney_cover(space: &PointedMetricSpace, subset: &[usize]) -> Result<(WhitneySystem, WhitneyReport)> {
    let sys = WhitneySystem::build(space, subset, DOUBLING_EXACT_THRESHOLD)?;
    let rep = sys.check();
    if !rep.pass() {
        return Err(Error::InternalInvariantBroken(format!("cover properties failed: {rep:?}")));
    }
    Ok((sys, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn grid(n: i32) -> PointedMetricSpace {
        let mut pts = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                pts.push(vec![i as f64, j as f64]);
            }
        }
        PointedMetricSpace::build(pts, NormKind::Sup, 1.0, 0).unwrap()
    }

    #[test]
    fn scales() {
        assert_eq!(dyadic_scale(1.0), 0);
        assert_eq!(dyadic_scale(3.999), 1);
        assert_eq!(dyadic_scale(4.0), 2);
        assert_eq!(dyadic_scale(0.3), -2);
    }

    #[test]
    fn full_subset_gives_empty_system() {
        let s = grid(2);
        let all: Vec<usize> = (0..s.len()).collect();
        let (sys, rep) = whitney_cover(&s, &all).unwrap();
        assert!(sys.is_empty());
        assert!(rep.pass());
    }

    #[test]
    fn base_only_subset() {
        let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let s = PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap();
        let (sys, rep) = whitney_cover(&s, &[0]).unwrap();
        assert!(sys.indices().iter().all(|i| i.y == 0));
        for x in 1..8 {
            let w: f64 = sys.psi(x).iter().map(|p| p.1).sum();
            assert!((w - 1.0).abs() < 1e-12);
        }
        assert!(rep.h1.worst <= 1.0 / 7.0 + 1e-12);
    }

    #[test]
    fn half_plane_in_grid() {
        let s = grid(8);
        let subset: Vec<usize> = (0..s.len()).filter(|&i| s.point(i).unwrap()[0] <= 2.0).collect();
        let (sys, rep) = whitney_cover(&s, &subset).unwrap();
        assert!(rep.pass());
        assert!(rep.overlap_max as f64 <= sys.overlap_bound());
    }

    #[test]
    fn subset_must_hold_base() {
        let s = grid(2);
        assert!(matches!(whitney_cover(&s, &[1, 2]), Err(Error::BadSubset(_))));
    }
}
