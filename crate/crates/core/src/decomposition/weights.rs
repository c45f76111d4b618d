//! Piecewise-linear partitions of unity on the real line.

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of samples inserted inside each segment between breakpoints.
pub const REFINE: usize = 64;

/// Trapezoid weights `φ_n` on open intervals `(a_n, b_n)` and `ψ_n = φ_n / Φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSystem {
    intervals: Vec<(f64, f64)>,
    r: f64,
    k: usize,
    window: (f64, f64),
    /// Divide by `r` instead of `Φ`: the disjoint-family variant with `ψ = 1` on the cores.
    unnormalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub max_sum_error: f64,
    pub lipschitz: Vec<f64>,
    pub lipschitz_bound: f64,
    pub range_ok: bool,
    pub support_ok: bool,
    pub grid_points: usize,
}

/// Largest number of the open intervals sharing a point.
pub fn overlap(intervals: &[(f64, f64)]) -> usize {
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * intervals.len());
    for &(a, b) in intervals {
        events.push((a, 1));
        events.push((b, -1));
    }
    // closings sort before openings at the same coordinate
    events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut cur = 0i32;
    let mut best = 0i32;
    for (_, e) in events {
        cur += e;
        best = best.max(cur);
    }
    best as usize
}

/// First point of `window` outside every closed core `[a + r, b − r]`.
fn coverage_gap(intervals: &[(f64, f64)], r: f64, window: (f64, f64)) -> Option<f64> {
    let cores: Vec<(f64, f64)> =
        intervals.iter().map(|&(a, b)| (a + r, b - r)).filter(|&(s, e)| s <= e).collect();
    let mut cur = window.0;
    loop {
        let reach = cores
            .iter()
            .filter(|&&(s, e)| s <= cur && e >= cur)
            .map(|&(_, e)| e)
            .fold(f64::NEG_INFINITY, f64::max);
        if reach == f64::NEG_INFINITY {
            return Some(cur);
        }
        if reach >= window.1 {
            return None;
        }
        if reach == cur {
            // only touching cores; the point just past `cur` needs its own core
            let next = cores.iter().map(|&(s, _)| s).filter(|&s| s > cur).fold(window.1, f64::min);
            return Some(0.5 * (cur + next));
        }
        cur = reach;
    }
}

/// Trapezoid of slope 1 and height `r`, zero outside `(a, b)`.
#[inline]
pub fn trapezoid(a: f64, b: f64, r: f64, u: f64) -> f64 {
    if u <= a || u >= b {
        0.0
    } else {
        (u - a).min(b - u).min(r)
    }
}

/// Builds `ψ_n = φ_n / Φ` for a `k`-overlapping family whose cores cover `window`.
pub fn build_hat_partition(intervals: &[(f64, f64)], r: f64, k: usize, window: (f64, f64)) -> Result<WeightSystem> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("margin r = {r} must be positive")));
    }
    if k == 0 {
        return Err(Error::BadParameter("overlap bound k must be at least 1".into()));
    }
    if !(window.0 <= window.1) || !window.0.is_finite() || !window.1.is_finite() {
        return Err(Error::BadParameter(format!("bad window {window:?}")));
    }
    for &(a, b) in intervals {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::BadFamily(format!("interval ({a}, {b}) is empty")));
        }
    }
    let o = overlap(intervals);
    if o > k {
        return Err(Error::BadFamily(format!("family is {o}-overlapping, declared k = {k}")));
    }
    if let Some(u) = coverage_gap(intervals, r, window) {
        return Err(Error::CoverageGap(u));
    }
    Ok(WeightSystem { intervals: intervals.to_vec(), r, k, window, unnormalized: false })
}

/// Weights `ψ_n = φ_n / r` on pairwise disjoint intervals: equal to 1 on the
/// cores `[a_n + r, b_n − r]`, zero outside `(a_n, b_n)`, `1/r`-Lipschitz.
pub fn build_disjoint_bumps(intervals: &[(f64, f64)], r: f64) -> Result<WeightSystem> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("margin r = {r} must be positive")));
    }
    for &(a, b) in intervals {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::BadFamily(format!("interval ({a}, {b}) is empty")));
        }
    }
    if overlap(intervals) > 1 {
        return Err(Error::BadFamily("intervals are not pairwise disjoint".into()));
    }
    let lo = intervals.iter().map(|i| i.0).filter(|x| x.is_finite()).fold(0.0, f64::min);
    let hi = intervals.iter().map(|i| i.1).filter(|x| x.is_finite()).fold(0.0, f64::max);
    Ok(WeightSystem { intervals: intervals.to_vec(), r, k: 1, window: (lo, hi), unnormalized: true })
}

impl WeightSystem {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn phi(&self, n: usize, u: f64) -> f64 {
        let (a, b) = self.intervals[n];
        trapezoid(a, b, self.r, u)
    }

    pub fn big_phi(&self, u: f64) -> f64 {
        (0..self.len()).map(|n| self.phi(n, u)).sum()
    }

    pub fn psi(&self, n: usize, u: f64) -> f64 {
        let f = self.phi(n, u);
        if f == 0.0 {
            return 0.0;
        }
        if self.unnormalized {
            f / self.r
        } else {
            f / self.big_phi(u)
        }
    }

    /// Lipschitz bound of each `ψ_n`: `3k/r`, or `1/r` for disjoint bumps.
    pub fn lipschitz_bound(&self) -> f64 {
        if self.unnormalized {
            1.0 / self.r
        } else {
            3.0 * self.k as f64 / self.r
        }
    }

    /// Breakpoints inside the window refined with [`REFINE`] samples per segment.
    pub fn grid(&self) -> Vec<f64> {
        let (w0, w1) = self.window;
        let mut bp = vec![w0, w1];
        for &(a, b) in &self.intervals {
            for x in [a, a + self.r, b - self.r, b] {
                if x.is_finite() && x > w0 && x < w1 {
                    bp.push(x);
                }
            }
        }
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        let mut grid = Vec::with_capacity(bp.len() * (REFINE + 1));
        for w in bp.windows(2) {
            let (s, e) = (w[0], w[1]);
            for i in 0..=REFINE {
                grid.push(s + (e - s) * i as f64 / (REFINE + 1) as f64);
            }
        }
        grid.push(*bp.last().unwrap());
        grid
    }

    /// Sum, range, support and Lipschitz checks on the refined grid.
    pub fn measure(&self) -> PartitionReport {
        let grid = self.grid();
        let mut max_sum_error: f64 = 0.0;
        let mut range_ok = true;
        let mut support_ok = true;
        let mut lipschitz = vec![0.0_f64; self.len()];
        let mut prev: Option<(f64, Vec<f64>)> = None;
        for &u in &grid {
            let vals: Vec<f64> = (0..self.len()).map(|n| self.psi(n, u)).collect();
            if !self.unnormalized {
                max_sum_error = max_sum_error.max((vals.iter().sum::<f64>() - 1.0).abs());
            }
            for (n, &v) in vals.iter().enumerate() {
                let (a, b) = self.intervals[n];
                range_ok &= (0.0..=1.0).contains(&v);
                support_ok &= (v > 0.0) == (u > a && u < b);
            }
            if let Some((pu, pv)) = &prev {
                let du = u - pu;
                if du > 0.0 {
                    for n in 0..self.len() {
                        lipschitz[n] = lipschitz[n].max((vals[n] - pv[n]).abs() / du);
                    }
                }
            }
            prev = Some((u, vals));
        }
        PartitionReport {
            max_sum_error,
            lipschitz,
            lipschitz_bound: self.lipschitz_bound(),
            range_ok,
            support_ok,
            grid_points: grid.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_interval_is_constant_one() {
        let w = build_hat_partition(&[(f64::NEG_INFINITY, f64::INFINITY)], 1.0, 1, (-5.0, 5.0)).unwrap();
        for u in [-5.0, 0.0, 3.3, 5.0] {
            assert_eq!(w.psi(0, u), 1.0);
        }
    }

    #[test]
    fn two_intervals_split_evenly_in_the_middle() {
        let w = build_hat_partition(&[(0.0, 4.0), (2.0, 6.0)], 1.0, 2, (1.0, 5.0)).unwrap();
        assert_eq!(w.psi(0, 3.0), 0.5);
        assert_eq!(w.psi(1, 3.0), 0.5);
        let rep = w.measure();
        assert!(rep.max_sum_error < 1e-12);
        assert!(rep.lipschitz.iter().all(|&l| l <= 6.0 + 1e-9));
        assert!(rep.range_ok && rep.support_ok);
    }

    #[test]
    fn gaps_and_overlap_are_rejected() {
        assert_eq!(build_hat_partition(&[(0.0, 2.0), (3.0, 6.0)], 0.5, 1, (0.5, 5.5)), Err(Error::CoverageGap(2.5)));
        assert!(matches!(
            build_hat_partition(&[(0.0, 4.0), (1.0, 5.0), (2.0, 6.0)], 0.5, 2, (1.0, 5.0)),
            Err(Error::BadFamily(_))
        ));
        // touching cores leave no gap
        assert!(build_hat_partition(&[(0.0, 3.0), (1.0, 6.0)], 1.0, 2, (1.0, 5.0)).is_ok());
    }

    #[test]
    fn overlap_counts_open_intervals() {
        assert_eq!(overlap(&[(0.0, 1.0), (1.0, 2.0)]), 1);
        assert_eq!(overlap(&[(0.0, 2.0), (1.0, 3.0), (1.5, 1.7)]), 3);
    }

    #[test]
    fn disjoint_bumps() {
        let w = build_disjoint_bumps(&[(-0.5, 2.5), (2.5, 6.0)], 0.5).unwrap();
        assert_eq!(w.psi(0, 1.0), 1.0);
        assert_eq!(w.psi(1, 2.5), 0.0);
        assert_eq!(w.psi(1, 2.75), 0.5);
        assert!(build_disjoint_bumps(&[(0.0, 2.0), (1.0, 3.0)], 0.5).is_err());
    }
}
