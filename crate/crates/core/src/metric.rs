//! Finite pointed metric spaces.
//!
//! A [`PointedMetricSpace`] stores a dense distance matrix together with a
//! distinguished base point. Spaces built from coordinates remember the point
//! cloud, the norm and the snowflake exponent so that geometric maps can work
//! on the underlying vectors. Every point carries a stable identifier that
//! survives restriction to subspaces; identifiers of a freshly built space are
//! `0..n`.

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for identity and zero checks.
pub const ZERO_TOL: f64 = 1e-12;
/// Relative tolerance for bound checks.
pub const BOUND_REL_TOL: f64 = 1e-9;

/// Norm used to turn coordinates into distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    Sup,
    Taxicab,
    /// Distances are given explicitly; there is no point cloud.
    Matrix,
}

impl NormKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(NormKind::Euclidean),
            "sup" => Ok(NormKind::Sup),
            "taxicab" => Ok(NormKind::Taxicab),
            "matrix" | "explicit-matrix" => Ok(NormKind::Matrix),
            other => Err(Error::BadParameter(format!("unknown norm kind {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::Euclidean => "euclidean",
            NormKind::Sup => "sup",
            NormKind::Taxicab => "taxicab",
            NormKind::Matrix => "matrix",
        }
    }

    /// Norm of a vector. Panics for [`NormKind::Matrix`], which has no vectors.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Sup => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            NormKind::Taxicab => v.iter().map(|x| x.abs()).sum(),
            NormKind::Matrix => panic!("matrix spaces have no coordinate norm"),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }
}

/// Interval of the extended half line used to select annuli `{x : d(0,x) ∈ A}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl IntervalSpec {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        let iv = IntervalSpec { lo, hi, lo_closed, hi_closed };
        iv.validate()?;
        Ok(iv)
    }

    /// The default convention `(lo, hi]`.
    pub fn left_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, hi.is_finite())
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, lo.is_finite(), hi.is_finite())
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    /// Everything strictly above zero: `(0, ∞)`.
    pub fn positive() -> Self {
        IntervalSpec { lo: 0.0, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() {
            return Err(Error::BadParameter("interval endpoint is NaN".into()));
        }
        if self.lo_closed && !self.lo.is_finite() || self.hi_closed && !self.hi.is_finite() {
            return Err(Error::BadParameter("infinite endpoints must be open".into()));
        }
        if self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed) {
            Ok(())
        } else {
            Err(Error::BadParameter(format!(
                "empty interval [{}, {}] (closed: {}, {})",
                self.lo, self.hi, self.lo_closed, self.hi_closed
            )))
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let below = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && below
    }

    /// Intersection, or `None` when it is empty.
    pub fn intersect(&self, other: &IntervalSpec) -> Option<IntervalSpec> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        IntervalSpec::new(lo, hi, lo_closed, hi_closed).ok()
    }

    /// Image under `u ↦ R^u`, turning a log-scale interval into a radius interval.
    pub fn exp_base(&self, radix: f64) -> IntervalSpec {
        IntervalSpec {
            lo: radix.powf(self.lo),
            hi: radix.powf(self.hi),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
    }
}

/// Outcome of [`PointedMetricSpace::validate_p_metric`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// Triple `(x, y, z)` minimizing `d^p(x,y) + d^p(y,z) - d^p(x,z)`.
    pub worst_triple: Option<(usize, usize, usize)>,
    pub slack: f64,
}

/// Greedy or exact cover of one ball `B(center, radius)` by balls of half the radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCover {
    pub center: usize,
    pub radius: f64,
    pub members: usize,
    pub cover_centers: Vec<usize>,
    pub exact: bool,
}

/// Upper bound for the doubling constant with the covers that witness it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingEstimate {
    pub value: usize,
    pub worst: Option<BallCover>,
    pub covers: Vec<BallCover>,
}

/// JSON layout of a space file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Option<Vec<Vec<f64>>>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub norm: NormKind,
    pub alpha: f64,
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointedMetricSpace {
    ids: Vec<usize>,
    coords: Option<Vec<Vec<f64>>>,
    norm: NormKind,
    dist: Vec<f64>,
    base: usize,
    alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("snowflake exponent {alpha} outside (0, 1]")))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("exponent p = {p} outside (0, 1]")))
    }
}

pub(crate) fn require_p(p: f64) -> Result<()> {
    check_p(p)
}

impl PointedMetricSpace {
    /// Builds a space from a point cloud: `dist[i][j] = ‖x_i - x_j‖^alpha`.
    pub fn build(coords: Vec<Vec<f64>>, norm: NormKind, alpha: f64, base: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if norm == NormKind::Matrix {
            return Err(Error::BadParameter("use from_matrix for explicit distances".into()));
        }
        let n = coords.len();
        if n == 0 {
            return Err(Error::BadParameter("space needs at least one point".into()));
        }
        if base >= n {
            return Err(Error::BadParameter(format!("base index {base} out of range")));
        }
        let dim = coords[0].len();
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::BadParameter("points have inconsistent dimensions".into()));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("non-finite coordinate".into()));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let raw = norm.distance(&coords[i], &coords[j]);
                if raw <= 0.0 {
                    return Err(Error::DuplicatePoint(i, j));
                }
                let d = raw.powf(alpha);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(PointedMetricSpace { ids: (0..n).collect(), coords: Some(coords), norm, dist, base, alpha })
    }

    /// Builds a space from an explicit symmetric matrix; `alpha` is applied entrywise.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, alpha: f64, base: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let n = matrix.len();
        if n == 0 {
            return Err(Error::BadParameter("space needs at least one point".into()));
        }
        if base >= n {
            return Err(Error::BadParameter(format!("base index {base} out of range")));
        }
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::BadParameter("distance matrix is not square".into()));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            if matrix[i][i].abs() > ZERO_TOL {
                return Err(Error::BadParameter(format!("nonzero diagonal entry at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (matrix[i][j], matrix[j][i]);
                if !a.is_finite() || (a - b).abs() > ZERO_TOL * a.abs().max(1.0) {
                    return Err(Error::BadParameter(format!("matrix not symmetric at ({i}, {j})")));
                }
                if a <= 0.0 {
                    return Err(Error::DuplicatePoint(i, j));
                }
                let d = a.powf(alpha);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(PointedMetricSpace {
            ids: (0..n).collect(),
            coords: None,
            norm: NormKind::Matrix,
            dist,
            base,
            alpha,
        })
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        match (file.points, file.matrix) {
            (Some(points), None) => Self::build(points, file.norm, file.alpha, file.base),
            (None, Some(matrix)) => Self::from_matrix(matrix, file.alpha, file.base),
            (Some(_), Some(_)) => Err(Error::BadParameter("give either points or matrix, not both".into())),
            (None, None) => Err(Error::BadParameter("space file has neither points nor matrix".into())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text)
            .map_err(|e| Error::BadParameter(format!("space JSON, line {}: {e}", e.line())))?;
        Self::from_file(file)
    }

    /// Reads one point per CSV row (no header).
    pub fn from_csv<R: Read>(reader: R, norm: NormKind, alpha: f64, base: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut coords = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::BadParameter(format!("CSV line {}: {e}", line + 1)))?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::BadParameter(format!("CSV line {}: {e}", line + 1)))?;
            coords.push(row);
        }
        Self::build(coords, norm, alpha, base)
    }

    pub fn to_file(&self) -> SpaceFile {
        match &self.coords {
            Some(c) => SpaceFile {
                points: Some(c.clone()),
                matrix: None,
                norm: self.norm,
                alpha: self.alpha,
                base: self.base,
            },
            None => {
                // Distances already carry the exponent: store them with alpha = 1.
                let n = self.len();
                let matrix = (0..n).map(|i| (0..n).map(|j| self.d(i, j)).collect()).collect();
                SpaceFile { points: None, matrix: Some(matrix), norm: NormKind::Matrix, alpha: 1.0, base: self.base }
            }
        }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn dist_to_base(&self, i: usize) -> f64 {
        self.d(self.base, i)
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> usize {
        self.ids[i]
    }

    pub fn index_of_id(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn point(&self, i: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| c[i].as_slice())
    }

    /// Distance before snowflaking, `d^(1/alpha)`.
    pub fn underlying(&self, i: usize, j: usize) -> f64 {
        if self.alpha == 1.0 {
            self.d(i, j)
        } else {
            self.d(i, j).powf(1.0 / self.alpha)
        }
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().fold(0.0_f64, |m, &d| m.max(d))
    }

    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.min(self.d(i, j));
            }
        }
        m
    }

    /// Distance from `i` to the nearest element of `set`.
    pub fn dist_to_set(&self, i: usize, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.d(i, j)).fold(f64::INFINITY, f64::min)
    }

    /// Induced subspace on `indices` (in the given order) with base `indices[base_pos]`.
    pub fn subspace(&self, indices: &[usize], base_pos: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubspace);
        }
        if base_pos >= indices.len() {
            return Err(Error::BadParameter("subspace base position out of range".into()));
        }
        let m = indices.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
            }
        }
        Ok(PointedMetricSpace {
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
            coords: self.coords.as_ref().map(|c| indices.iter().map(|&i| c[i].clone()).collect()),
            norm: self.norm,
            dist,
            base: base_pos,
            alpha: self.alpha,
        })
    }

    /// Same point set with a different base.
    pub fn with_base(&self, base: usize) -> Result<Self> {
        if base >= self.len() {
            return Err(Error::BadParameter(format!("base index {base} out of range")));
        }
        let mut s = self.clone();
        s.base = base;
        Ok(s)
    }

    /// Indices `i` with `d(0, x_i) ∈ a`, in stored order.
    pub fn annulus_indices(&self, a: &IntervalSpec) -> Vec<usize> {
        (0..self.len()).filter(|&i| a.contains(self.dist_to_base(i))).collect()
    }

    /// `M_A` (`keep_base = false`) or `M*_A = {0} ∪ M_A` (`keep_base = true`).
    pub fn restrict(&self, a: &IntervalSpec, keep_base: bool) -> Result<Self> {
        let mut keep = self.annulus_indices(a);
        if keep_base && !keep.contains(&self.base) {
            keep.push(self.base);
            keep.sort_unstable();
        }
        if keep.is_empty() {
            return Err(Error::EmptySubspace);
        }
        let base_pos = if keep_base { keep.iter().position(|&i| i == self.base).unwrap() } else { 0 };
        self.subspace(&keep, base_pos)
    }

    /// Distances multiplied by `c`; coordinates are scaled so they stay consistent.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::BadParameter(format!("scale factor {c} must be positive")));
        }
        let mut s = self.clone();
        for d in &mut s.dist {
            *d *= c;
        }
        if let Some(coords) = &mut s.coords {
            let k = c.powf(1.0 / self.alpha);
            for v in coords.iter_mut().flatten() {
                *v *= k;
            }
        }
        Ok(s)
    }

    /// Checks the p-triangle inequality `d^p(x,z) ≤ d^p(x,y) + d^p(y,z)` on all triples.
    pub fn validate_p_metric(&self, p: f64) -> Result<ValidityReport> {
        check_p(p)?;
        let n = self.len();
        let dp: Vec<f64> = self.dist.iter().map(|d| d.powf(p)).collect();
        let mut slack = f64::INFINITY;
        let mut worst = None;
        for x in 0..n {
            for y in 0..n {
                if y == x {
                    continue;
                }
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    let s = dp[x * n + y] + dp[y * n + z] - dp[x * n + z];
                    if s < slack {
                        slack = s;
                        worst = Some((x, y, z));
                    }
                }
            }
        }
        if worst.is_none() {
            slack = 0.0;
        }
        Ok(ValidityReport { valid: slack >= -ZERO_TOL, worst_triple: worst, slack })
    }

    /// Greedy maximal `r`-separated subset of `subset`, scanned in the given order.
    pub fn maximal_separated_net(&self, subset: &[usize], r: f64) -> Result<Vec<usize>> {
        if subset.is_empty() {
            return Err(Error::BadParameter("net of an empty subset".into()));
        }
        if r <= 0.0 || r.is_nan() {
            return Err(Error::BadParameter(format!("net radius {r} must be positive")));
        }
        let mut net: Vec<usize> = Vec::new();
        for &x in subset {
            if net.iter().all(|&y| self.d(x, y) >= r) {
                net.push(x);
            }
        }
        Ok(net)
    }

    /// Upper bound `D̂` for the doubling constant.
    ///
    /// Every closed ball `B(x, r)` with `r` a realized distance from `x` is
    /// covered by balls of radius `r/2`: greedily (centers picked among the
    /// ball's points in stored order), or by an exact minimum set cover over
    /// all centers of the space when the ball has at most `exact_threshold`
    /// points. Radii between realized distances give the same ball with a
    /// larger covering radius, so they never need more balls.
    pub fn doubling_constant_upper(&self, exact_threshold: usize) -> DoublingEstimate {
        let n = self.len();
        let mut covers = Vec::new();
        let mut value = 1usize;
        let mut worst: Option<BallCover> = None;
        for x in 0..n {
            let mut radii: Vec<f64> = (0..n).filter(|&y| y != x).map(|y| self.d(x, y)).collect();
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            for &r in &radii {
                let ball: Vec<usize> = (0..n).filter(|&y| self.d(x, y) <= r).collect();
                let cover = if ball.len() <= exact_threshold.min(64) {
                    BallCover {
                        center: x,
                        radius: r,
                        members: ball.len(),
                        cover_centers: self.exact_cover(&ball, r / 2.0),
                        exact: true,
                    }
                } else {
                    BallCover {
                        center: x,
                        radius: r,
                        members: ball.len(),
                        cover_centers: self.greedy_cover(&ball, r / 2.0),
                        exact: false,
                    }
                };
                if cover.cover_centers.len() > value || worst.is_none() {
                    value = value.max(cover.cover_centers.len());
                    if worst.as_ref().is_none_or(|w| cover.cover_centers.len() > w.cover_centers.len()) {
                        worst = Some(cover.clone());
                    }
                }
                covers.push(cover);
            }
        }
        DoublingEstimate { value, worst, covers }
    }

    /// Greedy cover of `ball` by radius-`half` balls centered at ball points.
    pub fn greedy_cover(&self, ball: &[usize], half: f64) -> Vec<usize> {
        let mut covered = vec![false; ball.len()];
        let mut centers = Vec::new();
        for a in 0..ball.len() {
            if covered[a] {
                continue;
            }
            centers.push(ball[a]);
            for b in 0..ball.len() {
                if self.d(ball[a], ball[b]) <= half {
                    covered[b] = true;
                }
            }
        }
        centers
    }

    /// Minimum number of radius-`half` balls (any center in the space) covering `ball`.
    pub fn exact_cover(&self, ball: &[usize], half: f64) -> Vec<usize> {
        assert!(ball.len() <= 64);
        let full: u64 = if ball.len() == 64 { u64::MAX } else { (1u64 << ball.len()) - 1 };
        // candidate sets, deduplicated, keeping the first center that realizes each
        let mut seen = BTreeSet::new();
        let mut cands: Vec<(u64, usize)> = Vec::new();
        for c in 0..self.len() {
            let mut mask = 0u64;
            for (b, &y) in ball.iter().enumerate() {
                if self.d(c, y) <= half {
                    mask |= 1 << b;
                }
            }
            if mask != 0 && seen.insert(mask) {
                cands.push((mask, c));
            }
        }
        // drop candidates dominated by another
        let masks: Vec<u64> = cands.iter().map(|c| c.0).collect();
        cands.retain(|&(m, _)| !masks.iter().any(|&o| o != m && o & m == m));

        let mut best = self.greedy_cover(ball, half);
        let mut chosen = Vec::new();
        fn search(cands: &[(u64, usize)], full: u64, covered: u64, chosen: &mut Vec<usize>, best: &mut Vec<usize>) {
            if covered == full {
                if chosen.len() < best.len() {
                    *best = chosen.clone();
                }
                return;
            }
            if chosen.len() + 1 >= best.len() {
                return;
            }
            let first = (!covered & full).trailing_zeros();
            for &(m, c) in cands {
                if m & (1 << first) != 0 {
                    chosen.push(c);
                    search(cands, full, covered | m, chosen, best);
                    chosen.pop();
                }
            }
        }
        search(&cands, full, 0, &mut chosen, &mut best);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(line(&[0.0, 1.0]).d(0, 1), 1.0);
        let s = PointedMetricSpace::build(vec![vec![0.0], vec![4.0]], NormKind::Euclidean, 0.5, 0).unwrap();
        assert_eq!(s.d(0, 1), 2.0);
        let grid: Vec<Vec<f64>> =
            (0..3).flat_map(|i| (0..3).map(move |j| vec![i as f64, j as f64])).collect();
        let g = PointedMetricSpace::build(grid, NormKind::Sup, 1.0, 0).unwrap();
        // (0,0) is index 0, (2,1) is index 7
        assert_eq!(g.d(0, 7), 2.0);
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            PointedMetricSpace::build(vec![vec![1.0], vec![1.0]], NormKind::Euclidean, 1.0, 0),
            Err(Error::DuplicatePoint(0, 1))
        );
        assert!(matches!(
            PointedMetricSpace::build(vec![vec![0.0], vec![1.0]], NormKind::Euclidean, 1.5, 0),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            PointedMetricSpace::build(vec![vec![0.0], vec![1.0]], NormKind::Euclidean, 0.0, 0),
            Err(Error::BadParameter(_))
        ));
        assert!(PointedMetricSpace::build(vec![vec![0.0]], NormKind::Euclidean, 1.0, 3).is_err());
    }

    #[test]
    fn p_metric_examples() {
        let m = PointedMetricSpace::from_matrix(
            vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
            1.0,
            0,
        )
        .unwrap();
        let r = m.validate_p_metric(1.0).unwrap();
        assert!(!r.valid);
        assert_eq!(r.worst_triple, Some((0, 1, 2)));
        assert!((r.slack + 1.0).abs() < 1e-15);
        let boundary = 2f64.ln() / 3f64.ln();
        let r = m.validate_p_metric(boundary).unwrap();
        assert!(r.valid, "slack {}", r.slack);
        assert!(r.slack.abs() < 1e-12);
        assert!(line(&[0.0, 1.0, 2.5]).validate_p_metric(0.3).unwrap().valid);
    }

    #[test]
    fn restrict_examples() {
        let s = line(&[0.0, 1.0, 2.0, 5.0]);
        let r = s.restrict(&IntervalSpec::left_open(1.0, 3.0).unwrap(), true).unwrap();
        assert_eq!(r.ids(), &[0, 2]);
        assert_eq!(r.base(), 0);
        let all = s.restrict(&IntervalSpec::positive(), true).unwrap();
        assert_eq!(all.ids(), s.ids());
        let single = s.restrict(&IntervalSpec::closed(5.0, 5.0).unwrap(), false).unwrap();
        assert_eq!(single.ids(), &[3]);
        assert_eq!(single.base(), 0);
        assert_eq!(s.restrict(&IntervalSpec::open(6.0, 7.0).unwrap(), false), Err(Error::EmptySubspace));
    }

    #[test]
    fn interval_rules() {
        assert!(IntervalSpec::new(1.0, 1.0, true, false).is_err());
        assert!(IntervalSpec::new(2.0, 1.0, true, true).is_err());
        assert!(IntervalSpec::new(1.0, 1.0, true, true).is_ok());
        let a = IntervalSpec::left_open(0.0, 2.0).unwrap();
        let b = IntervalSpec::closed(2.0, 3.0).unwrap();
        let c = a.intersect(&b).unwrap();
        assert!(c.contains(2.0) && !c.contains(2.0001));
        assert!(IntervalSpec::open(0.0, 1.0).unwrap().intersect(&b).is_none());
    }

    #[test]
    fn net_examples() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.maximal_separated_net(&[0, 1, 2, 3], 2.0).unwrap(), vec![0, 2]);
        assert_eq!(s.maximal_separated_net(&[0, 1, 2, 3], 0.5).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(s.maximal_separated_net(&[2], 10.0).unwrap(), vec![2]);
        assert!(s.maximal_separated_net(&[], 1.0).is_err());
    }

    #[test]
    fn doubling_examples() {
        assert_eq!(line(&[0.0]).doubling_constant_upper(10).value, 1);
        let n = 5;
        let eq = PointedMetricSpace::from_matrix(
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect(),
            1.0,
            0,
        )
        .unwrap();
        let est = eq.doubling_constant_upper(10);
        assert_eq!(est.value, n);
        assert!(est.covers.iter().all(|c| c.exact));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let s = PointedMetricSpace::from_csv("0,0\n3,4\n".as_bytes(), NormKind::Euclidean, 1.0, 0).unwrap();
        assert_eq!(s.d(0, 1), 5.0);
        let text = serde_json::to_string(&s.to_file()).unwrap();
        assert_eq!(PointedMetricSpace::from_json(&text).unwrap(), s);
        assert!(PointedMetricSpace::from_csv("0,x\n".as_bytes(), NormKind::Euclidean, 1.0, 0).is_err());
    }
}
