//! Families of annuli `M*_{R^{I_n}}` selected by intervals in log scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{IntervalSpec, PointedMetricSpace};

/// Log-scale values within this distance of an interval endpoint are snapped onto it.
pub const LOG_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusFamily {
    space: PointedMetricSpace,
    radix: f64,
    intervals: Vec<(i64, IntervalSpec)>,
    /// Global indices of each part, base included, in stored order.
    members: Vec<Vec<usize>>,
    subspaces: Vec<PointedMetricSpace>,
    /// `local[n][x]`: index of global point `x` inside part `n`.
    local: Vec<Vec<Option<usize>>>,
    logs: Vec<f64>,
}

/// `log_R d(0, x)` for every point (`-∞` at the base), snapped to the given endpoints.
pub fn log_radii(space: &PointedMetricSpace, radix: f64, endpoints: &[f64]) -> Vec<f64> {
    let lr = radix.ln();
    (0..space.len())
        .map(|i| {
            let d = space.dist_to_base(i);
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            let u = d.ln() / lr;
            endpoints
                .iter()
                .filter(|e| e.is_finite())
                .find(|&&e| (u - e).abs() <= LOG_SNAP * e.abs().max(1.0))
                .copied()
                .unwrap_or(u)
        })
        .collect()
}

impl AnnulusFamily {
    /// Parts `M*_{R^{I_n}}` for `I_n` given in log scale (base of the logarithm `radix`).
    pub fn new(space: &PointedMetricSpace, radix: f64, intervals: Vec<(i64, IntervalSpec)>) -> Result<Self> {
        if !(radix > 1.0 && radix.is_finite()) {
            return Err(Error::BadParameter(format!("R = {radix} must exceed 1")));
        }
        if intervals.is_empty() {
            return Err(Error::BadFamily("no intervals".into()));
        }
        for (_, iv) in &intervals {
            iv.validate()?;
        }
        let endpoints: Vec<f64> = intervals.iter().flat_map(|(_, iv)| [iv.lo, iv.hi]).collect();
        let logs = log_radii(space, radix, &endpoints);
        let base = space.base();
        let mut members = Vec::new();
        let mut subspaces = Vec::new();
        let mut local = Vec::new();
        for (_, iv) in &intervals {
            let idx: Vec<usize> = (0..space.len()).filter(|&i| i == base || iv.contains(logs[i])).collect();
            let base_pos = idx.iter().position(|&i| i == base).unwrap();
            let mut loc = vec![None; space.len()];
            for (k, &i) in idx.iter().enumerate() {
                loc[i] = Some(k);
            }
            subspaces.push(space.subspace(&idx, base_pos)?);
            members.push(idx);
            local.push(loc);
        }
        Ok(AnnulusFamily { space: space.clone(), radix, intervals, members, subspaces, local, logs })
    }

    /// `I_n = [n·step + shift, n·step + shift + width]` for `n` in `ns`.
    pub fn shifted(
        space: &PointedMetricSpace,
        radix: f64,
        ns: std::ops::RangeInclusive<i64>,
        step: f64,
        width: f64,
        shift: f64,
    ) -> Result<Self> {
        let intervals = ns
            .map(|n| {
                let lo = n as f64 * step + shift;
                IntervalSpec::closed(lo, lo + width).map(|iv| (n, iv))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, radix, intervals)
    }

    /// The family `I_n = [n, n+2]` over the range of log radii realized by the space.
    pub fn preset_shift_two(space: &PointedMetricSpace, radix: f64) -> Result<Self> {
        let (lo, hi) = log_window(space, radix)?;
        let n0 = lo.floor() as i64 - 2;
        let n1 = hi.ceil() as i64;
        Self::shifted(space, radix, n0..=n1, 1.0, 2.0, 0.0)
    }

    /// The two-set family `{(−∞, 1/2), (0, ∞)}`.
    pub fn preset_two_set(space: &PointedMetricSpace, radix: f64) -> Result<Self> {
        Self::new(
            space,
            radix,
            vec![
                (0, IntervalSpec::open(f64::NEG_INFINITY, 0.5)?),
                (1, IntervalSpec::open(0.0, f64::INFINITY)?),
            ],
        )
    }

    pub fn space(&self) -> &PointedMetricSpace {
        &self.space
    }

    pub fn radix(&self) -> f64 {
        self.radix
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(i64, IntervalSpec)] {
        &self.intervals
    }

    pub fn id(&self, n: usize) -> i64 {
        self.intervals[n].0
    }

    pub fn members(&self, n: usize) -> &[usize] {
        &self.members[n]
    }

    pub fn subspace(&self, n: usize) -> &PointedMetricSpace {
        &self.subspaces[n]
    }

    pub fn subspaces(&self) -> &[PointedMetricSpace] {
        &self.subspaces
    }

    pub fn local_index(&self, n: usize, x: usize) -> Option<usize> {
        self.local[n][x]
    }

    /// Snapped `log_R d(0, x)`.
    pub fn log_radius(&self, x: usize) -> f64 {
        self.logs[x]
    }

    /// Nonbase points of the space lying in no part.
    pub fn uncovered(&self) -> Vec<usize> {
        let base = self.space.base();
        (0..self.space.len())
            .filter(|&x| x != base && (0..self.len()).all(|n| self.local[n][x].is_none()))
            .collect()
    }
}

/// Smallest and largest `log_R d(0, x)` over nonbase points.
pub fn log_window(space: &PointedMetricSpace, radix: f64) -> Result<(f64, f64)> {
    let logs = log_radii(space, radix, &[]);
    let finite: Vec<f64> = logs.into_iter().filter(|u| u.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::TooSmall);
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// JSON layout of a family file. Missing endpoints mean `∓∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(rename = "R")]
    pub radix: f64,
    pub intervals: Vec<FamilyInterval>,
    pub margin_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyInterval {
    pub id: i64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl FamilyFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadFamily(format!("line {}: {e}", e.line())))
    }

    pub fn interval_specs(&self) -> Result<Vec<(i64, IntervalSpec)>> {
        self.intervals
            .iter()
            .map(|iv| {
                IntervalSpec::new(
                    iv.lo.unwrap_or(f64::NEG_INFINITY),
                    iv.hi.unwrap_or(f64::INFINITY),
                    iv.lo_closed,
                    iv.hi_closed,
                )
                .map(|s| (iv.id, s))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn membership_uses_log_scale() {
        let s = line(&[0.0, 1.0, 2.0, 4.0, 8.0]);
        let f = AnnulusFamily::new(
            &s,
            2.0,
            vec![(0, IntervalSpec::left_open(0.0, 2.0).unwrap()), (1, IntervalSpec::closed(2.0, 3.0).unwrap())],
        )
        .unwrap();
        assert_eq!(f.members(0), &[0, 2, 3]);
        assert_eq!(f.members(1), &[0, 3, 4]);
        assert_eq!(f.uncovered(), vec![1]);
        assert_eq!(f.subspace(1).ids(), &[0, 3, 4]);
        assert_eq!(f.local_index(1, 4), Some(2));
    }

    #[test]
    fn snapping_at_endpoints() {
        // 10^0.3 is not exactly representable; its log must still land on the endpoint
        let s = line(&[0.0, 10f64.powf(0.3)]);
        let f = AnnulusFamily::new(&s, 10.0, vec![(0, IntervalSpec::left_open(0.0, 0.3).unwrap())]).unwrap();
        assert_eq!(f.members(0), &[0, 1]);
    }

    #[test]
    fn family_file_round_trip() {
        let text = r#"{"R": 2.0, "intervals": [{"id": 0, "lo": null, "hi": 0.5, "lo_closed": false, "hi_closed": false}], "margin_r": 0.25}"#;
        let f = FamilyFile::parse(text).unwrap();
        let specs = f.interval_specs().unwrap();
        assert_eq!(specs[0].1.lo, f64::NEG_INFINITY);
        assert!(FamilyFile::parse("{").is_err());
    }
}
