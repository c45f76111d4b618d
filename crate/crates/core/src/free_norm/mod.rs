//! Norms in the Lipschitz-free p-space `F_p(M)` of a finite pointed space.
//!
//! The norm of a molecule `m` is the infimum of `(Σ |λ_j|^p d^p(x_j, y_j))^(1/p)`
//! over representations `m = Σ λ_j (δ(x_j) − δ(y_j))`.

mod exact;
mod flow;
mod lipschitz;
mod local;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{require_p, PointedMetricSpace, ZERO_TOL};

pub use exact::{free_norm_exact_small, FOREST_LIMIT};
pub use flow::free_norm_p1;
pub use lipschitz::{
    lipschitz_constant, lipschitz_molecule_map, lipschitz_over_pairs, lipschitz_sum_map, lipschitz_vector_map,
    sum_difference, LipschitzResult,
};
pub use local::{free_norm_upper, UpperConfig};

/// Finitely supported zero-sum coefficients, stored densely over the space.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    coeffs: Vec<f64>,
}

impl Molecule {
    pub fn zero(n: usize) -> Self {
        Molecule { coeffs: vec![0.0; n] }
    }

    /// `δ(x)`: coefficient 1 at `x`, balanced at the base.
    pub fn delta(space: &PointedMetricSpace, x: usize) -> Self {
        let mut m = Self::zero(space.len());
        if x != space.base() {
            m.coeffs[x] = 1.0;
            m.coeffs[space.base()] = -1.0;
        }
        m
    }

    /// `δ(x) − δ(y)`.
    pub fn delta_diff(space: &PointedMetricSpace, x: usize, y: usize) -> Self {
        let mut m = Self::delta(space, x);
        m.add_scaled(&Self::delta(space, y), -1.0);
        m
    }

    /// `Σ a_i δ(x_i)`; entries at the base are ignored since `δ(0) = 0`.
    pub fn from_coeffs(space: &PointedMetricSpace, coeffs: &[(usize, f64)]) -> Result<Self> {
        let n = space.len();
        let mut m = Self::zero(n);
        for &(i, a) in coeffs {
            if i >= n {
                return Err(Error::BadMolecule(format!("point index {i} out of range")));
            }
            if !a.is_finite() {
                return Err(Error::BadMolecule(format!("coefficient at {i} is not finite")));
            }
            if i != space.base() {
                m.coeffs[i] += a;
                m.coeffs[space.base()] -= a;
            }
        }
        Ok(m)
    }

    /// Full coefficient vector, which must sum to zero.
    pub fn from_dense(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::BadMolecule("non-finite coefficient".into()));
        }
        let s: f64 = coeffs.iter().sum();
        let scale = coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        if s.abs() > ZERO_TOL * scale {
            return Err(Error::BadMolecule(format!("coefficients sum to {s}, not 0")));
        }
        Ok(Molecule { coeffs })
    }

    /// Parses `{"coeffs": {"<index>": value}}`.
    pub fn from_json(space: &PointedMetricSpace, text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            coeffs: BTreeMap<String, f64>,
        }
        let raw: Raw = serde_json::from_str(text)
            .map_err(|e| Error::BadMolecule(format!("line {}: {e}", e.line())))?;
        let mut pairs = Vec::new();
        for (k, v) in raw.coeffs {
            let i: usize = k.parse().map_err(|_| Error::BadMolecule(format!("bad point index {k:?}")))?;
            pairs.push((i, v));
        }
        Self::from_coeffs(space, &pairs)
    }

    pub fn to_json(&self, space: &PointedMetricSpace) -> serde_json::Value {
        let map: BTreeMap<String, f64> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|&(i, &c)| i != space.base() && c != 0.0)
            .map(|(i, &c)| (i.to_string(), c))
            .collect();
        serde_json::json!({ "coeffs": map })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Indices with nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| self.coeffs[i] != 0.0).collect()
    }

    pub fn add_scaled(&mut self, other: &Molecule, c: f64) {
        assert_eq!(self.len(), other.len(), "molecules live on different spaces");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn scaled(&self, c: f64) -> Molecule {
        Molecule { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn sub(&self, other: &Molecule) -> Molecule {
        let mut m = self.clone();
        m.add_scaled(other, -1.0);
        m
    }

    /// `Σ m(x) f(x)`.
    pub fn pair(&self, f: &[f64]) -> f64 {
        self.coeffs.iter().zip(f).map(|(a, b)| a * b).sum()
    }

    fn check_on(&self, space: &PointedMetricSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::BadMolecule(format!(
                "molecule has {} coefficients, space has {} points",
                self.len(),
                space.len()
            )));
        }
        Ok(())
    }
}

/// One term `weight · (δ(tail) − δ(head))` of a representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeNormResult {
    pub value: f64,
    pub representation: Vec<Edge>,
    /// Dual witness at p = 1: a 1-Lipschitz function vanishing at the base.
    pub certificate: Option<Vec<f64>>,
    pub exactness: Exactness,
}

impl FreeNormResult {
    pub(crate) fn zero(exactness: Exactness) -> Self {
        FreeNormResult { value: 0.0, representation: Vec::new(), certificate: None, exactness }
    }

    /// `Σ |λ_j|^p d^p(x_j, y_j)` of the stored representation.
    pub fn representation_cost(&self, space: &PointedMetricSpace, p: f64) -> f64 {
        self.representation
            .iter()
            .map(|e| e.weight.abs().powf(p) * space.d(e.tail, e.head).powf(p))
            .sum()
    }

    /// Largest coordinate error between the molecule and the representation.
    pub fn reproduction_error(&self, m: &Molecule) -> f64 {
        let mut v = m.coeffs().to_vec();
        for e in &self.representation {
            v[e.tail] -= e.weight;
            v[e.head] += e.weight;
        }
        v.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("result serializes")
    }
}

/// Which solver computes a norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Transportation solver; p must be 1.
    Flow,
    /// Tree enumeration; space size at most [`FOREST_LIMIT`].
    Exact,
    /// Local search, returns an upper bound.
    Upper(UpperConfig),
    /// Flow at p = 1, enumeration up to `exact_limit` points, local search beyond.
    Auto { exact_limit: usize, upper: UpperConfig },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Auto { exact_limit: FOREST_LIMIT, upper: UpperConfig::default() }
    }
}

impl Backend {
    /// True when the backend is exact for this space and exponent.
    pub fn is_exact_for(&self, n: usize, p: f64) -> bool {
        match *self {
            Backend::Flow | Backend::Exact => true,
            Backend::Upper(_) => false,
            Backend::Auto { exact_limit, .. } => p == 1.0 || n <= exact_limit.min(FOREST_LIMIT),
        }
    }
}

/// Norm of `m` in `F_p(space)` using `backend`.
pub fn free_norm(space: &PointedMetricSpace, m: &Molecule, p: f64, backend: &Backend) -> Result<FreeNormResult> {
    match *backend {
        Backend::Flow => {
            if p != 1.0 {
                return Err(Error::BadParameter(format!("flow solver needs p = 1, got {p}")));
            }
            free_norm_p1(space, m)
        }
        Backend::Exact => free_norm_exact_small(space, m, p),
        Backend::Upper(cfg) => free_norm_upper(space, m, p, &cfg),
        Backend::Auto { exact_limit, upper } => {
            require_p(p)?;
            if p == 1.0 {
                free_norm_p1(space, m)
            } else if space.len() <= exact_limit.min(FOREST_LIMIT) {
                free_norm_exact_small(space, m, p)
            } else {
                free_norm_upper(space, m, p, &upper)
            }
        }
    }
}

/// Element of an ℓ_p-sum: molecules on a list of subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SumElement {
    pub p: f64,
    /// `(subspace id, molecule on that subspace)`.
    pub parts: Vec<(usize, Molecule)>,
}

/// `(Σ ‖part‖^p)^(1/p)`.
pub fn lp_sum_norm(subspaces: &[PointedMetricSpace], e: &SumElement, backend: &Backend) -> Result<f64> {
    require_p(e.p)?;
    let mut acc = 0.0;
    for (id, m) in &e.parts {
        let space = subspaces
            .get(*id)
            .ok_or_else(|| Error::BadParameter(format!("sum element names unknown subspace {id}")))?;
        if m.is_zero() {
            continue;
        }
        acc += free_norm(space, m, e.p, backend)?.value.powf(e.p);
    }
    Ok(acc.powf(1.0 / e.p))
}

/// Solver-independent checks of a result: reproduction, cost, certificate.
pub fn check_result(space: &PointedMetricSpace, m: &Molecule, p: f64, res: &FreeNormResult) -> Result<()> {
    let scale = m.coeffs().iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let err = res.reproduction_error(m);
    if err > 1e-10 * scale {
        return Err(Error::InternalInvariantBroken(format!("representation misses molecule by {err:e}")));
    }
    let cost = res.representation_cost(space, p);
    let vp = res.value.powf(p);
    if (cost - vp).abs() > 1e-9 * vp.max(ZERO_TOL) {
        return Err(Error::InternalInvariantBroken(format!("cost {cost} vs value^p {vp}")));
    }
    if let Some(f) = &res.certificate {
        if f[space.base()].abs() > ZERO_TOL {
            return Err(Error::InternalInvariantBroken("certificate does not vanish at base".into()));
        }
        let n = space.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = space.d(i, j);
                if (f[i] - f[j]).abs() > d * (1.0 + 1e-9) + ZERO_TOL {
                    return Err(Error::InternalInvariantBroken(format!("certificate not 1-Lipschitz on ({i}, {j})")));
                }
            }
        }
        let pairing = m.pair(f);
        if (pairing - res.value).abs() > 1e-9 * res.value.max(ZERO_TOL) {
            return Err(Error::InternalInvariantBroken(format!("duality gap: {pairing} vs {}", res.value)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn molecule_completion() {
        let s = line(&[0.0, 1.0, 2.0]);
        let m = Molecule::from_coeffs(&s, &[(1, 2.0), (2, -0.5)]).unwrap();
        assert_eq!(m.coeffs(), &[-1.5, 2.0, -0.5]);
        assert!(Molecule::from_dense(vec![1.0, 0.0, 0.0]).is_err());
        assert!(Molecule::delta(&s, 0).is_zero());
        let j = Molecule::from_json(&s, r#"{"coeffs": {"1": 2.0, "2": -0.5}}"#).unwrap();
        assert_eq!(j, m);
        assert_eq!(Molecule::from_json(&s, &m.to_json(&s).to_string()).unwrap(), m);
    }

    #[test]
    fn sum_norm_examples() {
        let s = line(&[0.0, 1.0]);
        let d = Molecule::delta(&s, 1);
        let subs = vec![s.clone(), s.clone()];
        let one = SumElement { p: 1.0, parts: vec![(0, d.clone())] };
        assert_eq!(lp_sum_norm(&subs, &one, &Backend::default()).unwrap(), 1.0);
        let two = SumElement { p: 1.0, parts: vec![(0, d.clone()), (1, d.clone())] };
        assert_eq!(lp_sum_norm(&subs, &two, &Backend::default()).unwrap(), 2.0);
        let half = SumElement { p: 0.5, parts: vec![(0, d.clone()), (1, d)] };
        assert!((lp_sum_norm(&subs, &half, &Backend::default()).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flow_backend_rejects_small_p() {
        let s = line(&[0.0, 1.0]);
        assert!(free_norm(&s, &Molecule::delta(&s, 1), 0.5, &Backend::Flow).is_err());
    }
}
