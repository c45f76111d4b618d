//! Upper bounds for p < 1 by local search over trees rooted at the base.
//!
//! A state is a tree on the support of the molecule, the base and possibly
//! some extra (Steiner) points. The flow on the edge above a node is forced to
//! be the demand of its subtree, so each state is a feasible representation
//! and its cost is an upper bound for `‖m‖^p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Exactness, FreeNormResult, Molecule};
use crate::error::Result;
use crate::metric::{require_p, PointedMetricSpace};

const IMPROVE_TOL: f64 = 1e-12;

/// Search budget for [`free_norm_upper`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpperConfig {
    /// Maximum number of improvement sweeps per restart.
    pub sweeps: usize,
    /// Perturbed restarts after the first descent.
    pub restarts: usize,
    pub seed: u64,
    /// Extra points tried when merging two siblings.
    pub steiner_candidates: usize,
}

impl Default for UpperConfig {
    fn default() -> Self {
        UpperConfig { sweeps: 60, restarts: 3, seed: 0, steiner_candidates: 4 }
    }
}

#[derive(Clone)]
struct Tree<'a> {
    space: &'a PointedMetricSpace,
    p: f64,
    nodes: Vec<usize>,
    parent: Vec<usize>,
    demand: Vec<f64>,
    sub: Vec<f64>,
    in_tree: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> Tree<'a> {
    fn star(space: &'a PointedMetricSpace, m: &Molecule, p: f64) -> Self {
        let base = space.base();
        let mut nodes = vec![base];
        nodes.extend(m.support().into_iter().filter(|&i| i != base));
        let t = nodes.len();
        let demand: Vec<f64> = nodes.iter().map(|&i| m.coeff(i)).collect();
        let mut in_tree = vec![false; space.len()];
        for &v in &nodes {
            in_tree[v] = true;
        }
        let mut tree = Tree {
            space,
            p,
            nodes,
            parent: vec![0; t],
            demand,
            sub: vec![0.0; t],
            in_tree,
            stamp: vec![0; t],
            epoch: 0,
        };
        tree.recompute();
        tree
    }

    #[inline]
    fn dp(&self, a: usize, b: usize) -> f64 {
        self.space.d(self.nodes[a], self.nodes[b]).powf(self.p)
    }

    #[inline]
    fn edge_cost(&self, f: f64, a: usize, b: usize) -> f64 {
        if f == 0.0 {
            0.0
        } else {
            f.abs().powf(self.p) * self.dp(a, b)
        }
    }

    fn recompute(&mut self) {
        self.sub.copy_from_slice(&self.demand);
        for v in 1..self.nodes.len() {
            let d = self.demand[v];
            let mut u = v;
            while u != 0 {
                u = self.parent[u];
                self.sub[u] += d;
            }
        }
        self.stamp.resize(self.nodes.len(), 0);
    }

    fn cost(&self) -> f64 {
        (1..self.nodes.len()).map(|v| self.edge_cost(self.sub[v], v, self.parent[v])).sum()
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Cost change of moving the subtree of `v` under `w`, or `None` if `w` lies in it.
    fn reparent_delta(&mut self, v: usize, w: usize) -> Option<f64> {
        let a = self.parent[v];
        if w == a || w == v {
            return None;
        }
        let e = self.next_epoch();
        let mut u = a;
        loop {
            self.stamp[u] = e;
            if u == 0 {
                break;
            }
            u = self.parent[u];
        }
        let s = self.sub[v];
        let mut delta = 0.0;
        let mut u = w;
        while self.stamp[u] != e {
            if u == v {
                return None;
            }
            let par = self.parent[u];
            delta += self.edge_cost(self.sub[u] + s, u, par) - self.edge_cost(self.sub[u], u, par);
            u = par;
        }
        let lca = u;
        let mut u = a;
        while u != lca {
            let par = self.parent[u];
            delta += self.edge_cost(self.sub[u] - s, u, par) - self.edge_cost(self.sub[u], u, par);
            u = par;
        }
        delta += self.edge_cost(s, v, w) - self.edge_cost(s, v, a);
        Some(delta)
    }

    fn add_node(&mut self, global: usize, parent: usize) -> usize {
        self.nodes.push(global);
        self.parent.push(parent);
        self.demand.push(0.0);
        self.sub.push(0.0);
        self.stamp.push(0);
        self.in_tree[global] = true;
        self.nodes.len() - 1
    }

    fn remove_leaf(&mut self, k: usize) {
        debug_assert!(k != 0 && self.demand[k] == 0.0);
        let last = self.nodes.len() - 1;
        self.in_tree[self.nodes[k]] = false;
        self.nodes.swap_remove(k);
        self.parent.swap_remove(k);
        self.demand.swap_remove(k);
        self.sub.swap_remove(k);
        self.stamp.swap_remove(k);
        if k != last {
            for par in self.parent.iter_mut() {
                if *par == last {
                    *par = k;
                }
            }
        }
    }

    fn children_count(&self) -> Vec<usize> {
        let mut c = vec![0; self.nodes.len()];
        for v in 1..self.nodes.len() {
            c[self.parent[v]] += 1;
        }
        c
    }

    /// Drops Steiner points with no child and splices those with one child.
    fn prune_steiner(&mut self) {
        loop {
            let kids = self.children_count();
            let mut changed = false;
            for k in (1..self.nodes.len()).rev() {
                if self.demand[k] != 0.0 {
                    continue;
                }
                if kids[k] == 0 {
                    self.remove_leaf(k);
                    changed = true;
                    break;
                }
                if kids[k] == 1 {
                    let child = (1..self.nodes.len()).find(|&v| self.parent[v] == k).unwrap();
                    let up = self.parent[k];
                    let f = self.sub[child];
                    let delta =
                        self.edge_cost(f, child, up) - self.edge_cost(f, child, k) - self.edge_cost(f, k, up);
                    if delta <= 0.0 {
                        self.parent[child] = up;
                        self.recompute();
                        self.remove_leaf(k);
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
            self.recompute();
        }
    }

    fn reparent_sweep(&mut self) -> bool {
        let mut improved = false;
        let t = self.nodes.len();
        for v in 1..t {
            let mut best = (-IMPROVE_TOL, usize::MAX);
            for w in 0..t {
                if let Some(d) = self.reparent_delta(v, w) {
                    if d < best.0 {
                        best = (d, w);
                    }
                }
            }
            if best.1 != usize::MAX {
                self.parent[v] = best.1;
                self.recompute();
                improved = true;
            }
        }
        improved
    }

    /// Cost of the tree given by `parent` over the current nodes.
    fn cost_of(&self, parent: &[usize]) -> f64 {
        let mut sub = self.demand.clone();
        for x in 1..parent.len() {
            let d = self.demand[x];
            let mut u = x;
            while u != 0 {
                u = parent[u];
                sub[u] += d;
            }
        }
        (1..parent.len()).map(|x| self.edge_cost(sub[x], x, parent[x])).sum()
    }

    /// Cost after swapping `v` with its parent `a`: `v` takes `a`'s place and adopts `a`.
    fn rotate_cost(&self, v: usize) -> Option<f64> {
        let a = self.parent[v];
        if a == 0 {
            return None;
        }
        let mut parent = self.parent.clone();
        parent[v] = parent[a];
        parent[a] = v;
        Some(self.cost_of(&parent))
    }

    /// Replaces `a` by an outside point as the hub of `a` and its children.
    fn hub_sweep(&mut self, candidates: usize) -> bool {
        if candidates == 0 {
            return false;
        }
        let n = self.space.len();
        let current = self.cost();
        let kids = self.children_count();
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 1..self.nodes.len() {
            if kids[a] == 0 {
                continue;
            }
            let ga = self.nodes[a];
            let mut cands: Vec<(f64, usize)> =
                (0..n).filter(|&s| !self.in_tree[s]).map(|s| (self.space.d(ga, s), s)).collect();
            let k = candidates.min(cands.len());
            if k == 0 {
                continue;
            }
            cands.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            cands.truncate(k);
            cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            for &(_, s) in &cands {
                let mut trial = self.clone();
                let k = trial.add_node(s, trial.parent[a]);
                for v in 1..k {
                    if trial.parent[v] == a {
                        trial.parent[v] = k;
                    }
                }
                trial.parent[a] = k;
                let c = trial.cost_of(&trial.parent);
                if c < current - IMPROVE_TOL && best.is_none_or(|b| c < b.0) {
                    best = Some((c, a, s));
                }
            }
        }
        if let Some((_, a, s)) = best {
            let k = self.add_node(s, self.parent[a]);
            for v in 1..k {
                if self.parent[v] == a {
                    self.parent[v] = k;
                }
            }
            self.parent[a] = k;
            self.recompute();
            true
        } else {
            false
        }
    }

    fn rotate_sweep(&mut self) -> bool {
        let mut improved = false;
        for v in 1..self.nodes.len() {
            let current = self.cost();
            if let Some(c) = self.rotate_cost(v) {
                if c < current - IMPROVE_TOL {
                    let a = self.parent[v];
                    self.parent[v] = self.parent[a];
                    self.parent[a] = v;
                    self.recompute();
                    improved = true;
                }
            }
        }
        improved
    }

    fn merge_sweep(&mut self, candidates: usize) -> bool {
        if candidates == 0 {
            return false;
        }
        let n = self.space.len();
        let t = self.nodes.len();
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for v1 in 1..t {
            for v2 in (v1 + 1)..t {
                let a = self.parent[v1];
                if self.parent[v2] != a {
                    continue;
                }
                let (g1, g2) = (self.nodes[v1], self.nodes[v2]);
                let mut cands: Vec<(f64, usize)> = (0..n)
                    .filter(|&s| !self.in_tree[s])
                    .map(|s| (self.space.d(g1, s).powf(self.p) + self.space.d(g2, s).powf(self.p), s))
                    .collect();
                let k = candidates.min(cands.len());
                if k == 0 {
                    continue;
                }
                cands.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                let (s1, s2) = (self.sub[v1], self.sub[v2]);
                let before = self.edge_cost(s1, v1, a) + self.edge_cost(s2, v2, a);
                let ga = self.nodes[a];
                for &(_, s) in &cands[..k] {
                    let dps = |x: usize| self.space.d(x, s).powf(self.p);
                    let after = s1.abs().powf(self.p) * dps(g1)
                        + s2.abs().powf(self.p) * dps(g2)
                        + (s1 + s2).abs().powf(self.p) * dps(ga);
                    let d = after - before;
                    if d < -IMPROVE_TOL && best.is_none_or(|b| d < b.0) {
                        best = Some((d, v1, v2, s));
                    }
                }
            }
        }
        if let Some((_, v1, v2, s)) = best {
            let a = self.parent[v1];
            let k = self.add_node(s, a);
            self.parent[v1] = k;
            self.parent[v2] = k;
            self.recompute();
            true
        } else {
            false
        }
    }

    fn descend(&mut self, cfg: &UpperConfig) {
        for _ in 0..cfg.sweeps.max(1) {
            let a = self.reparent_sweep();
            let b = self.rotate_sweep();
            let c = self.merge_sweep(cfg.steiner_candidates);
            let h = self.hub_sweep(cfg.steiner_candidates);
            self.prune_steiner();
            if !a && !b && !c && !h {
                break;
            }
        }
    }

    fn perturb(&mut self, rng: &mut ChaCha8Rng) {
        let t = self.nodes.len();
        if t < 3 {
            return;
        }
        for _ in 0..(t / 3).max(1) {
            let v = rng.gen_range(1..t);
            for _ in 0..8 {
                let w = rng.gen_range(0..t);
                if self.reparent_delta(v, w).is_some() {
                    self.parent[v] = w;
                    self.recompute();
                    break;
                }
            }
        }
    }

    fn result(&self) -> FreeNormResult {
        let representation: Vec<Edge> = (1..self.nodes.len())
            .filter(|&v| self.sub[v] != 0.0)
            .map(|v| Edge { tail: self.nodes[v], head: self.nodes[self.parent[v]], weight: self.sub[v] })
            .collect();
        let cost: f64 = representation
            .iter()
            .map(|e| e.weight.abs().powf(self.p) * self.space.d(e.tail, e.head).powf(self.p))
            .sum();
        FreeNormResult {
            value: cost.powf(1.0 / self.p),
            representation,
            certificate: None,
            exactness: Exactness::UpperBound,
        }
    }
}

/// Feasible representation found by local search; its value bounds the norm from above.
pub fn free_norm_upper(space: &PointedMetricSpace, m: &Molecule, p: f64, cfg: &UpperConfig) -> Result<FreeNormResult> {
    require_p(p)?;
    m.check_on(space)?;
    if m.is_zero() {
        return Ok(FreeNormResult::zero(Exactness::UpperBound));
    }
    let mut best = Tree::star(space, m, p);
    best.descend(cfg);
    let mut best_cost = best.cost();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        let mut t = best.clone();
        t.perturb(&mut rng);
        t.descend(cfg);
        let c = t.cost();
        if c < best_cost - IMPROVE_TOL {
            best = t;
            best_cost = c;
        }
    }
    Ok(best.result())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_norm::{check_result, free_norm_exact_small};
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn delta_stays_direct() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let m = Molecule::delta(&s, 3);
        let r = free_norm_upper(&s, &m, 0.5, &UpperConfig::default()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
        assert_eq!(r.exactness, Exactness::UpperBound);
    }

    #[test]
    fn finds_consolidation() {
        let s = line(&[0.0, 1.0, 1.1]);
        let m = Molecule::from_coeffs(&s, &[(1, 1.0), (2, 1.0)]).unwrap();
        let r = free_norm_upper(&s, &m, 0.5, &UpperConfig::default()).unwrap();
        let exact = free_norm_exact_small(&s, &m, 0.5).unwrap();
        assert!((r.value - exact.value).abs() <= 1e-9 * exact.value);
        check_result(&s, &m, 0.5, &r).unwrap();
    }

    #[test]
    fn steiner_point_is_used() {
        // three unit vectors around a hub, the base far above the hub
        let (c, h) = (0.5, 3f64.sqrt() / 2.0);
        let coords = vec![
            vec![0.0, 0.0, 100.0],
            vec![c, h, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![c, -h, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        let s = PointedMetricSpace::build(coords, NormKind::Euclidean, 1.0, 0).unwrap();
        let m = Molecule::from_coeffs(&s, &[(1, 1.0), (2, 1.0), (3, 1.0)]).unwrap();
        let r = free_norm_upper(&s, &m, 0.9, &UpperConfig::default()).unwrap();
        let exact = free_norm_exact_small(&s, &m, 0.9).unwrap();
        assert!(exact.representation.iter().any(|e| e.tail == 4));
        assert!(r.representation.iter().any(|e| e.tail == 4));
        assert!((r.value - exact.value).abs() <= 1e-9 * exact.value);
        check_result(&s, &m, 0.9, &r).unwrap();
    }

    #[test]
    fn deterministic_for_seed() {
        let s = line(&[0.0, 1.0, 1.5, 2.0, 4.0, 4.2]);
        let m = Molecule::from_dense(vec![-1.0, 0.5, -0.25, 1.0, -0.75, 0.5]).unwrap();
        let cfg = UpperConfig { seed: 7, ..UpperConfig::default() };
        assert_eq!(free_norm_upper(&s, &m, 0.3, &cfg).unwrap(), free_norm_upper(&s, &m, 0.3, &cfg).unwrap());
    }
}
