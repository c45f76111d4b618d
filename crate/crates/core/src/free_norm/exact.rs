//! Exact norm for small spaces by enumerating spanning trees.
//!
//! The cost of a representation is concave on each orthant of the flow
//! polyhedron, so the minimum sits on a flow with forest support. Any forest
//! extends to a spanning tree by zero-flow edges, which cost nothing, and on a
//! tree the flow is forced: the edge above a node carries the total demand of
//! its subtree. Enumerating the `n^(n-2)` labelled trees is therefore exact.

use std::sync::OnceLock;

use super::{Edge, Exactness, FreeNormResult, Molecule};
use crate::error::{Error, Result};
use crate::metric::{require_p, PointedMetricSpace};

/// Largest space accepted by [`free_norm_exact_small`].
pub const FOREST_LIMIT: usize = 8;

/// Tree edges `(child, parent, subtree mask of child)` rooted at node 0.
type TreeTable = Vec<[(u8, u8, u8); FOREST_LIMIT - 1]>;

fn tables() -> &'static [OnceLock<TreeTable>; FOREST_LIMIT + 1] {
    static T: [OnceLock<TreeTable>; FOREST_LIMIT + 1] = [const { OnceLock::new() }; FOREST_LIMIT + 1];
    &T
}

fn tree_table(n: usize) -> &'static TreeTable {
    tables()[n].get_or_init(|| build_table(n))
}

fn build_table(n: usize) -> TreeTable {
    let mut out = Vec::new();
    if n <= 1 {
        out.push([(0, 0, 0); FOREST_LIMIT - 1]);
        return out;
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut seq = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % n;
            c /= n;
        }
        let edges = prufer_decode(&seq, n);
        out.push(root_tree(&edges, n));
    }
    out
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

fn root_tree(edges: &[(usize, usize)], n: usize) -> [(u8, u8, u8); FOREST_LIMIT - 1] {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![0usize];
    parent[0] = 0;
    let mut k = 0;
    while k < order.len() {
        let u = order[k];
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                order.push(w);
            }
        }
        k += 1;
    }
    let mut mask = vec![0u8; n];
    for &u in order.iter().rev() {
        mask[u] |= 1 << u;
        if u != 0 {
            let m = mask[u];
            mask[parent[u]] |= m;
        }
    }
    let mut row = [(0, 0, 0); FOREST_LIMIT - 1];
    for (slot, &u) in order.iter().skip(1).enumerate() {
        row[slot] = (u as u8, parent[u] as u8, mask[u]);
    }
    row
}

/// Exact norm of `m` in `F_p(space)` for spaces with at most [`FOREST_LIMIT`] points.
pub fn free_norm_exact_small(space: &PointedMetricSpace, m: &Molecule, p: f64) -> Result<FreeNormResult> {
    require_p(p)?;
    m.check_on(space)?;
    let n = space.len();
    if n > FOREST_LIMIT {
        return Err(Error::SizeLimit { size: n, limit: FOREST_LIMIT });
    }
    if m.is_zero() {
        return Ok(FreeNormResult::zero(Exactness::Exact));
    }
    // subset demands and their p-th powers
    let mut dem = vec![0.0_f64; 1 << n];
    for s in 1usize..(1 << n) {
        let low = s.trailing_zeros() as usize;
        dem[s] = dem[s & (s - 1)] + m.coeff(low);
    }
    let pw: Vec<f64> = dem.iter().map(|x| x.abs().powf(p)).collect();
    let mut dp = vec![0.0_f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dp[i * n + j] = space.d(i, j).powf(p);
        }
    }
    let table = tree_table(n);
    let mut best = f64::INFINITY;
    let mut best_idx = 0;
    for (t, row) in table.iter().enumerate() {
        let mut c = 0.0;
        for &(u, w, mask) in &row[..n - 1] {
            c += pw[mask as usize] * dp[u as usize * n + w as usize];
        }
        if c < best {
            best = c;
            best_idx = t;
        }
    }
    let representation = table[best_idx][..n - 1]
        .iter()
        .filter(|&&(_, _, mask)| dem[mask as usize] != 0.0)
        .map(|&(u, w, mask)| Edge { tail: u as usize, head: w as usize, weight: dem[mask as usize] })
        .collect();
    Ok(FreeNormResult { value: best.powf(1.0 / p), representation, certificate: None, exactness: Exactness::Exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_norm::check_result;
    use crate::metric::NormKind;

    fn line(xs: &[f64]) -> PointedMetricSpace {
        PointedMetricSpace::build(xs.iter().map(|&x| vec![x]).collect(), NormKind::Euclidean, 1.0, 0).unwrap()
    }

    #[test]
    fn table_sizes_follow_cayley() {
        for n in 2..=6 {
            assert_eq!(tree_table(n).len(), n.pow(n as u32 - 2));
        }
    }

    #[test]
    fn three_point_examples() {
        let s = line(&[0.0, 1.0, 2.0]);
        let m = Molecule::delta_diff(&s, 2, 1);
        let r = free_norm_exact_small(&s, &m, 0.5).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        check_result(&s, &m, 0.5, &r).unwrap();
        let m = Molecule::delta(&s, 2);
        let r = free_norm_exact_small(&s, &m, 0.5).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn consolidation_beats_splitting() {
        let s = line(&[0.0, 1.0, 1.1]);
        let m = Molecule::from_coeffs(&s, &[(1, 1.0), (2, 1.0)]).unwrap();
        let r = free_norm_exact_small(&s, &m, 0.5).unwrap();
        let expect = (0.1f64.sqrt() + 2f64.sqrt()).powi(2);
        assert!((r.value - expect).abs() < 1e-12, "{}", r.value);
        assert!((r.value - 2.994427).abs() < 1e-6);
        check_result(&s, &m, 0.5, &r).unwrap();
        let mut edges: Vec<(usize, usize, f64)> =
            r.representation.iter().map(|e| (e.tail, e.head, e.weight)).collect();
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(edges.len(), 2);
        assert_eq!((edges[0].0, edges[0].1), (1, 0));
        assert!((edges[0].2 - 2.0).abs() < 1e-12);
        assert_eq!((edges[1].0, edges[1].1), (2, 1));
    }

    #[test]
    fn size_limit() {
        let s = line(&(0..9).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(
            free_norm_exact_small(&s, &Molecule::delta(&s, 3), 0.5),
            Err(Error::SizeLimit { size: 9, limit: 8 })
        );
    }
}
