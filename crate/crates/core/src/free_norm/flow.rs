//! Exact p = 1 norm: min-cost transportation by successive shortest paths.

use super::{Edge, Exactness, FreeNormResult, Molecule};
use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;

const PATH_TOL: f64 = 1e-12;

/// Transportation-cost norm of `m` with a Kantorovich certificate.
pub fn free_norm_p1(space: &PointedMetricSpace, m: &Molecule) -> Result<FreeNormResult> {
    m.check_on(space)?;
    let scale = m.coeffs().iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        let mut r = FreeNormResult::zero(Exactness::Exact);
        r.certificate = Some(vec![0.0; space.len()]);
        return Ok(r);
    }
    let mass_tol = 1e-14 * scale;
    let pos: Vec<usize> = (0..m.len()).filter(|&i| m.coeff(i) > mass_tol).collect();
    let neg: Vec<usize> = (0..m.len()).filter(|&i| m.coeff(i) < -mass_tol).collect();
    let mut supply: Vec<f64> = pos.iter().map(|&i| m.coeff(i)).collect();
    let mut demand: Vec<f64> = neg.iter().map(|&j| -m.coeff(j)).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::BadMolecule("nonzero molecule without both signs".into()));
    }
    // absorb the rounding imbalance in the largest entry of the heavier side
    let imbalance = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    let side = if imbalance > 0.0 { &mut supply } else { &mut demand };
    let k = (0..side.len()).max_by(|&a, &b| side[a].total_cmp(&side[b])).unwrap();
    side[k] -= imbalance.abs();
    let cost: Vec<Vec<f64>> = pos.iter().map(|&i| neg.iter().map(|&j| space.d(i, j)).collect()).collect();

    let flow = transport(&supply, &demand, &cost, mass_tol)?;
    let (np, nq) = (pos.len(), neg.len());

    let mut representation = Vec::new();
    let mut value = 0.0;
    for a in 0..np {
        for b in 0..nq {
            if flow[a][b] > 0.0 {
                representation.push(Edge { tail: pos[a], head: neg[b], weight: flow[a][b] });
                value += flow[a][b] * cost[a][b];
            }
        }
    }

    // Dual potentials from Bellman-Ford on the final residual graph.
    let nodes = np + nq;
    let mut dist = vec![0.0_f64; nodes];
    for _ in 0..nodes {
        let mut changed = false;
        for a in 0..np {
            for b in 0..nq {
                let c = cost[a][b];
                if dist[a] + c < dist[np + b] - PATH_TOL {
                    dist[np + b] = dist[a] + c;
                    changed = true;
                }
                if flow[a][b] > 0.0 && dist[np + b] - c < dist[a] - PATH_TOL {
                    dist[a] = dist[np + b] - c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    // g satisfies g(i) - g(j) <= d(i, j) with equality on used arcs; extend
    // by the smallest 1-Lipschitz majorant anchored on the demand side.
    let g_neg: Vec<f64> = (0..nq).map(|b| -dist[np + b]).collect();
    let n = space.len();
    let mut cert: Vec<f64> = (0..n)
        .map(|z| (0..nq).map(|b| g_neg[b] + space.d(z, neg[b])).fold(f64::INFINITY, f64::min))
        .collect();
    let shift = cert[space.base()];
    for v in &mut cert {
        *v -= shift;
    }

    Ok(FreeNormResult { value, representation, certificate: Some(cert), exactness: Exactness::Exact })
}

/// Min-cost transportation with infinite arc capacities.
fn transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>], tol: f64) -> Result<Vec<Vec<f64>>> {
    let np = supply.len();
    let nq = demand.len();
    // node layout: 0 = source, 1..=np supply, np+1..=np+nq demand, np+nq+1 = sink
    let v = np + nq + 2;
    let sink = v - 1;
    let sup = |a: usize| 1 + a;
    let dem = |b: usize| 1 + np + b;
    let mut rs = supply.to_vec();
    let mut rd = demand.to_vec();
    let mut flow = vec![vec![0.0; nq]; np];
    let mut pot = vec![0.0_f64; v];
    let max_iter = 4 * (np + 1) * (nq + 1) + 16;

    for _ in 0..max_iter {
        if rs.iter().all(|&x| x <= tol) {
            return Ok(flow);
        }
        // dense Dijkstra on reduced costs
        let mut dist = vec![f64::INFINITY; v];
        let mut prev = vec![usize::MAX; v];
        let mut done = vec![false; v];
        dist[0] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for w in 0..v {
                if !done[w] && dist[w] < best {
                    best = dist[w];
                    u = w;
                }
            }
            if u == usize::MAX || u == sink {
                break;
            }
            done[u] = true;
            let relax = |w: usize, c: f64, dist: &mut Vec<f64>, prev: &mut Vec<usize>| {
                let rc = (c + pot[u] - pot[w]).max(0.0);
                if dist[u] + rc < dist[w] - PATH_TOL {
                    dist[w] = dist[u] + rc;
                    prev[w] = u;
                }
            };
            if u == 0 {
                for a in 0..np {
                    if rs[a] > tol {
                        relax(sup(a), 0.0, &mut dist, &mut prev);
                    }
                }
            } else if u <= np {
                let a = u - 1;
                for b in 0..nq {
                    relax(dem(b), cost[a][b], &mut dist, &mut prev);
                }
            } else {
                let b = u - 1 - np;
                for a in 0..np {
                    if flow[a][b] > 0.0 {
                        relax(sup(a), -cost[a][b], &mut dist, &mut prev);
                    }
                }
                if rd[b] > 0.0 {
                    relax(sink, 0.0, &mut dist, &mut prev);
                }
            }
        }
        if !dist[sink].is_finite() {
            if rs.iter().sum::<f64>() <= tol * (np + nq) as f64 {
                return Ok(flow);
            }
            return Err(Error::Numerical("no augmenting path with supply remaining".into()));
        }
        for w in 0..v {
            pot[w] += dist[w].min(dist[sink]);
        }
        // bottleneck along the path
        let mut path = vec![sink];
        while *path.last().unwrap() != 0 {
            path.push(prev[*path.last().unwrap()]);
        }
        path.reverse();
        let mut amount = f64::INFINITY;
        for win in path.windows(2) {
            let (x, y) = (win[0], win[1]);
            if x == 0 {
                amount = amount.min(rs[y - 1]);
            } else if y == sink {
                amount = amount.min(rd[x - 1 - np]);
            } else if x > np {
                amount = amount.min(flow[y - 1][x - 1 - np]);
            }
        }
        for win in path.windows(2) {
            let (x, y) = (win[0], win[1]);
            if x == 0 {
                rs[y - 1] -= amount;
            } else if y == sink {
                rd[x - 1 - np] -= amount;
            } else if x <= np {
                flow[x - 1][y - 1 - np] += amount;
            } else {
                let f = &mut flow[y - 1][x - 1 - np];
                *f -= amount;
                if *f <= tol {
                    *f = 0.0;
                }
            }
        }
    }
    Err(Error::Numerical("transportation solver did not converge".into()))
}
