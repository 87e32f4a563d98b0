//! Coarse graining: good-block classification and the induced block field,
//! plus Monte Carlo estimates of block goodness and box-to-box connection.

use crate::boundary::BoundaryPartition;
use crate::error::{Error, Result};
use crate::geometry::{build_box_graph, BlockFamily, GraphTopology, LatticeBox, Pt};
use crate::sampler::{run_es, BondConfig, ChainParams};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockState {
    Good,
    Bad,
}

/// A block is good when its restriction has a unique cluster touching all
/// `2d` faces and no other cluster carries a path of length `k`.
///
/// The path condition is operationalized as: every vertex whose open
/// eccentricity inside the block reaches `k` lies in the crossing cluster.
pub fn classify_block(g: &GraphTopology, omega: &BondConfig, block: &LatticeBox) -> BlockState {
    let dim = g.dim;
    let k = block.radius;
    let verts: Vec<u32> = block.points().iter().filter_map(|p| g.index_of(p)).collect();
    debug_assert_eq!(verts.len() as u64, block.vertex_count(), "block must lie inside the graph");
    let mut local_id = std::collections::HashMap::new();
    for (i, &v) in verts.iter().enumerate() {
        local_id.insert(v, i as u32);
    }
    let mut uf = UnionFind::new(verts.len());
    let mut local_adj: Vec<Vec<u32>> = vec![Vec::new(); verts.len()];
    for (i, &v) in verts.iter().enumerate() {
        for &(bid, w) in g.incident(v) {
            if !omega.open(bid as usize) {
                continue;
            }
            if let Some(&j) = local_id.get(&w) {
                if (i as u32) < j {
                    uf.union(i as u32, j);
                    local_adj[i].push(j);
                    local_adj[j as usize].push(i as u32);
                }
            }
        }
    }
    // Face masks per cluster root: bit (2*axis + side).
    let full_mask: u32 = (1 << (2 * dim)) - 1;
    let mut mask = vec![0u32; verts.len()];
    let mut size = vec![0u32; verts.len()];
    for (i, &v) in verts.iter().enumerate() {
        let r = uf.find(i as u32) as usize;
        size[r] += 1;
        let p = g.point(v);
        for axis in 0..dim {
            let delta = p.0[axis] - block.center.0[axis];
            if delta == -k {
                mask[r] |= 1 << (2 * axis);
            }
            if delta == k {
                mask[r] |= 1 << (2 * axis + 1);
            }
        }
    }
    let crossing: Vec<usize> = (0..verts.len())
        .filter(|&r| uf.find(r as u32) as usize == r && mask[r] == full_mask)
        .collect();
    if crossing.len() != 1 {
        // No crossing cluster, or two of them (each then carries a long
        // path outside the other).
        return BlockState::Bad;
    }
    let cross_root = crossing[0] as u32;
    // Any other cluster with more than k vertices might carry a length-k
    // path; check its eccentricities exactly.
    let k = k as u32;
    let mut dist = vec![u32::MAX; verts.len()];
    let mut queue = Vec::new();
    for i in 0..verts.len() as u32 {
        if uf.find(i) == cross_root {
            continue;
        }
        let root = uf.find(i) as usize;
        if size[root] <= k {
            continue;
        }
        // BFS from i within the cluster, early exit at depth k.
        dist.fill(u32::MAX);
        queue.clear();
        queue.push(i);
        dist[i as usize] = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            let du = dist[u as usize];
            if du >= k {
                return BlockState::Bad;
            }
            for &w in &local_adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push(w);
                }
            }
        }
    }
    BlockState::Good
}

/// Block states over a family, recomputable from the configuration.
#[derive(Debug, Clone)]
pub struct BlockField {
    pub family: BlockFamily,
    pub states: Vec<BlockState>,
}

pub fn block_field(g: &GraphTopology, omega: &BondConfig, family: &BlockFamily) -> BlockField {
    let states =
        (0..family.len()).map(|i| classify_block(g, omega, &family.block(i))).collect();
    BlockField { family: family.clone(), states }
}

/// A Monte Carlo probability estimate with its binomial standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_hits(hits: usize, n: usize) -> Self {
        let mean = hits as f64 / n as f64;
        Estimate { mean, stderr: (mean * (1.0 - mean) / n as f64).sqrt(), n }
    }
}

fn sampling_params(replicas: usize, seed: u64) -> ChainParams {
    ChainParams { burn_in: 200, sweeps: replicas * 2, thin: 2, seed, ..Default::default() }
}

/// Probability that the centered block `Lambda_k` is good inside
/// `Lambda_2k`, estimated under free and wired boundaries.
pub fn estimate_superconnect(
    dim: usize,
    k: i32,
    p: f64,
    replicas: usize,
    seed: u64,
) -> Result<(Estimate, Estimate)> {
    let g = build_box_graph(dim, 2 * k, Pt::zero())?;
    let block = LatticeBox::new(dim, Pt::zero(), k);
    let mut out = Vec::new();
    for (which, xi) in
        [BoundaryPartition::free(), BoundaryPartition::wired(&g)].into_iter().enumerate()
    {
        let mut hits = 0usize;
        let mut n = 0usize;
        let params = ChainParams { chain_id: which as u64, ..sampling_params(replicas, seed) };
        run_es(&g, p, &xi, &params, &mut |_, _, omega| {
            n += 1;
            if classify_block(&g, omega, &block) == BlockState::Good {
                hits += 1;
            }
        })?;
        out.push(Estimate::from_hits(hits, n));
    }
    Ok((out[0], out[1]))
}

/// Variant that only tests the crossing-cluster condition (an increasing
/// event, so its probability is monotone in p).
pub fn estimate_crossing_only(
    dim: usize,
    k: i32,
    p: f64,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    let g = build_box_graph(dim, 2 * k, Pt::zero())?;
    let block = LatticeBox::new(dim, Pt::zero(), k);
    let verts: Vec<u32> = block.points().iter().map(|p| g.index_of(p).unwrap()).collect();
    let xi = BoundaryPartition::free();
    let mut hits = 0usize;
    let mut n = 0usize;
    let params = sampling_params(replicas, seed);
    run_es(&g, p, &xi, &params, &mut |_, _, omega| {
        n += 1;
        if crossing_cluster_exists(&g, omega, &block, &verts) {
            hits += 1;
        }
    })?;
    Ok(Estimate::from_hits(hits, n))
}

fn crossing_cluster_exists(
    g: &GraphTopology,
    omega: &BondConfig,
    block: &LatticeBox,
    verts: &[u32],
) -> bool {
    let dim = g.dim;
    let k = block.radius;
    let mut local_id = std::collections::HashMap::new();
    for (i, &v) in verts.iter().enumerate() {
        local_id.insert(v, i as u32);
    }
    let mut uf = UnionFind::new(verts.len());
    for (i, &v) in verts.iter().enumerate() {
        for &(bid, w) in g.incident(v) {
            if omega.open(bid as usize) {
                if let Some(&j) = local_id.get(&w) {
                    uf.union(i as u32, j);
                }
            }
        }
    }
    let full: u32 = (1 << (2 * dim)) - 1;
    let mut mask = vec![0u32; verts.len()];
    for (i, &v) in verts.iter().enumerate() {
        let r = uf.find(i as u32) as usize;
        let p = g.point(v);
        for axis in 0..dim {
            let delta = p.0[axis] - block.center.0[axis];
            if delta == -k {
                mask[r] |= 1 << (2 * axis);
            }
            if delta == k {
                mask[r] |= 1 << (2 * axis + 1);
            }
        }
        if mask[r] == full {
            return true;
        }
    }
    false
}

/// Probability that two corner boxes of radius `n` connect inside
/// `Lambda_N` under free boundary conditions.
pub fn estimate_box_connection(
    dim: usize,
    n: i32,
    big_n: i32,
    p: f64,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    if n > big_n {
        return Err(Error::Geometry("inner radius exceeds outer".into()));
    }
    let g = build_box_graph(dim, big_n, Pt::zero())?;
    let off = big_n - n;
    let cx = Pt::new(&vec![off; dim]);
    let cy = Pt::new(&vec![-off; dim]);
    let bx = LatticeBox::new(dim, cx, n);
    let by = LatticeBox::new(dim, cy, n);
    let xs: Vec<u32> = bx.points().iter().map(|p| g.index_of(p).unwrap()).collect();
    let ys: Vec<u32> = by.points().iter().map(|p| g.index_of(p).unwrap()).collect();
    // Overlapping boxes trivially connect.
    if xs.iter().any(|v| ys.contains(v)) {
        return Ok(Estimate { mean: 1.0, stderr: 0.0, n: replicas });
    }
    let xi = BoundaryPartition::free();
    let mut hits = 0usize;
    let mut n_samples = 0usize;
    let mut mark = vec![false; g.vertex_count()];
    let params = sampling_params(replicas, seed);
    run_es(&g, p, &xi, &params, &mut |_, _, omega| {
        n_samples += 1;
        let map = crate::sampler::clusters(&g, omega, &xi);
        mark.fill(false);
        for &v in &xs {
            mark[map.root(v) as usize] = true;
        }
        if ys.iter().any(|&v| mark[map.root(v) as usize]) {
            hits += 1;
        }
    })?;
    Ok(Estimate::from_hits(hits, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{blocks as block_grid, pt2};
    use crate::rng::CounterRng;

    #[test]
    fn all_open_good_all_closed_bad() {
        for (dim, k) in [(2usize, 2i32), (3, 1), (2, 4)] {
            let g = build_box_graph(dim, 2 * k, Pt::zero()).unwrap();
            let block = LatticeBox::new(dim, Pt::zero(), k);
            assert_eq!(classify_block(&g, &BondConfig::all_open(&g), &block), BlockState::Good);
            assert_eq!(classify_block(&g, &BondConfig::all_closed(&g), &block), BlockState::Bad);
        }
    }

    #[test]
    fn stray_long_path_spoils_goodness() {
        let k = 3;
        let g = build_box_graph(2, k, Pt::zero()).unwrap();
        let block = LatticeBox::new(2, Pt::zero(), k);
        let mut omega = BondConfig::all_closed(&g);
        // Open everything strictly below the top two rows.
        for (bid, b) in g.bundles().iter().enumerate() {
            let pu = g.point(b.u);
            let pv = g.point(b.v);
            if pu.0[1] >= k - 1 || pv.0[1] >= k - 1 {
                continue;
            }
            omega.set(bid, true);
        }
        // Without a crossing cluster this is bad (top face untouched).
        assert_eq!(classify_block(&g, &omega, &block), BlockState::Bad);
        // Reattach the x = 0 column so one cluster touches all faces.
        for (bid, b) in g.bundles().iter().enumerate() {
            let pu = g.point(b.u);
            let pv = g.point(b.v);
            if pu.0[0] == 0 && pv.0[0] == 0 {
                omega.set(bid, true);
            }
        }
        assert_eq!(classify_block(&g, &omega, &block), BlockState::Good);
        // A detached open path of length exactly k in the top-right corner.
        let path = [pt2(1, 3), pt2(2, 3), pt2(3, 3), pt2(3, 2)];
        for w in path.windows(2) {
            let u = g.index_of(&w[0]).unwrap();
            let v = g.index_of(&w[1]).unwrap();
            let bid = g
                .incident(u)
                .iter()
                .find(|&&(_, o)| o == v)
                .map(|&(b, _)| b as usize)
                .unwrap();
            omega.set(bid, true);
        }
        assert_eq!(classify_block(&g, &omega, &block), BlockState::Bad);
    }

    #[test]
    fn classification_is_pure_function_of_restriction() {
        let g = build_box_graph(2, 4, Pt::zero()).unwrap();
        let fam = block_grid(&LatticeBox::new(2, Pt::zero(), 4), 2).unwrap();
        let rng = CounterRng::new(17);
        for trial in 0..50u64 {
            let mut omega = BondConfig::all_closed(&g);
            for e in 0..g.bundle_count() {
                omega.set(e, rng.uniform(&[trial, e as u64]) < 0.6);
            }
            let field = block_field(&g, &omega, &fam);
            // Flip every bundle outside block 0 and re-classify block 0.
            let b0 = fam.block(0);
            let inside = g.bundles_in_box(&b0);
            let mut tweaked = omega.clone();
            for e in 0..g.bundle_count() {
                if !inside[e] {
                    tweaked.set(e, !tweaked.open(e));
                }
            }
            assert_eq!(classify_block(&g, &tweaked, &b0), field.states[0]);
            // Cache coherence: recomputation matches.
            let again = block_field(&g, &omega, &fam);
            assert_eq!(again.states, field.states);
        }
    }

    #[test]
    fn degenerate_p_estimates() {
        let (f, w) = estimate_superconnect(2, 2, 1.0, 50, 9).unwrap();
        assert_eq!(f.mean, 1.0);
        assert_eq!(w.mean, 1.0);
        let (f0, _) = estimate_superconnect(2, 2, 0.0, 50, 9).unwrap();
        assert_eq!(f0.mean, 0.0);
    }

    #[test]
    fn box_connection_degenerate() {
        let e = estimate_box_connection(2, 3, 3, 0.3, 10, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        let e = estimate_box_connection(2, 1, 4, 0.0, 20, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }
}
