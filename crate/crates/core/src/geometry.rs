//! Boxes, block grids and graph substrate on `Z^d`.
//!
//! Graphs are finite multigraphs: parallel edges are stored as bundles
//! `(u, v, multiplicity)` and never expanded. A bundle of `m` unit edges
//! behaves as a single edge of coupling `m*beta` for spins/currents and as
//! a single edge with `p_eff = 1 - (1-p)^m` for FK percolation.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Maximum supported lattice dimension.
pub const MAX_DIM: usize = 6;

/// A lattice point. Coordinates beyond the ambient dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pt(pub [i32; MAX_DIM]);

impl Pt {
    pub fn new(coords: &[i32]) -> Self {
        let mut c = [0i32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Pt(c)
    }

    pub fn zero() -> Self {
        Pt([0; MAX_DIM])
    }

    #[inline]
    pub fn shifted(&self, axis: usize, delta: i32) -> Pt {
        let mut c = self.0;
        c[axis] += delta;
        Pt(c)
    }

    #[inline]
    pub fn linf(&self, other: &Pt, dim: usize) -> i32 {
        (0..dim).map(|i| (self.0[i] - other.0[i]).abs()).max().unwrap_or(0)
    }

    #[inline]
    pub fn l1(&self, other: &Pt, dim: usize) -> i32 {
        (0..dim).map(|i| (self.0[i] - other.0[i]).abs()).sum()
    }
}

pub fn pt2(x: i32, y: i32) -> Pt {
    Pt::new(&[x, y])
}

pub fn pt3(x: i32, y: i32, z: i32) -> Pt {
    Pt::new(&[x, y, z])
}

/// The box `center + [-radius, radius]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    pub dim: usize,
    pub center: Pt,
    pub radius: i32,
}

impl LatticeBox {
    pub fn new(dim: usize, center: Pt, radius: i32) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM && radius >= 0);
        LatticeBox { dim, center, radius }
    }

    #[inline]
    pub fn contains(&self, p: &Pt) -> bool {
        (0..self.dim).all(|i| (p.0[i] - self.center.0[i]).abs() <= self.radius)
    }

    /// Vertices with a lattice neighbor outside the box.
    #[inline]
    pub fn on_boundary(&self, p: &Pt) -> bool {
        debug_assert!(self.contains(p));
        (0..self.dim).any(|i| (p.0[i] - self.center.0[i]).abs() == self.radius)
    }

    pub fn vertex_count(&self) -> u64 {
        (2 * self.radius as u64 + 1).pow(self.dim as u32)
    }

    /// `l_inf` distance from a point to the box (0 when inside).
    pub fn linf_dist(&self, p: &Pt) -> i32 {
        (0..self.dim)
            .map(|i| ((p.0[i] - self.center.0[i]).abs() - self.radius).max(0))
            .max()
            .unwrap_or(0)
    }

    /// All points of the box in lexicographic order.
    pub fn points(&self) -> Vec<Pt> {
        let side = 2 * self.radius + 1;
        let mut out = Vec::with_capacity(self.vertex_count() as usize);
        let mut idx = vec![0i32; self.dim];
        loop {
            let mut c = [0i32; MAX_DIM];
            for i in 0..self.dim {
                c[i] = self.center.0[i] - self.radius + idx[i];
            }
            out.push(Pt(c));
            let mut j = self.dim;
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
            }
        }
    }
}

/// An edge bundle: `mult` parallel unit edges between `u` and `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bundle {
    pub u: u32,
    pub v: u32,
    pub mult: u32,
}

/// Immutable graph substrate shared read-only by all modules.
#[derive(Debug, Clone)]
pub struct GraphTopology {
    pub dim: usize,
    verts: Vec<Pt>,
    vmap: HashMap<Pt, u32>,
    bundles: Vec<Bundle>,
    adj_off: Vec<u32>,
    adj: Vec<(u32, u32)>, // (bundle id, other endpoint)
    ghost: Option<u32>,
    is_boundary: Vec<bool>,
}

impl GraphTopology {
    fn assemble(
        dim: usize,
        verts: Vec<Pt>,
        mut raw: Vec<Bundle>,
        ghost: Option<u32>,
        is_boundary: Vec<bool>,
    ) -> Self {
        let vmap: HashMap<Pt, u32> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i as u32) != ghost)
            .map(|(i, p)| (*p, i as u32))
            .collect();
        raw.sort_by_key(|b| (b.u, b.v));
        let mut deg = vec![0u32; verts.len()];
        for b in &raw {
            assert!(b.mult >= 1 && b.u < b.v);
            deg[b.u as usize] += 1;
            deg[b.v as usize] += 1;
        }
        let mut adj_off = Vec::with_capacity(verts.len() + 1);
        let mut acc = 0u32;
        for d in &deg {
            adj_off.push(acc);
            acc += d;
        }
        adj_off.push(acc);
        let mut cursor: Vec<u32> = adj_off[..verts.len()].to_vec();
        let mut adj = vec![(0u32, 0u32); acc as usize];
        for (bid, b) in raw.iter().enumerate() {
            adj[cursor[b.u as usize] as usize] = (bid as u32, b.v);
            cursor[b.u as usize] += 1;
            adj[cursor[b.v as usize] as usize] = (bid as u32, b.u);
            cursor[b.v as usize] += 1;
        }
        GraphTopology { dim, verts, vmap, bundles: raw, adj_off, adj, ghost, is_boundary }
    }

    /// Induced nearest-neighbor graph on an explicit point set.
    ///
    /// Boundary vertices are those with fewer than `2d` incident lattice
    /// edges inside the set.
    pub fn from_points(dim: usize, points: &[Pt]) -> Result<Self> {
        if dim < 2 || dim > MAX_DIM {
            return Err(Error::Geometry(format!("dimension {dim} out of range [2, {MAX_DIM}]")));
        }
        let mut verts: Vec<Pt> = points.to_vec();
        verts.sort();
        verts.dedup();
        let vmap: HashMap<Pt, u32> =
            verts.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
        let mut raw = Vec::new();
        let mut lat_deg = vec![0u32; verts.len()];
        for (i, p) in verts.iter().enumerate() {
            for axis in 0..dim {
                let q = p.shifted(axis, 1);
                if let Some(&j) = vmap.get(&q) {
                    raw.push(Bundle { u: i as u32, v: j, mult: 1 });
                    lat_deg[i] += 1;
                    lat_deg[j as usize] += 1;
                }
            }
        }
        let is_boundary = lat_deg.iter().map(|&d| d < 2 * dim as u32).collect();
        Ok(Self::assemble(dim, verts, raw, None, is_boundary))
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn bundle_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, id: usize) -> Bundle {
        self.bundles[id]
    }

    pub fn ghost(&self) -> Option<u32> {
        self.ghost
    }

    pub fn is_ghost_vertex(&self, v: u32) -> bool {
        self.ghost == Some(v)
    }

    pub fn is_ghost_bundle(&self, id: usize) -> bool {
        match self.ghost {
            Some(g) => {
                let b = self.bundles[id];
                b.u == g || b.v == g
            }
            None => false,
        }
    }

    pub fn point(&self, v: u32) -> Pt {
        self.verts[v as usize]
    }

    pub fn index_of(&self, p: &Pt) -> Option<u32> {
        self.vmap.get(p).copied()
    }

    pub fn is_boundary(&self, v: u32) -> bool {
        self.is_boundary[v as usize]
    }

    pub fn boundary_vertices(&self) -> Vec<u32> {
        (0..self.verts.len() as u32)
            .filter(|&v| self.is_boundary[v as usize] && !self.is_ghost_vertex(v))
            .collect()
    }

    /// Incident `(bundle id, other endpoint)` pairs.
    #[inline]
    pub fn incident(&self, v: u32) -> &[(u32, u32)] {
        let a = self.adj_off[v as usize] as usize;
        let b = self.adj_off[v as usize + 1] as usize;
        &self.adj[a..b]
    }

    /// Total multiplicity at a vertex (lattice plus ghost bundles).
    pub fn degree(&self, v: u32) -> u32 {
        self.incident(v).iter().map(|&(b, _)| self.bundles[b as usize].mult).sum()
    }

    /// Total multiplicity of ghost bundles.
    pub fn ghost_multiplicity(&self) -> u32 {
        (0..self.bundles.len())
            .filter(|&b| self.is_ghost_bundle(b))
            .map(|b| self.bundles[b].mult)
            .sum()
    }

    /// Bundle mask for edges with both endpoints inside `bx` (ghost excluded).
    pub fn bundles_in_box(&self, bx: &LatticeBox) -> Vec<bool> {
        self.bundles
            .iter()
            .map(|b| {
                !self.is_ghost_vertex(b.u)
                    && !self.is_ghost_vertex(b.v)
                    && bx.contains(&self.point(b.u))
                    && bx.contains(&self.point(b.v))
            })
            .collect()
    }
}

/// Nearest-neighbor graph on the box `center + [-n, n]^d`.
pub fn build_box_graph(dim: usize, n: i32, center: Pt) -> Result<GraphTopology> {
    if dim < 2 || dim > MAX_DIM {
        return Err(Error::Geometry(format!("dimension {dim} out of range [2, {MAX_DIM}]")));
    }
    if n < 0 {
        return Err(Error::Geometry("negative radius".into()));
    }
    let bx = LatticeBox::new(dim, center, n);
    if bx.vertex_count() > 80_000_000 {
        return Err(Error::Geometry(format!("box too large ({} vertices)", bx.vertex_count())));
    }
    let verts = bx.points();
    let vmap: HashMap<Pt, u32> = verts.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
    let mut raw = Vec::with_capacity(verts.len() * dim);
    for (i, p) in verts.iter().enumerate() {
        for axis in 0..dim {
            let q = p.shifted(axis, 1);
            if let Some(&j) = vmap.get(&q) {
                let (u, v) = if (i as u32) < j { (i as u32, j) } else { (j, i as u32) };
                raw.push(Bundle { u, v, mult: 1 });
            }
        }
    }
    let is_boundary = verts.iter().map(|p| bx.on_boundary(p)).collect();
    Ok(GraphTopology::assemble(dim, verts, raw, None, is_boundary))
}

/// Add a ghost vertex joined to each boundary vertex by a bundle whose
/// multiplicity is the number of lattice edges leaving the vertex set.
pub fn attach_ghost(g: &GraphTopology) -> Result<GraphTopology> {
    if g.ghost.is_some() {
        return Err(Error::Geometry("graph already has a ghost vertex".into()));
    }
    let mut verts = g.verts.clone();
    let ghost_id = verts.len() as u32;
    // Sentinel coordinates keep the ghost out of all geometry queries.
    verts.push(Pt([i32::MAX; MAX_DIM]));
    let mut raw = g.bundles.clone();
    let full = 2 * g.dim as u32;
    for v in 0..g.verts.len() as u32 {
        if !g.is_boundary(v) {
            continue;
        }
        let lat: u32 = g.incident(v).iter().map(|&(b, _)| g.bundles[b as usize].mult).sum();
        if lat < full {
            raw.push(Bundle { u: v, v: ghost_id, mult: full - lat });
        }
    }
    let mut is_boundary = g.is_boundary.clone();
    is_boundary.push(false);
    Ok(GraphTopology::assemble(g.dim, verts, raw, Some(ghost_id), is_boundary))
}

/// Contract each core to a single vertex, bundling parallel edges with
/// summed multiplicity and deleting core-internal edges.
pub fn collapse(g: &GraphTopology, cores: &[Vec<u32>]) -> Result<GraphTopology> {
    let n = g.verts.len();
    let mut owner = vec![usize::MAX; n];
    for (ci, core) in cores.iter().enumerate() {
        if core.is_empty() {
            return Err(Error::Geometry("empty core".into()));
        }
        for &v in core {
            if v as usize >= n {
                return Err(Error::Geometry("core vertex out of range".into()));
            }
            if g.is_ghost_vertex(v) {
                return Err(Error::Geometry("ghost vertex inside a core".into()));
            }
            if owner[v as usize] != usize::MAX {
                return Err(Error::Geometry("overlapping cores".into()));
            }
            owner[v as usize] = ci;
        }
    }
    // Merged vertices take the lexicographically smallest member point.
    let mut core_pt: Vec<Pt> = cores
        .iter()
        .map(|core| core.iter().map(|&v| g.point(v)).min().unwrap())
        .collect();
    let mut new_pts: Vec<Pt> = Vec::new();
    for (v, p) in g.verts.iter().enumerate() {
        if owner[v] == usize::MAX && !g.is_ghost_vertex(v as u32) {
            new_pts.push(*p);
        }
    }
    new_pts.append(&mut core_pt);
    new_pts.sort();
    new_pts.dedup();
    let pmap: HashMap<Pt, u32> =
        new_pts.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
    let ghost_new = g.ghost.map(|_| new_pts.len() as u32);
    let mut verts = new_pts;
    if g.ghost.is_some() {
        verts.push(Pt([i32::MAX; MAX_DIM]));
    }

    let remap = |v: u32| -> u32 {
        if g.is_ghost_vertex(v) {
            return ghost_new.unwrap();
        }
        let p = if owner[v as usize] == usize::MAX {
            g.point(v)
        } else {
            cores[owner[v as usize]].iter().map(|&w| g.point(w)).min().unwrap()
        };
        pmap[&p]
    };

    let mut acc: HashMap<(u32, u32), u32> = HashMap::new();
    for b in &g.bundles {
        let nu = remap(b.u);
        let nv = remap(b.v);
        if nu == nv {
            continue; // internal core edge
        }
        let key = (nu.min(nv), nu.max(nv));
        *acc.entry(key).or_insert(0) += b.mult;
    }
    let raw: Vec<Bundle> =
        acc.into_iter().map(|((u, v), mult)| Bundle { u, v, mult }).collect();

    let mut is_boundary = vec![false; verts.len()];
    for v in 0..g.verts.len() as u32 {
        if g.is_ghost_vertex(v) {
            continue;
        }
        if g.is_boundary(v) {
            is_boundary[remap(v) as usize] = true;
        }
    }
    Ok(GraphTopology::assemble(g.dim, verts, raw, ghost_new, is_boundary))
}

/// The grid of blocks `Lambda_k(c)` contained in a parent box, `c` on the
/// absolute grid `k Z^d`.
#[derive(Debug, Clone)]
pub struct BlockFamily {
    pub dim: usize,
    pub k: i32,
    pub parent: LatticeBox,
    pub centers: Vec<Pt>,
}

impl BlockFamily {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn block(&self, i: usize) -> LatticeBox {
        LatticeBox::new(self.dim, self.centers[i], self.k)
    }

    /// Blocks whose centers are within `l_inf` distance `3k` (the wide
    /// neighborhood used by coarse-graining).
    pub fn m_neighbors(&self, i: usize) -> Vec<usize> {
        let c = self.centers[i];
        (0..self.centers.len())
            .filter(|&j| self.centers[j].linf(&c, self.dim) <= 3 * self.k)
            .collect()
    }

    /// Blocks intersecting block `i` (centers within `2k`).
    pub fn n_neighbors(&self, i: usize) -> Vec<usize> {
        let c = self.centers[i];
        (0..self.centers.len())
            .filter(|&j| self.centers[j].linf(&c, self.dim) <= 2 * self.k)
            .collect()
    }
}

/// Enumerate `B_k(S)` for a box-shaped region `S`.
pub fn blocks(parent: &LatticeBox, k: i32) -> Result<BlockFamily> {
    if k < 1 {
        return Err(Error::Geometry("block radius must be >= 1".into()));
    }
    let dim = parent.dim;
    let mut ranges = Vec::with_capacity(dim);
    for i in 0..dim {
        let lo = parent.center.0[i] - parent.radius + k;
        let hi = parent.center.0[i] + parent.radius - k;
        let lo_m = lo.div_euclid(k) + i32::from(lo.rem_euclid(k) != 0);
        let hi_m = hi.div_euclid(k);
        ranges.push((lo_m, hi_m));
    }
    let mut centers = Vec::new();
    if ranges.iter().all(|(lo, hi)| lo <= hi) {
        let mut idx: Vec<i32> = ranges.iter().map(|&(lo, _)| lo).collect();
        'outer: loop {
            let mut c = [0i32; MAX_DIM];
            for i in 0..dim {
                c[i] = idx[i] * k;
            }
            centers.push(Pt(c));
            let mut j = dim;
            loop {
                if j == 0 {
                    break 'outer;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] <= ranges[j].1 {
                    break;
                }
                idx[j] = ranges[j].0;
            }
        }
    }
    centers.sort();
    Ok(BlockFamily { dim, k, parent: *parent, centers })
}

/// Centers at `l_inf` distance at least `7 d n` never interact during
/// surgery: paths and their 2-neighborhoods stay apart.
pub fn strongly_disjoint(dim: usize, c1: &Pt, c2: &Pt, n: i32) -> bool {
    c1.linf(c2, dim) >= 7 * dim as i32 * n
}

/// Vertices within graph (`l_1`) distance `r` of the set.
pub fn neighborhood(dim: usize, set: &[Pt], r: i32) -> Vec<Pt> {
    assert!(r >= 0);
    let mut out: Vec<Pt> = set.to_vec();
    out.sort();
    out.dedup();
    let mut frontier = out.clone();
    let mut seen: std::collections::HashSet<Pt> = out.iter().copied().collect();
    for _ in 0..r {
        let mut next = Vec::new();
        for p in &frontier {
            for axis in 0..dim {
                for delta in [-1, 1] {
                    let q = p.shifted(axis, delta);
                    if seen.insert(q) {
                        next.push(q);
                    }
                }
            }
        }
        out.extend(next.iter().copied());
        frontier = next;
    }
    out.sort();
    out
}

/// Lattice edges with both endpoints in `N_r(set)`, as ordered point pairs.
pub fn edge_neighborhood(dim: usize, set: &[Pt], r: i32) -> Vec<(Pt, Pt)> {
    let pts = neighborhood(dim, set, r);
    let inside: std::collections::HashSet<Pt> = pts.iter().copied().collect();
    let mut out = Vec::new();
    for p in &pts {
        for axis in 0..dim {
            let q = p.shifted(axis, 1);
            if inside.contains(&q) {
                out.push((*p, q));
            }
        }
    }
    out.sort();
    out
}
