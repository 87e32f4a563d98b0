//! Exact enumeration of current traces and truncated integer currents.
//!
//! A current on a bundle is reduced to its trace: zero, positive-even, or
//! odd, with weights 1, cosh(beta_e) - 1 and sinh(beta_e) where
//! `beta_e = mult * beta * J`. Every event measurable in (positivity,
//! parity) — connectivity of `n` or `n1 + n2`, source sets — has an exact
//! probability at trace level, with no truncation. A capped integer-valued
//! enumerator validates the reduction.

use crate::error::{Error, Result};
use crate::exact::{EnumCaps, Kahan};
use crate::geometry::GraphTopology;
use crate::unionfind::UnionFind;

/// Common view of an edge configuration: enough to decide positivity and
/// parity per bundle. Trace and integer-current states both implement it.
pub trait EdgeObs {
    fn positive(&self, bundle: usize) -> bool;
    fn odd(&self, bundle: usize) -> bool;
    fn bundle_count(&self) -> usize;
}

/// Packed trace state: 2 bits per bundle (0 zero, 1 odd, 2 even-positive).
#[derive(Debug, Clone, Copy)]
pub struct TraceWord {
    bits: u64,
    n: usize,
}

impl TraceWord {
    #[inline]
    pub fn state(&self, b: usize) -> u8 {
        (self.bits >> (2 * b) & 3) as u8
    }
}

impl EdgeObs for TraceWord {
    #[inline]
    fn positive(&self, b: usize) -> bool {
        self.state(b) != 0
    }

    #[inline]
    fn odd(&self, b: usize) -> bool {
        self.state(b) == 1
    }

    fn bundle_count(&self) -> usize {
        self.n
    }
}

/// Exact distribution over traces with a prescribed source set.
///
/// On a ghosted graph the constraint is on lattice vertices only (the ghost
/// absorbs parity); on a ghost-free graph the source set must be matched
/// exactly.
pub struct TraceEnsemble<'g> {
    pub g: &'g GraphTopology,
    beta_e: Vec<f64>,
    sources: Vec<u32>,
    states: Vec<(u64, f64)>,
    z: f64,
}

impl<'g> TraceEnsemble<'g> {
    pub fn new(
        g: &'g GraphTopology,
        beta: f64,
        couplings: Option<&[f64]>,
        sources: &[u32],
        caps: &EnumCaps,
    ) -> Result<Self> {
        let n = g.bundle_count();
        if n > caps.max_trace_bundles {
            return Err(Error::SizeCap(format!(
                "{n} bundles exceeds trace cap {}",
                caps.max_trace_bundles
            )));
        }
        let mut sources = sources.to_vec();
        sources.sort_unstable();
        sources.dedup();
        for &s in &sources {
            if g.is_ghost_vertex(s) {
                return Err(Error::Unsupported("ghost cannot be a prescribed source".into()));
            }
        }
        let beta_e: Vec<f64> = g
            .bundles()
            .iter()
            .enumerate()
            .map(|(i, b)| beta * couplings.map_or(1.0, |j| j[i]) * b.mult as f64)
            .collect();
        let w_odd: Vec<f64> = beta_e.iter().map(|b| b.sinh()).collect();
        let w_even: Vec<f64> = beta_e.iter().map(|b| b.cosh() - 1.0).collect();

        let mut want = vec![false; g.vertex_count()];
        for &s in &sources {
            want[s as usize] = true;
        }
        let mut states = Vec::new();
        let mut z = Kahan::default();
        let total = 3u64.pow(n as u32);
        let mut digits = vec![0u8; n];
        let mut parity = vec![false; g.vertex_count()];
        for code in 0..total {
            // Decode mixed-radix state.
            let mut c = code;
            for d in digits.iter_mut() {
                *d = (c % 3) as u8;
                c /= 3;
            }
            parity.fill(false);
            let mut w = 1.0;
            for (bid, &d) in digits.iter().enumerate() {
                match d {
                    0 => {}
                    1 => {
                        w *= w_odd[bid];
                        let b = g.bundle(bid);
                        parity[b.u as usize] ^= true;
                        parity[b.v as usize] ^= true;
                    }
                    _ => w *= w_even[bid],
                }
            }
            let ok = (0..g.vertex_count()).all(|v| {
                g.is_ghost_vertex(v as u32) || parity[v] == want[v]
            });
            if ok && w > 0.0 {
                let mut bits = 0u64;
                for (bid, &d) in digits.iter().enumerate() {
                    bits |= (d as u64) << (2 * bid);
                }
                states.push((bits, w));
                z.add(w);
            }
        }
        let z = z.value();
        if !(z > 0.0) {
            return Err(Error::EmptySupport(format!(
                "no trace satisfies the source constraint {sources:?}"
            )));
        }
        Ok(TraceEnsemble { g, beta_e, sources, states, z })
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn beta_e(&self) -> &[f64] {
        &self.beta_e
    }

    pub fn unnormalized_z(&self) -> f64 {
        self.z
    }

    pub fn expect(&self, f: &mut dyn FnMut(&TraceWord) -> f64) -> f64 {
        let n = self.g.bundle_count();
        let mut acc = Kahan::default();
        for &(bits, w) in &self.states {
            acc.add(f(&TraceWord { bits, n }) * w);
        }
        acc.value() / self.z
    }

    pub fn probability(&self, mut event: impl FnMut(&TraceWord) -> bool) -> f64 {
        self.expect(&mut |s| if event(s) { 1.0 } else { 0.0 })
    }
}

/// Roots of the positivity graph of one or two configurations over the
/// lattice vertices of `g` (ghost excluded; ghost bundles never connect).
pub fn positivity_roots(
    g: &GraphTopology,
    uf: &mut UnionFind,
    positive: impl Fn(usize) -> bool,
) -> Vec<u32> {
    uf.reset();
    for (bid, b) in g.bundles().iter().enumerate() {
        if !g.is_ghost_bundle(bid) && positive(bid) {
            uf.union(b.u, b.v);
        }
    }
    (0..g.vertex_count() as u32).map(|v| uf.find(v)).collect()
}

/// Independent pair of trace ensembles with bundle correspondence by
/// lattice endpoints (e.g. a sourced current on `G^+` paired with a
/// sourceless one on `G`).
pub struct PairTraceEnsemble<'a, 'g> {
    pub first: &'a TraceEnsemble<'g>,
    pub second: &'a TraceEnsemble<'g>,
    /// For each bundle of `first.g`: matching bundle of `second.g`.
    pub map: Vec<Option<usize>>,
}

impl<'a, 'g> PairTraceEnsemble<'a, 'g> {
    pub fn new(
        first: &'a TraceEnsemble<'g>,
        second: &'a TraceEnsemble<'g>,
        caps: &EnumCaps,
    ) -> Result<Self> {
        let states = first.states.len() as u64 * second.states.len() as u64;
        if states > caps.max_pair_states {
            return Err(Error::SizeCap(format!(
                "{states} pair states exceeds cap {}",
                caps.max_pair_states
            )));
        }
        let g1 = first.g;
        let g2 = second.g;
        let map = g1
            .bundles()
            .iter()
            .enumerate()
            .map(|(bid, b)| {
                if g1.is_ghost_bundle(bid) {
                    return None;
                }
                let pu = g1.point(b.u);
                let pv = g1.point(b.v);
                let iu = g2.index_of(&pu)?;
                let iv = g2.index_of(&pv)?;
                g2.bundles().iter().position(|c| {
                    (c.u, c.v) == (iu.min(iv), iu.max(iv))
                })
            })
            .collect();
        Ok(PairTraceEnsemble { first, second, map })
    }

    /// Expectation of a function of the pair.
    pub fn expect(&self, f: &mut dyn FnMut(&TraceWord, &TraceWord) -> f64) -> f64 {
        let n1 = self.first.g.bundle_count();
        let n2 = self.second.g.bundle_count();
        let mut acc = Kahan::default();
        for &(b1, w1) in &self.first.states {
            let s1 = TraceWord { bits: b1, n: n1 };
            let mut inner = Kahan::default();
            for &(b2, w2) in &self.second.states {
                inner.add(f(&s1, &TraceWord { bits: b2, n: n2 }) * w2);
            }
            acc.add(inner.value() * w1);
        }
        acc.value() / (self.first.z * self.second.z)
    }

    /// Probability that some vertex of `xs` joins some vertex of `ys` in
    /// the sum configuration, through lattice bundles of the first graph.
    pub fn connection_probability(&self, xs: &[u32], ys: &[u32]) -> f64 {
        let g = self.first.g;
        let mut uf = UnionFind::new(g.vertex_count());
        self.expect(&mut |s1, s2| {
            let roots = positivity_roots(g, &mut uf, |bid| {
                s1.positive(bid)
                    || self.map[bid].map_or(false, |b2| s2.positive(b2))
            });
            let hit = xs.iter().any(|&x| {
                ys.iter().any(|&y| roots[x as usize] == roots[y as usize])
            });
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Integer current state for the capped enumerator.
pub struct CurrentWord<'a> {
    vals: &'a [u32],
}

impl<'a> EdgeObs for CurrentWord<'a> {
    #[inline]
    fn positive(&self, b: usize) -> bool {
        self.vals[b] > 0
    }

    #[inline]
    fn odd(&self, b: usize) -> bool {
        self.vals[b] % 2 == 1
    }

    fn bundle_count(&self) -> usize {
        self.vals.len()
    }
}

/// Truncated full-current enumeration (values 0..=cap per bundle), kept
/// solely to validate the trace reduction.
pub struct TruncatedCurrentEnsemble<'g> {
    pub g: &'g GraphTopology,
    beta_e: Vec<f64>,
    cap: u32,
    states: Vec<(Vec<u32>, f64)>,
    z: f64,
}

impl<'g> TruncatedCurrentEnsemble<'g> {
    pub fn new(
        g: &'g GraphTopology,
        beta: f64,
        sources: &[u32],
        caps: &EnumCaps,
    ) -> Result<Self> {
        let n = g.bundle_count();
        if n > caps.max_current_bundles {
            return Err(Error::SizeCap(format!(
                "{n} bundles exceeds current cap {}",
                caps.max_current_bundles
            )));
        }
        let cap = caps.current_cap;
        let beta_e: Vec<f64> =
            g.bundles().iter().map(|b| beta * b.mult as f64).collect();
        // Per-bundle weights beta^t / t!.
        let table: Vec<Vec<f64>> = beta_e
            .iter()
            .map(|&be| {
                let mut row = Vec::with_capacity(cap as usize + 1);
                let mut w = 1.0;
                row.push(w);
                for t in 1..=cap {
                    w *= be / t as f64;
                    row.push(w);
                }
                row
            })
            .collect();
        let mut want = vec![false; g.vertex_count()];
        for &s in sources {
            want[s as usize] = true;
        }
        let mut states = Vec::new();
        let mut z = Kahan::default();
        let mut vals = vec![0u32; n];
        let mut parity = vec![false; g.vertex_count()];
        loop {
            parity.fill(false);
            let mut w = 1.0;
            for (bid, &t) in vals.iter().enumerate() {
                w *= table[bid][t as usize];
                if t % 2 == 1 {
                    let b = g.bundle(bid);
                    parity[b.u as usize] ^= true;
                    parity[b.v as usize] ^= true;
                }
            }
            let ok = (0..g.vertex_count())
                .all(|v| g.is_ghost_vertex(v as u32) || parity[v] == want[v]);
            if ok {
                states.push((vals.clone(), w));
                z.add(w);
            }
            // Advance the odometer.
            let mut i = 0;
            loop {
                if i == n {
                    let z = z.value();
                    if !(z > 0.0) {
                        return Err(Error::EmptySupport(
                            "no truncated current satisfies the source constraint".into(),
                        ));
                    }
                    return Ok(TruncatedCurrentEnsemble { g, beta_e, cap, states, z });
                }
                vals[i] += 1;
                if vals[i] <= cap {
                    break;
                }
                vals[i] = 0;
                i += 1;
            }
        }
    }

    pub fn expect(&self, f: &mut dyn FnMut(&CurrentWord) -> f64) -> f64 {
        let mut acc = Kahan::default();
        for (vals, w) in &self.states {
            acc.add(f(&CurrentWord { vals }) * w);
        }
        acc.value() / self.z
    }

    pub fn probability(&self, mut event: impl FnMut(&CurrentWord) -> bool) -> f64 {
        self.expect(&mut |s| if event(s) { 1.0 } else { 0.0 })
    }

    /// Rigorous bound on |P_trace[A] - P_truncated[A]| for any event A:
    /// twice the truncated tail mass relative to the truncated partition
    /// function, with the source constraint dropped in the tail.
    pub fn tail_bound(&self) -> f64 {
        let b_total: f64 = self.beta_e.iter().sum();
        let mut missing = 0.0;
        for &be in &self.beta_e {
            // sum_{t > cap} be^t / t!
            let mut term = 1.0;
            for t in 1..=self.cap {
                term *= be / t as f64;
            }
            let mut tail = 0.0;
            let mut w = term;
            for t in self.cap + 1..self.cap + 60 {
                w *= be / t as f64;
                tail += w;
            }
            missing += tail * (b_total - be).exp();
        }
        2.0 * missing / self.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{attach_ghost, pt2, GraphTopology};

    fn single_edge() -> GraphTopology {
        GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0)]).unwrap()
    }

    #[test]
    fn forced_parity_on_single_edge() {
        let g = single_edge();
        let caps = EnumCaps::default();
        let ens = TraceEnsemble::new(&g, 1.0, None, &[0, 1], &caps).unwrap();
        assert!((ens.probability(|s| s.odd(0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sourceless_single_edge_positive_probability() {
        let g = single_edge();
        let ens = TraceEnsemble::new(&g, 1.0, None, &[], &EnumCaps::default()).unwrap();
        let got = ens.probability(|s| s.positive(0));
        let want = (1f64.cosh() - 1.0) / 1f64.cosh();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn tree_parity_forces_both_edges_odd() {
        let pts = [pt2(0, 0), pt2(1, 0), pt2(2, 0)];
        let g = GraphTopology::from_points(2, &pts).unwrap();
        let x = g.index_of(&pt2(0, 0)).unwrap();
        let y = g.index_of(&pt2(2, 0)).unwrap();
        let ens = TraceEnsemble::new(&g, 0.8, None, &[x, y], &EnumCaps::default()).unwrap();
        assert!((ens.probability(|s| s.odd(0) && s.odd(1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_sources_without_ghost_are_empty() {
        let g = single_edge();
        assert!(matches!(
            TraceEnsemble::new(&g, 1.0, None, &[0], &EnumCaps::default()),
            Err(Error::EmptySupport(_))
        ));
        // With a ghost the parity can escape.
        let gp = attach_ghost(&g).unwrap();
        let ens = TraceEnsemble::new(&gp, 1.0, None, &[0], &EnumCaps::default()).unwrap();
        assert!(ens.unnormalized_z() > 0.0);
    }

    #[test]
    fn trace_equals_truncated_on_single_edge() {
        let g = single_edge();
        let caps = EnumCaps::default();
        let tr = TraceEnsemble::new(&g, 0.9, None, &[], &caps).unwrap();
        let cur = TruncatedCurrentEnsemble::new(&g, 0.9, &[], &caps).unwrap();
        let a = tr.probability(|s| s.positive(0));
        let b = cur.probability(|s| s.positive(0));
        assert!((a - b).abs() <= cur.tail_bound(), "{a} {b} {}", cur.tail_bound());
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn pair_connection_on_single_edge_with_ghost() {
        let g = single_edge();
        let gp = attach_ghost(&g).unwrap();
        let caps = EnumCaps::default();
        let x = gp.index_of(&pt2(0, 0)).unwrap();
        let y = gp.index_of(&pt2(1, 0)).unwrap();
        let first = TraceEnsemble::new(&gp, 0.7, None, &[x, y], &caps).unwrap();
        let second = TraceEnsemble::new(&g, 0.7, None, &[], &caps).unwrap();
        let pair = PairTraceEnsemble::new(&first, &second, &caps).unwrap();
        let p = pair.connection_probability(&[x], &[y]);
        assert!((0.0..=1.0).contains(&p));
        // Overlapping sets connect trivially.
        assert!((pair.connection_probability(&[x], &[x]) - 1.0).abs() < 1e-14);
    }
}
