//! Exact spin enumeration with Gray-code state walking.

use crate::error::{Error, Result};
use crate::exact::{EnumCaps, Kahan, ModelParams};
use crate::geometry::GraphTopology;

/// Boundary treatment for spin enumeration.
///
/// `PlusGhost` fixes the ghost spin to +1, so ghost bundles act as a
/// boundary field of strength `mult * beta`. `PlusForced` fixes every
/// boundary vertex to +1; this is the spin side of wired FK.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBoundary {
    Free,
    PlusGhost,
    PlusForced,
}

/// Exact Gibbs distribution over spin configurations of a small graph.
///
/// The state space is enumerated on demand; expectations of any batch of
/// products `sigma_A` come out of a single Gray-code pass.
#[derive(Debug, Clone)]
pub struct SpinEnsemble {
    /// Free-spin index per graph vertex (usize::MAX for fixed spins).
    free_index: Vec<usize>,
    n_free: usize,
    /// Interactions (i, j, K) between free spins, K = beta * J * mult.
    pairs: Vec<(u32, u32, f64)>,
    /// Field F_i on each free spin: beta*h plus couplings to fixed +1 spins.
    fields: Vec<f64>,
    /// Log-weight of interactions among fixed spins (constant offset).
    fixed_offset: f64,
    /// Per-free-spin adjacency into `pairs`.
    adj: Vec<Vec<(u32, f64)>>,
}

impl SpinEnsemble {
    pub fn new(
        g: &GraphTopology,
        params: &ModelParams,
        boundary: SpinBoundary,
        caps: &EnumCaps,
    ) -> Result<Self> {
        let n = g.vertex_count();
        let mut fixed = vec![false; n];
        match boundary {
            SpinBoundary::Free => {
                if g.ghost().is_some() {
                    return Err(Error::Unsupported(
                        "free boundary on a ghosted graph; strip the ghost first".into(),
                    ));
                }
            }
            SpinBoundary::PlusGhost => match g.ghost() {
                Some(gh) => fixed[gh as usize] = true,
                None => {
                    return Err(Error::Unsupported("plus-ghost boundary needs a ghost".into()))
                }
            },
            SpinBoundary::PlusForced => {
                for v in 0..n as u32 {
                    if g.is_boundary(v) || g.is_ghost_vertex(v) {
                        fixed[v as usize] = true;
                    }
                }
            }
        }
        let mut free_index = vec![usize::MAX; n];
        let mut n_free = 0;
        for v in 0..n {
            if !fixed[v] {
                free_index[v] = n_free;
                n_free += 1;
            }
        }
        if n_free > caps.max_spin_free {
            return Err(Error::SizeCap(format!(
                "{n_free} free spins exceeds cap {}",
                caps.max_spin_free
            )));
        }

        let mut pairs = Vec::new();
        let mut fields = vec![params.beta * params.h; n_free];
        let mut fixed_offset = 0.0;
        for (bid, b) in g.bundles().iter().enumerate() {
            let k = params.beta * params.coupling(bid) * b.mult as f64;
            match (fixed[b.u as usize], fixed[b.v as usize]) {
                (false, false) => {
                    pairs.push((free_index[b.u as usize] as u32, free_index[b.v as usize] as u32, k))
                }
                (false, true) => fields[free_index[b.u as usize]] += k,
                (true, false) => fields[free_index[b.v as usize]] += k,
                (true, true) => fixed_offset += k,
            }
        }
        for v in 0..n {
            if fixed[v] {
                fixed_offset += params.beta * params.h;
            }
        }
        let mut adj = vec![Vec::new(); n_free];
        for &(i, j, k) in &pairs {
            adj[i as usize].push((j, k));
            adj[j as usize].push((i, k));
        }

        Ok(SpinEnsemble { free_index, n_free, pairs, fields, fixed_offset, adj })
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Log partition function (includes the fixed-spin offset).
    pub fn log_partition(&self) -> f64 {
        self.run_pass(&[]).0.ln() + self.fixed_offset
    }

    /// One Gray-code pass; returns (Z_rel, per-observable sums) relative to
    /// the fixed offset.
    fn run_pass(&self, observables: &[Vec<usize>]) -> (f64, Vec<f64>) {
        let n = self.n_free;
        let mut spin = vec![1i8; n];
        let mut logw: f64 = self.pairs.iter().map(|&(_, _, k)| k).sum::<f64>()
            + self.fields.iter().sum::<f64>();

        // Per-spin list of observables to sign-flip.
        let mut touch: Vec<Vec<u32>> = vec![Vec::new(); n.max(1)];
        let mut signs = vec![1i8; observables.len()];
        for (oi, obs) in observables.iter().enumerate() {
            for &i in obs {
                touch[i].push(oi as u32);
            }
        }

        let mut z = Kahan::default();
        let mut sums = vec![Kahan::default(); observables.len()];
        let total: u64 = 1u64 << n;
        let mut w = logw.exp();
        z.add(w);
        for (oi, s) in signs.iter().enumerate() {
            sums[oi].add(*s as f64 * w);
        }
        for t in 1..total {
            let i = t.trailing_zeros() as usize;
            // Delta of the log-weight for flipping spin i.
            let mut local = self.fields[i];
            for &(j, k) in &self.adj[i] {
                local += k * spin[j as usize] as f64;
            }
            logw -= 2.0 * spin[i] as f64 * local;
            spin[i] = -spin[i];
            for &oi in &touch[i] {
                signs[oi as usize] = -signs[oi as usize];
            }
            // Periodic recompute keeps incremental drift below 1e-12.
            if t & 0xffff == 0 {
                logw = self.log_weight(&spin);
            }
            w = logw.exp();
            z.add(w);
            for (oi, s) in signs.iter().enumerate() {
                sums[oi].add(*s as f64 * w);
            }
        }
        (z.value(), sums.iter().map(|k| k.value()).collect())
    }

    fn log_weight(&self, spin: &[i8]) -> f64 {
        let mut l = 0.0;
        for &(i, j, k) in &self.pairs {
            l += k * (spin[i as usize] * spin[j as usize]) as f64;
        }
        for (i, f) in self.fields.iter().enumerate() {
            l += f * spin[i] as f64;
        }
        l
    }

    /// Expectations of products `sigma_A` for a batch of vertex sets.
    /// Fixed (+1) vertices inside `A` drop out of the product.
    pub fn expectations(&self, observables: &[Vec<u32>]) -> Vec<f64> {
        let obs: Vec<Vec<usize>> = observables
            .iter()
            .map(|a| {
                let mut idx: Vec<usize> = a
                    .iter()
                    .filter_map(|&v| {
                        let fi = self.free_index[v as usize];
                        (fi != usize::MAX).then_some(fi)
                    })
                    .collect();
                idx.sort_unstable();
                // sigma^2 = 1: repeated vertices cancel pairwise.
                let mut dedup = Vec::new();
                let mut it = idx.into_iter().peekable();
                while let Some(x) = it.next() {
                    if it.peek() == Some(&x) {
                        it.next();
                    } else {
                        dedup.push(x);
                    }
                }
                dedup
            })
            .collect();
        let (z, sums) = self.run_pass(&obs);
        sums.iter().map(|s| s / z).collect()
    }

    pub fn expectation(&self, a: &[u32]) -> f64 {
        self.expectations(&[a.to_vec()])[0]
    }
}

/// `<sigma_x sigma_y> - <sigma_x><sigma_y>` in one pass.
pub fn truncated_two_point(ens: &SpinEnsemble, x: u32, y: u32) -> f64 {
    let r = ens.expectations(&[vec![x, y], vec![x], vec![y]]);
    r[0] - r[1] * r[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_graph, pt2, GraphTopology, Pt};

    fn single_edge() -> GraphTopology {
        GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0)]).unwrap()
    }

    #[test]
    fn single_edge_matches_closed_form() {
        let g = single_edge();
        let ens =
            SpinEnsemble::new(&g, &ModelParams::new(1.0), SpinBoundary::Free, &EnumCaps::default())
                .unwrap();
        let got = ens.expectation(&[0, 1]);
        assert!((got - 1f64.tanh()).abs() < 1e-14, "{got}");
    }

    #[test]
    fn plus_minus_symmetry_and_independence() {
        let g = build_box_graph(2, 1, Pt::zero()).unwrap();
        let ens =
            SpinEnsemble::new(&g, &ModelParams::new(0.7), SpinBoundary::Free, &EnumCaps::default())
                .unwrap();
        // h = 0, free boundary: <sigma_x> = 0 by symmetry.
        for v in 0..g.vertex_count() as u32 {
            assert!(ens.expectation(&[v]).abs() < 1e-13);
        }
        // beta = 0: all spins independent, <sigma_A> = 0 for nonempty A.
        let ens0 =
            SpinEnsemble::new(&g, &ModelParams::new(0.0), SpinBoundary::Free, &EnumCaps::default())
                .unwrap();
        assert!(ens0.expectation(&[0, 3, 5, 7]).abs() < 1e-14);
        assert_eq!(ens0.expectation(&[]), 1.0);
    }

    #[test]
    fn field_breaks_symmetry_single_spin() {
        // One spin in field h: <sigma> = tanh(beta h).
        let g = GraphTopology::from_points(2, &[pt2(0, 0)]).unwrap();
        let ens = SpinEnsemble::new(
            &g,
            &ModelParams::with_field(0.8, 0.3),
            SpinBoundary::Free,
            &EnumCaps::default(),
        )
        .unwrap();
        assert!((ens.expectation(&[0]) - (0.8f64 * 0.3).tanh()).abs() < 1e-14);
    }

    #[test]
    fn ghost_boundary_equals_explicit_field() {
        // Ghost bundle of multiplicity m at a vertex acts as field m*beta.
        let g = single_edge();
        let gp = crate::geometry::attach_ghost(&g).unwrap();
        let ens = SpinEnsemble::new(
            &gp,
            &ModelParams::new(0.5),
            SpinBoundary::PlusGhost,
            &EnumCaps::default(),
        )
        .unwrap();
        // Independent route: explicit two-spin enumeration with fields 3*beta.
        let b = 0.5f64;
        let f = 3.0 * b;
        let mut z = 0.0;
        let mut sxy = 0.0;
        let mut sx = 0.0;
        for sa in [-1.0, 1.0] {
            for sb in [-1.0f64, 1.0] {
                let w = (b * sa * sb + f * sa + f * sb).exp();
                z += w;
                sxy += sa * sb * w;
                sx += sa * w;
            }
        }
        let ga = g.index_of(&pt2(0, 0)).unwrap();
        let gb = g.index_of(&pt2(1, 0)).unwrap();
        assert!((ens.expectation(&[ga, gb]) - sxy / z).abs() < 1e-13);
        assert!((ens.expectation(&[ga]) - sx / z).abs() < 1e-13);
        // Truncated two-point from the same ensemble.
        let t = truncated_two_point(&ens, ga, gb);
        assert!((t - (sxy / z - (sx / z) * (sx / z))).abs() < 1e-13);
    }

    #[test]
    fn truncated_at_equal_points() {
        let g = single_edge();
        let gp = crate::geometry::attach_ghost(&g).unwrap();
        let ens = SpinEnsemble::new(
            &gp,
            &ModelParams::new(0.4),
            SpinBoundary::PlusGhost,
            &EnumCaps::default(),
        )
        .unwrap();
        let m = ens.expectation(&[0]);
        assert!((truncated_two_point(&ens, 0, 0) - (1.0 - m * m)).abs() < 1e-13);
    }

    #[test]
    fn size_cap_is_enforced() {
        let g = build_box_graph(2, 2, Pt::zero()).unwrap();
        let caps = EnumCaps { max_spin_free: 10, ..Default::default() };
        assert!(matches!(
            SpinEnsemble::new(&g, &ModelParams::new(0.3), SpinBoundary::Free, &caps),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn forced_boundary_single_edge_is_deterministic() {
        let g = single_edge();
        let ens = SpinEnsemble::new(
            &g,
            &ModelParams::new(0.9),
            SpinBoundary::PlusForced,
            &EnumCaps::default(),
        )
        .unwrap();
        // Both endpoints are boundary, so sigma_x sigma_y = 1 identically.
        assert!((ens.expectation(&[0, 1]) - 1.0).abs() < 1e-15);
    }
}
