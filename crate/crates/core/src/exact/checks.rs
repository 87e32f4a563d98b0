//! Machine verification of the exact identities and inequalities tying the
//! three representations together. Each check runs on every instance that
//! fits the enumeration caps and reports its worst deviation.

use crate::boundary::BoundaryPartition;
use crate::exact::traces::{EdgeObs, PairTraceEnsemble, TraceEnsemble, TruncatedCurrentEnsemble};
use crate::exact::{beta_to_p, EnumCaps, FkEnsemble, ModelParams, SpinBoundary, SpinEnsemble};
use crate::geometry::{attach_ghost, build_box_graph, pt2, GraphTopology, Pt};
use crate::rng::StreamRng;
use crate::unionfind::UnionFind;

/// Identity checks pass below this deviation.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped(String),
}

/// Outcome of one (instance, check, beta) cell.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub instance: String,
    pub check: String,
    pub beta: f64,
    pub max_dev: f64,
    pub tol: f64,
    pub status: CheckStatus,
}

impl CheckReport {
    fn pass_fail(instance: &str, check: &str, beta: f64, max_dev: f64, tol: f64) -> Self {
        let status = if max_dev <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckReport { instance: instance.into(), check: check.into(), beta, max_dev, tol, status }
    }

    fn skipped(instance: &str, check: &str, beta: f64, why: String) -> Self {
        CheckReport {
            instance: instance.into(),
            check: check.into(),
            beta,
            max_dev: 0.0,
            tol: IDENTITY_TOL,
            status: CheckStatus::Skipped(why),
        }
    }

    pub fn csv_row(&self) -> String {
        let status = match &self.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail => "fail".to_string(),
            CheckStatus::Skipped(r) => format!("skip:{}", r.replace(',', ";")),
        };
        format!("{},{},{},{:e},{:e},{status}", self.instance, self.check, self.beta, self.max_dev, self.tol)
    }
}

/// One battery instance: a graph and its ghost-augmented companion.
pub struct BatteryInstance {
    pub name: String,
    pub graph: GraphTopology,
    pub ghosted: GraphTopology,
}

/// The fixed instance battery: single edge, 2-path, 4-cycle, boxes.
pub fn battery() -> Vec<BatteryInstance> {
    let mut out = Vec::new();
    let mut push = |name: &str, g: GraphTopology| {
        let ghosted = attach_ghost(&g).unwrap();
        out.push(BatteryInstance { name: name.into(), graph: g, ghosted });
    };
    push("edge", GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0)]).unwrap());
    push("path2", GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0), pt2(2, 0)]).unwrap());
    push(
        "cycle4",
        GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0), pt2(0, 1), pt2(1, 1)]).unwrap(),
    );
    push("box2d-1", build_box_graph(2, 1, Pt::zero()).unwrap());
    push("box2d-2", build_box_graph(2, 2, Pt::zero()).unwrap());
    push("box3d-1", build_box_graph(3, 1, Pt::zero()).unwrap());
    out
}

fn far_pair(g: &GraphTopology) -> (u32, u32) {
    (0, g.vertex_count() as u32 - 1 - g.ghost().map_or(0, |_| 1))
}

/// Even-cardinality vertex subsets, smallest first, up to `budget`.
fn even_subsets(g: &GraphTopology, budget: usize) -> Vec<Vec<u32>> {
    let n = g.vertex_count() as u32 - g.ghost().map_or(0, |_| 1);
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    'pairs: for a in 0..n {
        for b in a + 1..n {
            if out.len() >= budget {
                break 'pairs;
            }
            out.push(vec![a, b]);
        }
    }
    if n >= 4 && out.len() < budget {
        out.push((0..4).collect());
        if n > 4 {
            out.push(vec![0, 1, n - 2, n - 1]);
        }
    }
    if out.len() < budget {
        // Full vertex set when even.
        if n % 2 == 0 {
            out.push((0..n).collect());
        }
    }
    out
}

/// Spin/bond correspondence: `<sigma_A> = phi0[every cluster meets A
/// evenly]` for even subsets up to a budget.
pub fn verify_edwards_sokal(
    name: &str,
    g: &GraphTopology,
    beta: f64,
    caps: &EnumCaps,
    budget: usize,
) -> CheckReport {
    let check = "edwards-sokal";
    let p = beta_to_p(beta);
    let fk = match FkEnsemble::new(g, p, BoundaryPartition::free(), caps) {
        Ok(f) => f,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let spins = match SpinEnsemble::new(g, &ModelParams::new(beta), SpinBoundary::Free, caps) {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let subsets = even_subsets(g, budget);
    let spin_side = spins.expectations(&subsets);
    let mut dev = 0.0f64;
    for (a, s) in subsets.iter().zip(spin_side) {
        let bond_side = fk.probability(|snap| snap.all_clusters_even(a));
        dev = dev.max((s - bond_side).abs());
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Sourced-pair connection probabilities against ratios of spin
/// correlations, on both the general and the two-point special case.
pub fn verify_switching(
    name: &str,
    g: &GraphTopology,
    gp: &GraphTopology,
    beta: f64,
    caps: &EnumCaps,
) -> CheckReport {
    let check = "switching";
    let (x, y) = far_pair(g);
    let mut source_sets: Vec<Vec<u32>> = vec![vec![], vec![x, y]];
    if g.vertex_count() >= 4 {
        source_sets.push(vec![1, 2]);
    }
    let free_spins = match SpinEnsemble::new(g, &ModelParams::new(beta), SpinBoundary::Free, caps)
    {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let plus_spins =
        match SpinEnsemble::new(gp, &ModelParams::new(beta), SpinBoundary::PlusGhost, caps) {
            Ok(s) => s,
            Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
        };
    let second = match TraceEnsemble::new(g, beta, None, &[], caps) {
        Ok(t) => t,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let mut dev = 0.0f64;
    for a in &source_sets {
        let first = match TraceEnsemble::new(gp, beta, None, a, caps) {
            Ok(t) => t,
            Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
        };
        let pair = match PairTraceEnsemble::new(&first, &second, caps) {
            Ok(p) => p,
            Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
        };
        let lhs = pair.connection_probability(&[x], &[y]);
        let mut axy = a.clone();
        axy.extend([x, y]);
        let e = plus_spins.expectations(&[axy, a.clone()]);
        let denom = e[1];
        if denom.abs() < 1e-14 {
            return CheckReport::skipped(name, check, beta, "vanishing <sigma_A>+".into());
        }
        let rhs = e[0] * free_spins.expectation(&[x, y]) / denom;
        dev = dev.max((lhs - rhs).abs());
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Truncation bound for products over two disjoint vertex sets:
/// `0 <= <s_A s_B>+ - <s_A>+<s_B>+ <= f(|A|) f(|B|) * sum <s_a; s_b>+`
/// where `f(m)` counts odd subsets through a fixed element: `f(1) = 1`,
/// `f(m) = 2^(m-2)` otherwise (so the constant is `2^(|A|+|B|-4)` whenever
/// both sets have at least two elements).
pub fn verify_correlation_truncation(
    name: &str,
    gp: &GraphTopology,
    beta: f64,
    a: &[u32],
    b: &[u32],
    caps: &EnumCaps,
) -> CheckReport {
    let check = "correlation-truncation";
    assert!(a.iter().all(|v| !b.contains(v)), "sets must be disjoint");
    let spins = match SpinEnsemble::new(gp, &ModelParams::new(beta), SpinBoundary::PlusGhost, caps)
    {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let mut obs: Vec<Vec<u32>> = Vec::new();
    let mut ab = a.to_vec();
    ab.extend_from_slice(b);
    obs.push(ab);
    obs.push(a.to_vec());
    obs.push(b.to_vec());
    for &u in a {
        for &v in b {
            obs.push(vec![u, v]);
            obs.push(vec![u]);
            obs.push(vec![v]);
        }
    }
    let e = spins.expectations(&obs);
    let lhs = e[0] - e[1] * e[2];
    let mut sum = 0.0;
    let mut idx = 3;
    for _ in 0..a.len() * b.len() {
        sum += e[idx] - e[idx + 1] * e[idx + 2];
        idx += 3;
    }
    let odd_through = |m: usize| if m <= 1 { 1.0 } else { 2f64.powi(m as i32 - 2) };
    let rhs = odd_through(a.len()) * odd_through(b.len()) * sum;
    let dev = (-lhs).max(lhs - rhs).max(0.0);
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Probabilities of all upward-closed cylinder events `{omega >= eta}`
/// under one boundary partition, via a superset-sum transform.
fn up_event_probabilities(
    g: &GraphTopology,
    p: f64,
    partition: BoundaryPartition,
    caps: &EnumCaps,
) -> Option<Vec<f64>> {
    let ens = FkEnsemble::new(g, p, partition, caps).ok()?;
    let n = g.bundle_count();
    let nv = g.vertex_count();
    let mut uf = UnionFind::new(nv);
    let mut roots = vec![0u32; nv];
    let mut weights = vec![0.0f64; 1 << n];
    let mut z = 0.0;
    for mask in 0..(1u64 << n) {
        let w = ens.weight_into(mask, &mut uf, &mut roots);
        weights[mask as usize] = w;
        z += w;
    }
    // Superset sums: after the transform, weights[eta] = P[omega >= eta].
    for bit in 0..n {
        for mask in 0..(1usize << n) {
            if mask >> bit & 1 == 0 {
                weights[mask] += weights[mask | 1 << bit];
            }
        }
    }
    Some(weights.iter().map(|w| w / z).collect())
}

/// Positive association of increasing events. Exhaustive over all pairs of
/// up-closures for graphs with at most `FKG_EXHAUSTIVE_EDGES` bundles,
/// sampled otherwise.
pub const FKG_EXHAUSTIVE_EDGES: usize = 6;

pub fn verify_fkg(name: &str, g: &GraphTopology, beta: f64, caps: &EnumCaps) -> CheckReport {
    let check = "fkg";
    let p = beta_to_p(beta);
    let n = g.bundle_count();
    if n > caps.max_fk_bundles {
        return CheckReport::skipped(name, check, beta, format!("{n} bundles over FK cap"));
    }
    let up = match up_event_probabilities(g, p, BoundaryPartition::free(), caps) {
        Some(u) => u,
        None => return CheckReport::skipped(name, check, beta, "enumeration failed".into()),
    };
    let mut dev = 0.0f64;
    if n <= FKG_EXHAUSTIVE_EDGES {
        for a in 0..(1usize << n) {
            for b in 0..(1usize << n) {
                let joint = up[a | b];
                dev = dev.max(up[a] * up[b] - joint);
            }
        }
    } else {
        let mut rng = StreamRng::new(0x46_4b_47);
        for _ in 0..2000 {
            let a = (rng.next_u64() & ((1 << n) - 1)) as usize;
            let b = (rng.next_u64() & ((1 << n) - 1)) as usize;
            dev = dev.max(up[a] * up[b] - up[a | b]);
        }
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Comparison between boundary conditions on the same up-event family.
pub fn verify_cbc(name: &str, g: &GraphTopology, beta: f64, caps: &EnumCaps) -> CheckReport {
    let check = "cbc";
    let p = beta_to_p(beta);
    let bdry = g.boundary_vertices();
    let mut partitions = vec![BoundaryPartition::free()];
    if bdry.len() >= 4 {
        partitions.push(BoundaryPartition::custom(vec![bdry[..bdry.len() / 2].to_vec()]));
    }
    partitions.push(BoundaryPartition::wired(g));
    let mut tables = Vec::new();
    for part in &partitions {
        match up_event_probabilities(g, p, part.clone(), caps) {
            Some(t) => tables.push(t),
            None => return CheckReport::skipped(name, check, beta, "over FK cap".into()),
        }
    }
    let mut dev = 0.0f64;
    for w in tables.windows(2) {
        for (lo, hi) in w[0].iter().zip(&w[1]) {
            dev = dev.max(lo - hi);
        }
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// First and second correlation-monotonicity inequalities on the spin side.
pub fn verify_griffiths(
    name: &str,
    g: &GraphTopology,
    gp: &GraphTopology,
    beta: f64,
    caps: &EnumCaps,
) -> CheckReport {
    let check = "griffiths";
    let (x, y) = far_pair(g);
    let plus = match SpinEnsemble::new(gp, &ModelParams::new(beta), SpinBoundary::PlusGhost, caps)
    {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    // First inequality: <s_A s_B>+ >= <s_A>+ <s_B>+ for a few pairs.
    let pairs: Vec<(Vec<u32>, Vec<u32>)> = vec![
        (vec![x], vec![y]),
        (vec![x], vec![x]),
        (vec![0], vec![1]),
    ];
    let mut obs = Vec::new();
    for (a, b) in &pairs {
        let mut ab = a.clone();
        ab.extend(b);
        obs.push(ab);
        obs.push(a.clone());
        obs.push(b.clone());
    }
    let e = plus.expectations(&obs);
    let mut dev = 0.0f64;
    for i in 0..pairs.len() {
        dev = dev.max(e[3 * i + 1] * e[3 * i + 2] - e[3 * i]);
    }
    // Second inequality: larger couplings raise <s_A>; equality at J' = J.
    let even_obs: Vec<Vec<u32>> = vec![vec![x, y], vec![0, 1]];
    let params_hi = ModelParams::new(beta);
    let mut weak = vec![1.0; g.bundle_count()];
    for (i, w) in weak.iter_mut().enumerate() {
        if i % 2 == 0 {
            *w = 0.5;
        }
    }
    let params_lo = ModelParams { beta, h: 0.0, couplings: Some(weak) };
    let free_hi = match SpinEnsemble::new(g, &params_hi, SpinBoundary::Free, caps) {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let free_lo = SpinEnsemble::new(g, &params_lo, SpinBoundary::Free, caps).unwrap();
    let hi = free_hi.expectations(&even_obs);
    let lo = free_lo.expectations(&even_obs);
    for (l, h) in lo.iter().zip(&hi) {
        dev = dev.max(l - h);
    }
    // J' = J must agree exactly (small instances; the pass is a pure rerun).
    if g.bundle_count() <= 16 {
        let same = SpinEnsemble::new(
            g,
            &ModelParams { beta, h: 0.0, couplings: Some(vec![1.0; g.bundle_count()]) },
            SpinBoundary::Free,
            caps,
        )
        .unwrap()
        .expectations(&even_obs);
        for (a, b) in same.iter().zip(&hi) {
            dev = dev.max((a - b).abs());
        }
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Single-edge conditional probabilities stay inside
/// `[p/(2-p), p]` for every configuration of the other edges and every
/// battery boundary partition.
pub fn verify_finite_energy(
    name: &str,
    g: &GraphTopology,
    beta: f64,
    caps: &EnumCaps,
) -> CheckReport {
    let check = "finite-energy";
    let p = beta_to_p(beta);
    let n = g.bundle_count();
    if n > 12 {
        return CheckReport::skipped(name, check, beta, format!("{n} bundles over cap 12"));
    }
    let mut dev = 0.0f64;
    for partition in [BoundaryPartition::free(), BoundaryPartition::wired(g)] {
        let ens = match FkEnsemble::new(g, p, partition, caps) {
            Ok(e) => e,
            Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
        };
        for e in 0..n {
            if g.bundle(e).mult != 1 {
                continue;
            }
            let lo = p / (2.0 - p);
            for rest in 0..(1u64 << (n - 1)) {
                // Insert a hole at position e.
                let low = rest & ((1 << e) - 1);
                let high = (rest >> e) << (e + 1);
                let mask = low | high;
                let c = ens.conditional_edge_probability(e, mask);
                dev = dev.max(lo - c).max(c - p);
            }
        }
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Influence identity: `phi1[w_e] - phi0[w_e] = (p/2)(<s_x s_y>_forced -
/// <s_x s_y>_free)` edge by edge.
pub fn verify_two_arms(name: &str, g: &GraphTopology, beta: f64, caps: &EnumCaps) -> CheckReport {
    let check = "two-arms";
    let p = beta_to_p(beta);
    let free = match FkEnsemble::new(g, p, BoundaryPartition::free(), caps) {
        Ok(e) => e,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let wired = FkEnsemble::new(g, p, BoundaryPartition::wired(g), caps).unwrap();
    let spins_free = match SpinEnsemble::new(g, &ModelParams::new(beta), SpinBoundary::Free, caps)
    {
        Ok(s) => s,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let spins_plus =
        match SpinEnsemble::new(g, &ModelParams::new(beta), SpinBoundary::PlusForced, caps) {
            Ok(s) => s,
            Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
        };
    let probe: Vec<usize> = if g.bundle_count() <= 4 {
        (0..g.bundle_count()).collect()
    } else {
        vec![0, g.bundle_count() / 2, g.bundle_count() - 1]
    };
    let obs: Vec<Vec<u32>> =
        probe.iter().map(|&e| vec![g.bundle(e).u, g.bundle(e).v]).collect();
    let corr_free = spins_free.expectations(&obs);
    let corr_plus = spins_plus.expectations(&obs);
    let mut dev = 0.0f64;
    for (i, &e) in probe.iter().enumerate() {
        if g.bundle(e).mult != 1 {
            continue;
        }
        let lhs = wired.edge_marginal(e) - free.edge_marginal(e);
        let rhs = 0.5 * p * (corr_plus[i] - corr_free[i]);
        dev = dev.max((lhs - rhs).abs());
    }
    CheckReport::pass_fail(name, check, beta, dev, IDENTITY_TOL)
}

/// Trace enumeration equals the capped full-current enumeration within the
/// analytic tail bound, on every (positivity, parity)-measurable probe.
pub fn verify_trace_reduction(
    name: &str,
    g: &GraphTopology,
    beta: f64,
    sources: &[u32],
    caps: &EnumCaps,
) -> CheckReport {
    let check = "trace-reduction";
    let trace = match TraceEnsemble::new(g, beta, None, sources, caps) {
        Ok(t) => t,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let full = match TruncatedCurrentEnsemble::new(g, beta, sources, caps) {
        Ok(t) => t,
        Err(e) => return CheckReport::skipped(name, check, beta, e.to_string()),
    };
    let n = g.bundle_count();
    let nv = g.vertex_count();
    let (x, y) = far_pair(g);
    // Probes: each bundle's positivity and parity, plus x<->y connectivity.
    let mut probes: Vec<Box<dyn Fn(&dyn EdgeObs) -> bool>> = Vec::new();
    for b in 0..n {
        probes.push(Box::new(move |s| s.positive(b)));
        probes.push(Box::new(move |s| s.odd(b)));
    }
    {
        let g2 = g.clone();
        probes.push(Box::new(move |s| {
            let mut uf = UnionFind::new(nv);
            let roots = crate::exact::traces::positivity_roots(&g2, &mut uf, |b| s.positive(b));
            roots[x as usize] == roots[y as usize]
        }));
    }
    let bound = full.tail_bound().max(IDENTITY_TOL);
    let mut dev = 0.0f64;
    for probe in &probes {
        let a = trace.probability(|s| probe(s as &dyn EdgeObs));
        let b = full.probability(|s| probe(s as &dyn EdgeObs));
        dev = dev.max((a - b).abs());
    }
    CheckReport::pass_fail(name, check, beta, dev, bound)
}

/// Run the full oracle suite over the battery.
pub fn run_oracle_suite(caps: &EnumCaps, betas: &[f64]) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for inst in battery() {
        let (x, y) = far_pair(&inst.graph);
        for &beta in betas {
            out.push(verify_edwards_sokal(&inst.name, &inst.graph, beta, caps, 24));
            out.push(verify_switching(&inst.name, &inst.graph, &inst.ghosted, beta, caps));
            out.push(verify_correlation_truncation(
                &inst.name,
                &inst.ghosted,
                beta,
                &[x],
                &[y],
                caps,
            ));
            if inst.graph.vertex_count() >= 6 {
                out.push(verify_correlation_truncation(
                    &inst.name,
                    &inst.ghosted,
                    beta,
                    &[x, x + 1],
                    &[y, y - 1],
                    caps,
                ));
            }
            out.push(verify_fkg(&inst.name, &inst.graph, beta, caps));
            out.push(verify_cbc(&inst.name, &inst.graph, beta, caps));
            out.push(verify_griffiths(&inst.name, &inst.graph, &inst.ghosted, beta, caps));
            out.push(verify_finite_energy(&inst.name, &inst.graph, beta, caps));
            out.push(verify_two_arms(&inst.name, &inst.graph, beta, caps));
            out.push(verify_trace_reduction(&inst.name, &inst.graph, beta, &[], caps));
            out.push(verify_trace_reduction(&inst.name, &inst.graph, beta, &[x, y], caps));
            out.push(verify_trace_reduction(&inst.name, &inst.ghosted, beta, &[x, y], caps));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_graphs() -> (GraphTopology, GraphTopology) {
        let g = GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0)]).unwrap();
        let gp = attach_ghost(&g).unwrap();
        (g, gp)
    }

    #[test]
    fn edwards_sokal_single_edge_closed_forms() {
        // tanh(beta) = p / (2 - p) at p = 1 - exp(-2 beta).
        let beta = 1.0f64;
        let p = beta_to_p(beta);
        assert!((beta.tanh() - p / (2.0 - p)).abs() < 1e-12);
        let (g, _) = edge_graphs();
        let rep = verify_edwards_sokal("edge", &g, beta, &EnumCaps::default(), 8);
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn switching_single_edge() {
        let (g, gp) = edge_graphs();
        let rep = verify_switching("edge", &g, &gp, 0.5, &EnumCaps::default());
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn switching_on_cycle_with_ghost() {
        let g = GraphTopology::from_points(2, &[pt2(0, 0), pt2(1, 0), pt2(0, 1), pt2(1, 1)])
            .unwrap();
        let gp = attach_ghost(&g).unwrap();
        let rep = verify_switching("cycle4", &g, &gp, 0.4, &EnumCaps::default());
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn two_arms_single_edge_numbers() {
        // p = 1/2 at beta = ln(2)/2: phi1 - phi0 = 1/2 - 1/3 = 1/6 and the
        // spin side gives (p/2)(1 - tanh beta).
        let beta = 0.5 * 2f64.ln();
        let p = beta_to_p(beta);
        assert!((p - 0.5).abs() < 1e-15);
        let (g, _) = edge_graphs();
        let caps = EnumCaps::default();
        let free = FkEnsemble::new(&g, p, BoundaryPartition::free(), &caps).unwrap();
        let wired = FkEnsemble::new(&g, p, BoundaryPartition::wired(&g), &caps).unwrap();
        let lhs = wired.edge_marginal(0) - free.edge_marginal(0);
        assert!((lhs - 1.0 / 6.0).abs() < 1e-13);
        let rhs = 0.5 * p * (1.0 - beta.tanh());
        assert!((lhs - rhs).abs() < 1e-13);
        let rep = verify_two_arms("edge", &g, beta, &caps);
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn cbc_single_edge_values() {
        let (g, _) = edge_graphs();
        let caps = EnumCaps::default();
        let free = FkEnsemble::new(&g, 0.5, BoundaryPartition::free(), &caps).unwrap();
        let wired = FkEnsemble::new(&g, 0.5, BoundaryPartition::wired(&g), &caps).unwrap();
        assert!(free.edge_marginal(0) <= wired.edge_marginal(0));
        let rep = verify_cbc("edge", &g, crate::exact::p_to_beta(0.5), &caps);
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn truncation_bound_near_zero_beta() {
        let (_, gp) = edge_graphs();
        let rep =
            verify_correlation_truncation("edge", &gp, 1e-6, &[0], &[1], &EnumCaps::default());
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn fkg_includes_sure_event() {
        // The sure event (eta = 0) gives equality; the check covers it.
        let (g, _) = edge_graphs();
        let rep = verify_fkg("edge", &g, 0.5, &EnumCaps::default());
        assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
    }

    #[test]
    fn small_suite_passes() {
        let caps = EnumCaps::default();
        for inst in battery().into_iter().take(3) {
            let (x, y) = far_pair(&inst.graph);
            for beta in [0.2, 1.0] {
                for rep in [
                    verify_edwards_sokal(&inst.name, &inst.graph, beta, &caps, 12),
                    verify_switching(&inst.name, &inst.graph, &inst.ghosted, beta, &caps),
                    verify_correlation_truncation(&inst.name, &inst.ghosted, beta, &[x], &[y], &caps),
                    verify_fkg(&inst.name, &inst.graph, beta, &caps),
                    verify_cbc(&inst.name, &inst.graph, beta, &caps),
                    verify_griffiths(&inst.name, &inst.graph, &inst.ghosted, beta, &caps),
                    verify_finite_energy(&inst.name, &inst.graph, beta, &caps),
                    verify_two_arms(&inst.name, &inst.graph, beta, &caps),
                    verify_trace_reduction(&inst.name, &inst.graph, beta, &[], &caps),
                ] {
                    assert_ne!(rep.status, CheckStatus::Fail, "{rep:?}");
                }
            }
        }
    }
}
