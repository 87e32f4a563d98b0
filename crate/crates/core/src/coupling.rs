//! The two algorithmic couplings.
//!
//! * The block-by-block boundary coupling pairs a configuration under an
//!   arbitrary boundary partition with one under the wired partition,
//!   exploring blocks inward from the boundary and shrinking the frontier
//!   whenever a block comes out "very good" (good and identical in both
//!   coordinates).
//! * The annulus coupling pairs a free-boundary configuration with one
//!   whose central box is forced open (the collapsed-core measure),
//!   revealing concentric edge shells and tracking how far the core
//!   mismatch propagates.
//!
//! Within-step conditional laws are realized by equilibrated coupled
//! heat-bath dynamics with shared uniforms: ordering and off-trace
//! equality are exact by construction, marginal quality is a matter of
//! sweep counts and is validated statistically against exact enumeration
//! on small instances.

use std::collections::BTreeSet;

use crate::boundary::BoundaryPartition;
use crate::error::{Error, Result};
use crate::geometry::{blocks, build_box_graph, BlockFamily, GraphTopology, LatticeBox, Pt};
use crate::renorm::{classify_block, BlockState, Estimate};
use crate::rng::CounterRng;
use crate::sampler::{
    es_sweep, monotone_pair_step, BondConfig, QueryScratch, SamplerGraph, SpinConfig,
};
use crate::unionfind::UnionFind;

/// Knobs for the coupling drivers.
#[derive(Debug, Clone)]
pub struct CouplingParams {
    /// Initial coupled equilibration sweeps over the whole box.
    pub burn_sweeps: usize,
    /// Refresh sweeps before each block/shell is frozen.
    pub step_sweeps: usize,
    /// Sweeps for the final identical remainder phase.
    pub final_sweeps: usize,
    /// Refresh window radius around the active block, in multiples of k;
    /// None refreshes the whole unsampled region every step.
    pub window: Option<i32>,
    /// Shell-size threshold coefficient: a shell counts as small when
    /// |D_t| < epsilon * n^(d-1).
    pub epsilon: f64,
    /// Spin/bond alternation sweeps for the stage-one free sample of the
    /// annulus coupling.
    pub stage_one_sweeps: usize,
    pub seed: u64,
    pub run_id: u64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        CouplingParams {
            burn_sweeps: 32,
            step_sweeps: 2,
            final_sweeps: 4,
            window: Some(3),
            epsilon: 0.1,
            stage_one_sweeps: 96,
            seed: 1,
            run_id: 0,
        }
    }
}

/// One exploration step of the boundary coupling.
#[derive(Debug, Clone)]
pub struct MixingStep {
    pub center: Pt,
    pub d_size: usize,
    pub very_good: bool,
}

/// Completed boundary-coupling run.
pub struct MixingRun {
    pub g: GraphTopology,
    pub family: BlockFamily,
    pub xi: BoundaryPartition,
    pub lo: BondConfig,
    pub hi: BondConfig,
    /// Edges sampled during the coupled phase (the exploration trace C_T).
    pub coupled_mask: Vec<bool>,
    pub steps: Vec<MixingStep>,
    /// Whether the boundary conditions induced on the remainder by the two
    /// restrictions coincided at termination.
    pub induced_agreement: bool,
}

/// Canonical partition of the vertices incident to unsampled bundles,
/// induced by sampled open bundles plus external wiring.
fn induced_partition(
    g: &GraphTopology,
    config: &BondConfig,
    sampled: &[bool],
    wiring: &BoundaryPartition,
) -> Vec<u32> {
    let mut uf = UnionFind::new(g.vertex_count());
    for class in wiring.classes() {
        for w in class.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    for (bid, b) in g.bundles().iter().enumerate() {
        if sampled[bid] && config.open(bid) {
            uf.union(b.u, b.v);
        }
    }
    let mut frontier = vec![false; g.vertex_count()];
    for (bid, b) in g.bundles().iter().enumerate() {
        if !sampled[bid] {
            frontier[b.u as usize] = true;
            frontier[b.v as usize] = true;
        }
    }
    let mut canon = vec![u32::MAX; g.vertex_count()];
    let mut out = Vec::new();
    let mut next = 0u32;
    for v in 0..g.vertex_count() as u32 {
        if !frontier[v as usize] {
            continue;
        }
        let r = uf.find(v) as usize;
        if canon[r] == u32::MAX {
            canon[r] = next;
            next += 1;
        }
        out.push(canon[r]);
    }
    out
}

struct PairChains<'g> {
    lo_sg: SamplerGraph<'g>,
    hi_sg: SamplerGraph<'g>,
    lo: BondConfig,
    hi: BondConfig,
    lo_scratch: QueryScratch,
    hi_scratch: QueryScratch,
    rng: CounterRng,
    run_id: u64,
    sweep_counter: u64,
}

impl<'g> PairChains<'g> {
    /// One coupled sweep over the listed bundles (shared uniforms).
    fn sweep(&mut self, order: &[usize]) -> Result<()> {
        self.sweep_counter += 1;
        for &e in order {
            let u = self.rng.uniform(&[self.run_id, self.sweep_counter, e as u64]);
            monotone_pair_step(
                &self.lo_sg,
                &self.hi_sg,
                &mut self.lo,
                &mut self.hi,
                e,
                u,
                &mut self.lo_scratch,
                &mut self.hi_scratch,
            )?;
        }
        Ok(())
    }

    /// One single-coordinate sweep, mirrored into the other coordinate.
    fn sweep_identical(&mut self, order: &[usize]) {
        self.sweep_counter += 1;
        for &e in order {
            let u = self.rng.uniform(&[self.run_id, self.sweep_counter, e as u64]);
            crate::sampler::heat_bath_step(&self.lo_sg, &mut self.lo, e, u, &mut self.lo_scratch);
            self.hi.set(e, self.lo.open(e));
        }
    }
}

fn unsampled_in_window(
    g: &GraphTopology,
    sampled: &[bool],
    window: Option<(LatticeBox, i32)>,
) -> Vec<usize> {
    (0..g.bundle_count())
        .filter(|&e| {
            if sampled[e] {
                return false;
            }
            match &window {
                None => true,
                Some((bx, r)) => {
                    let b = g.bundle(e);
                    bx.linf_dist(&g.point(b.u)).min(bx.linf_dist(&g.point(b.v))) <= *r
                }
            }
        })
        .collect()
}

/// Geometry shared by a batch of coupling runs on the same box.
pub struct BoxContext {
    pub g: GraphTopology,
    pub family: BlockFamily,
    pub n: i32,
    pub k: i32,
    block_bundles: Vec<Vec<usize>>,
    neighbor_lists: Vec<Vec<usize>>,
}

impl BoxContext {
    pub fn new(dim: usize, n: i32, k: i32) -> Result<Self> {
        if k > n {
            return Err(Error::Geometry("block radius exceeds box radius".into()));
        }
        let g = build_box_graph(dim, n, Pt::zero())?;
        let family = blocks(&LatticeBox::new(dim, Pt::zero(), n), k)?;
        let block_bundles: Vec<Vec<usize>> =
            (0..family.len()).map(|i| bundles_in_box_local(&g, &family.block(i))).collect();
        let neighbor_lists = (0..family.len()).map(|i| family.n_neighbors(i)).collect();
        Ok(BoxContext { g, family, n, k, block_bundles, neighbor_lists })
    }
}

/// Bundle indices with both endpoints inside the box, found by scanning
/// the box's own vertices.
fn bundles_in_box_local(g: &GraphTopology, bx: &LatticeBox) -> Vec<usize> {
    let mut out = Vec::new();
    for p in bx.points() {
        let Some(v) = g.index_of(&p) else { continue };
        for &(bid, w) in g.incident(v) {
            if w > v && !g.is_ghost_vertex(w) && bx.contains(&g.point(w)) {
                out.push(bid as usize);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Run the block-by-block coupling of `phi^xi` and the wired measure on
/// `Lambda_n` with block radius `k`.
pub fn run_mixing_coupling(
    dim: usize,
    n: i32,
    k: i32,
    p: f64,
    xi: &BoundaryPartition,
    params: &CouplingParams,
) -> Result<MixingRun> {
    let ctx = BoxContext::new(dim, n, k)?;
    run_mixing_in(&ctx, p, xi, params)
}

/// Context-reusing form of [`run_mixing_coupling`].
pub fn run_mixing_in(
    ctx: &BoxContext,
    p: f64,
    xi: &BoundaryPartition,
    params: &CouplingParams,
) -> Result<MixingRun> {
    let g = &ctx.g;
    let (n, k, dim) = (ctx.n, ctx.k, ctx.g.dim);
    let family = &ctx.family;
    let wired = BoundaryPartition::wired(g);
    if !xi.refines(&wired) {
        return Err(Error::Unsupported("xi must refine the wired partition".into()));
    }
    let mut pair = PairChains {
        lo_sg: SamplerGraph::new(g, p, xi)?,
        hi_sg: SamplerGraph::new(g, p, &wired)?,
        lo: BondConfig::all_closed(g),
        hi: BondConfig::all_open(g),
        lo_scratch: QueryScratch::new(g, xi),
        hi_scratch: QueryScratch::new(g, &wired),
        rng: CounterRng::new(params.seed),
        run_id: params.run_id,
        sweep_counter: 0,
    };
    let mut sampled = vec![false; g.bundle_count()];
    let all: Vec<usize> = (0..g.bundle_count()).collect();
    for _ in 0..params.burn_sweeps {
        pair.sweep(&all)?;
    }

    let mut frontier: BTreeSet<usize> = (0..family.len())
        .filter(|&i| family.centers[i].linf(&Pt::zero(), dim) + k >= n)
        .collect();
    let mut explored = vec![false; family.len()];
    let mut steps = Vec::new();

    while let Some(&bi) = frontier.iter().next() {
        frontier.remove(&bi);
        explored[bi] = true;
        let bx = family.block(bi);
        let window = params.window.map(|w| (bx, w * k));
        let refresh = unsampled_in_window(g, &sampled, window);
        for _ in 0..params.step_sweeps {
            pair.sweep(&refresh)?;
        }
        let d_size = ctx.block_bundles[bi].iter().filter(|&&e| !sampled[e]).count();
        for &e in &ctx.block_bundles[bi] {
            sampled[e] = true;
        }
        let identical =
            ctx.block_bundles[bi].iter().all(|&e| pair.lo.open(e) == pair.hi.open(e));
        let very_good = identical && classify_block(g, &pair.lo, &bx) == BlockState::Good;
        if !very_good {
            for &nb in &ctx.neighbor_lists[bi] {
                if !explored[nb] {
                    frontier.insert(nb);
                }
            }
        }
        steps.push(MixingStep { center: family.centers[bi], d_size, very_good });
    }

    let coupled_mask = sampled.clone();
    // Remainder phase: the induced boundary conditions must coincide;
    // sample once and share between the coordinates.
    let lo_part = induced_partition(g, &pair.lo, &sampled, xi);
    let hi_part = induced_partition(g, &pair.hi, &sampled, &wired);
    let induced_agreement = lo_part == hi_part;
    let rest: Vec<usize> = (0..g.bundle_count()).filter(|&e| !sampled[e]).collect();
    if !rest.is_empty() {
        for &e in &rest {
            pair.hi.set(e, pair.lo.open(e));
        }
        for _ in 0..params.final_sweeps {
            pair.sweep_identical(&rest);
        }
    }
    Ok(MixingRun {
        g: g.clone(),
        family: family.clone(),
        xi: xi.clone(),
        lo: pair.lo,
        hi: pair.hi,
        coupled_mask,
        steps,
        induced_agreement,
    })
}

/// Exact structural properties of a completed run.
#[derive(Debug, Clone)]
pub struct CouplingProps {
    pub order_violations: usize,
    pub off_trace_mismatches: usize,
    pub induced_agreement: bool,
}

impl CouplingProps {
    pub fn all_hold(&self) -> bool {
        self.order_violations == 0 && self.off_trace_mismatches == 0 && self.induced_agreement
    }
}

/// Check (i) pointwise ordering, (ii) equality off the coupled trace,
/// (iii) induced-boundary agreement, all recomputed from the stored run.
pub fn verify_coupling_props(run: &MixingRun) -> CouplingProps {
    let mut order_violations = 0;
    let mut off_trace_mismatches = 0;
    for e in 0..run.g.bundle_count() {
        if run.lo.open(e) && !run.hi.open(e) {
            order_violations += 1;
        }
        if !run.coupled_mask[e] && run.lo.open(e) != run.hi.open(e) {
            off_trace_mismatches += 1;
        }
    }
    let wired = BoundaryPartition::wired(&run.g);
    let lo_part = induced_partition(&run.g, &run.lo, &run.coupled_mask, &run.xi);
    let hi_part = induced_partition(&run.g, &run.hi, &run.coupled_mask, &wired);
    CouplingProps {
        order_violations,
        off_trace_mismatches,
        induced_agreement: lo_part == hi_part,
    }
}

/// Reach statistics: how often the coupled trace touches `E_{n/2}`, plus
/// the longest time-increasing chain of pairwise disjoint not-very-good
/// blocks with consecutive centers within `3k`.
#[derive(Debug, Clone)]
pub struct ReachReport {
    pub estimate: Estimate,
    pub mean_chain: f64,
    pub max_chain: usize,
}

pub fn chain_length(dim: usize, k: i32, steps: &[MixingStep]) -> usize {
    let bad: Vec<&MixingStep> = steps.iter().filter(|s| !s.very_good).collect();
    let mut best = vec![1usize; bad.len()];
    let mut max = 0usize;
    for i in 0..bad.len() {
        for j in 0..i {
            let d = bad[i].center.linf(&bad[j].center, dim);
            if d >= 2 * k + 1 && d <= 3 * k {
                best[i] = best[i].max(best[j] + 1);
            }
        }
        max = max.max(best[i]);
    }
    max
}

pub fn estimate_reach(
    dim: usize,
    n: i32,
    k: i32,
    p: f64,
    xi: &BoundaryPartition,
    replicas: usize,
    params: &CouplingParams,
) -> Result<ReachReport> {
    let ctx = BoxContext::new(dim, n, k)?;
    let half = ctx.g.bundles_in_box(&LatticeBox::new(dim, Pt::zero(), n / 2));
    let mut hits = 0usize;
    let mut chain_sum = 0usize;
    let mut chain_max = 0usize;
    for r in 0..replicas {
        let run_params = CouplingParams { run_id: params.run_id + r as u64, ..params.clone() };
        let run = run_mixing_in(&ctx, p, xi, &run_params)?;
        let reach = (0..run.g.bundle_count()).any(|e| run.coupled_mask[e] && half[e]);
        if reach {
            hits += 1;
        }
        let c = chain_length(dim, k, &run.steps);
        chain_sum += c;
        chain_max = chain_max.max(c);
    }
    Ok(ReachReport {
        estimate: Estimate::from_hits(hits, replicas),
        mean_chain: chain_sum as f64 / replicas as f64,
        max_chain: chain_max,
    })
}

/// Per-shell record of the annulus coupling.
#[derive(Debug, Clone)]
pub struct ShellRecord {
    pub t: usize,
    /// Bundles revealed next to bad blocks (D_t).
    pub near_bad: Vec<usize>,
    pub small_shell: bool,
    pub all_open: bool,
    /// Result of the induced-boundary comparison when it was evaluated.
    pub boundaries_agreed: Option<bool>,
}

/// Completed annulus-coupling run.
pub struct AnnulusRun {
    pub g: GraphTopology,
    pub family: BlockFamily,
    pub n: i32,
    pub k: i32,
    pub lo: BondConfig,
    pub hi: BondConfig,
    pub shells: Vec<ShellRecord>,
    pub merged_at: Option<usize>,
    pub epsilon_threshold: f64,
}

impl AnnulusRun {
    /// Bundle mask of `C_t = E_{2kt}`.
    pub fn c_mask(&self, t: usize) -> Vec<bool> {
        self.g.bundles_in_box(&LatticeBox::new(self.g.dim, Pt::zero(), 2 * self.k * t as i32))
    }
}

/// Blocks fully inside `E_radius` that are bad: not good in the lower
/// coordinate, or carrying different configurations.
fn bad_blocks_inside(
    g: &GraphTopology,
    family: &BlockFamily,
    lo: &BondConfig,
    hi: &BondConfig,
    radius: i32,
    block_bundles: &[Vec<usize>],
) -> Vec<usize> {
    (0..family.len())
        .filter(|&i| {
            let c = family.centers[i];
            if c.linf(&Pt::zero(), g.dim) + family.k > radius {
                return false;
            }
            let differs = block_bundles[i].iter().any(|&e| lo.open(e) != hi.open(e));
            differs || classify_block(g, lo, &family.block(i)) != BlockState::Good
        })
        .collect()
}

/// Run the annulus coupling on `Lambda_n`: the second coordinate has the
/// central `Lambda_{n/2}` box forced open.
pub fn run_annulus_coupling(
    dim: usize,
    n: i32,
    k: i32,
    p: f64,
    params: &CouplingParams,
) -> Result<AnnulusRun> {
    let ctx = BoxContext::new(dim, n, k)?;
    run_annulus_in(&ctx, p, params)
}

/// Context-reusing form of [`run_annulus_coupling`].
pub fn run_annulus_in(ctx: &BoxContext, p: f64, params: &CouplingParams) -> Result<AnnulusRun> {
    let (n, k) = (ctx.n, ctx.k);
    let dim = ctx.g.dim;
    if n % 2 != 0 || k < 1 || 4 * k > n {
        return Err(Error::Geometry("need even n and 4k <= n".into()));
    }
    let g = &ctx.g;
    let family = &ctx.family;
    let free = BoundaryPartition::free();
    // Stage one: a free sample on the whole box via alternation sweeps.
    let rng = CounterRng::new(params.seed);
    let mut state = (SpinConfig::all_plus(&g), BondConfig::all_closed(&g));
    for sweep in 0..params.stage_one_sweeps {
        es_sweep(&g, &mut state, p, &free, &rng, params.run_id ^ 0x53_54_41_47, sweep as u64)?;
    }
    let lo0 = state.1;
    let core_mask = g.bundles_in_box(&LatticeBox::new(dim, Pt::zero(), n / 2));
    let mut hi0 = lo0.clone();
    for e in 0..g.bundle_count() {
        if core_mask[e] {
            hi0.set(e, true);
        }
    }
    let mut pair = PairChains {
        lo_sg: SamplerGraph::new(&g, p, &free)?,
        hi_sg: SamplerGraph::new(&g, p, &free)?,
        lo: lo0,
        hi: hi0,
        lo_scratch: QueryScratch::new(&g, &free),
        hi_scratch: QueryScratch::new(&g, &free),
        rng,
        run_id: params.run_id,
        sweep_counter: 0,
    };
    // The lower coordinate keeps its stage-one core values and the upper
    // one its forced-open core: both are frozen from the start.
    let mut sampled = core_mask.clone();
    let annulus: Vec<usize> = (0..g.bundle_count()).filter(|&e| !sampled[e]).collect();
    for _ in 0..params.burn_sweeps {
        pair.sweep(&annulus)?;
    }

    let block_bundles = &ctx.block_bundles;

    let t_start = (n / (4 * k)) as usize;
    let t_end = 2 * t_start;
    let threshold = params.epsilon * (n as f64).powi(dim as i32 - 1);
    let mut shells = Vec::new();
    let mut merged_at = None;
    for t in t_start..t_end {
        let inner = 2 * k * t as i32;
        let outer = (2 * k * (t as i32 + 1)).min(n);
        let inner_mask = g.bundles_in_box(&LatticeBox::new(dim, Pt::zero(), inner));
        let outer_mask = g.bundles_in_box(&LatticeBox::new(dim, Pt::zero(), outer));
        let bad = bad_blocks_inside(g, family, &pair.lo, &pair.hi, inner, block_bundles);
        let bad_boxes: Vec<LatticeBox> = bad.iter().map(|&i| family.block(i)).collect();
        let shell: Vec<usize> = (0..g.bundle_count())
            .filter(|&e| outer_mask[e] && !inner_mask[e] && !sampled[e])
            .collect();
        let near_bad: Vec<usize> = shell
            .iter()
            .copied()
            .filter(|&e| {
                let b = g.bundle(e);
                bad_boxes.iter().any(|bx| {
                    bx.linf_dist(&g.point(b.u)).min(bx.linf_dist(&g.point(b.v))) <= 2 * k
                })
            })
            .collect();
        let small_shell = (near_bad.len() as f64) < threshold;

        // Reveal D_t.
        if !near_bad.is_empty() {
            let refresh = unsampled_in_window(&g, &sampled, None);
            if merged_at.is_some() {
                for _ in 0..params.step_sweeps {
                    pair.sweep_identical(&refresh);
                }
            } else {
                for _ in 0..params.step_sweeps {
                    pair.sweep(&refresh)?;
                }
            }
            for &e in &near_bad {
                sampled[e] = true;
            }
        }
        let all_open = near_bad.iter().all(|&e| pair.lo.open(e));
        let mut boundaries_agreed = None;
        if small_shell && all_open && merged_at.is_none() {
            let lo_part = induced_partition(&g, &pair.lo, &sampled, &free);
            let hi_part = induced_partition(&g, &pair.hi, &sampled, &free);
            let agree = lo_part == hi_part;
            boundaries_agreed = Some(agree);
            if agree {
                // Conditional laws coincide: couple diagonally from here on.
                for e in 0..g.bundle_count() {
                    if !sampled[e] {
                        pair.hi.set(e, pair.lo.open(e));
                    }
                }
                merged_at = Some(t);
            }
        }
        // Reveal the rest of the shell.
        let rest: Vec<usize> = shell.iter().copied().filter(|&e| !sampled[e]).collect();
        if !rest.is_empty() {
            let refresh = unsampled_in_window(&g, &sampled, None);
            if merged_at.is_some() {
                for _ in 0..params.step_sweeps {
                    pair.sweep_identical(&refresh);
                }
            } else {
                for _ in 0..params.step_sweeps {
                    pair.sweep(&refresh)?;
                }
            }
            for &e in &rest {
                sampled[e] = true;
            }
        }
        shells.push(ShellRecord { t, near_bad, small_shell, all_open, boundaries_agreed });
    }
    debug_assert!(sampled.iter().all(|&s| s));
    Ok(AnnulusRun {
        g: g.clone(),
        family: family.clone(),
        n,
        k,
        lo: pair.lo,
        hi: pair.hi,
        shells,
        merged_at,
        epsilon_threshold: threshold,
    })
}

/// Aggregate mechanism checks over a set of annulus runs.
#[derive(Debug, Clone, Default)]
pub struct ClaimsReport {
    /// Shells with a small, fully open near-bad zone where agreement
    /// beyond `C_t ∪ D_t` was testable / held.
    pub mechanism_checked: usize,
    pub mechanism_held: usize,
    /// Conditional frequency of the all-open event given a small shell.
    pub h_given_g: (usize, usize),
    /// Runs where no shell was small.
    pub no_small_shell: usize,
    pub runs: usize,
}

impl ClaimsReport {
    pub fn mechanism_ok(&self) -> bool {
        self.mechanism_checked == self.mechanism_held
    }

    pub fn all_small_fail_rate(&self) -> f64 {
        self.no_small_shell as f64 / self.runs as f64
    }
}

pub fn measure_claims(runs: &[AnnulusRun]) -> ClaimsReport {
    let mut report = ClaimsReport { runs: runs.len(), ..Default::default() };
    for run in runs {
        let mut any_small = false;
        for shell in &run.shells {
            if shell.small_shell {
                any_small = true;
                report.h_given_g.1 += 1;
                if shell.all_open {
                    report.h_given_g.0 += 1;
                }
            }
            if shell.small_shell && shell.all_open {
                report.mechanism_checked += 1;
                let mut excluded = run.c_mask(shell.t);
                for &e in &shell.near_bad {
                    excluded[e] = true;
                }
                let ok = (0..run.g.bundle_count())
                    .all(|e| excluded[e] || run.lo.open(e) == run.hi.open(e));
                if ok {
                    report.mechanism_held += 1;
                }
            }
        }
        if !any_small {
            report.no_small_shell += 1;
        }
    }
    report
}
