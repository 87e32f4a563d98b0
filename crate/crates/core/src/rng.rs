//! Counter-based random streams.
//!
//! Every random decision in the crate is a pure function of a 64-bit seed
//! plus a small tuple of counters (chain id, sweep, edge index, ...), so
//! coupled chains and replicas reproduce bit-exactly and independently of
//! scheduling.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed counter RNG: `draw(&[ids])` hashes `(seed, ids...)` to a uniform.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    /// 64 uniform bits for the given counter tuple.
    pub fn bits(&self, ids: &[u64]) -> u64 {
        let mut h = mix64(self.seed ^ GAMMA);
        for (i, &v) in ids.iter().enumerate() {
            h = mix64(h ^ v.wrapping_add(GAMMA.wrapping_mul(i as u64 + 1)));
        }
        h
    }

    /// Uniform in `[0, 1)` for the given counter tuple.
    pub fn uniform(&self, ids: &[u64]) -> f64 {
        (self.bits(ids) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Derive a sequential stream keyed by this tuple.
    pub fn stream(&self, ids: &[u64]) -> StreamRng {
        StreamRng { state: self.bits(ids) }
    }
}

/// Sequential splitmix stream for bulk draws inside one chain.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        StreamRng { state: mix64(seed ^ GAMMA) }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.uniform() * n as f64) as usize % n
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
