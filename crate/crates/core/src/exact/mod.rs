//! Exact enumeration engines for spins, FK bonds and current traces on
//! small graphs, plus the identity/inequality check suite built on them.
//!
//! Enumeration caps are explicit configuration: exceeding them is an
//! error, never a silent fallback to sampling.

pub mod checks;
pub mod fk;
pub mod ising;
pub mod traces;

pub use checks::{run_oracle_suite, CheckReport};
pub use fk::FkEnsemble;
pub use ising::{truncated_two_point, SpinBoundary, SpinEnsemble};
pub use traces::{PairTraceEnsemble, TraceEnsemble, TruncatedCurrentEnsemble};

/// Model parameters. `beta` and `p` are linked by `p = 1 - exp(-2 beta)`.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    /// Optional per-bundle coupling override `J_e >= 0` (default 1).
    pub couplings: Option<Vec<f64>>,
}

impl ModelParams {
    pub fn new(beta: f64) -> Self {
        ModelParams { beta, h: 0.0, couplings: None }
    }

    pub fn with_field(beta: f64, h: f64) -> Self {
        ModelParams { beta, h, couplings: None }
    }

    pub fn coupling(&self, bundle: usize) -> f64 {
        match &self.couplings {
            Some(j) => j[bundle],
            None => 1.0,
        }
    }

    /// FK bond parameter linked to this temperature.
    pub fn p(&self) -> f64 {
        beta_to_p(self.beta)
    }
}

pub fn beta_to_p(beta: f64) -> f64 {
    1.0 - (-2.0 * beta).exp()
}

pub fn p_to_beta(p: f64) -> f64 {
    assert!((0.0..1.0).contains(&p));
    -0.5 * (1.0 - p).ln()
}

/// Check the linked-parameter invariant to double precision.
pub fn params_linked(beta: f64, p: f64) -> bool {
    (beta_to_p(beta) - p).abs() <= 1e-12
}

/// Enumeration size limits.
#[derive(Debug, Clone)]
pub struct EnumCaps {
    /// Maximum free spins for spin enumeration (2^n states).
    pub max_spin_free: usize,
    /// Maximum edge bundles for FK enumeration (2^n states).
    pub max_fk_bundles: usize,
    /// Maximum edge bundles for trace enumeration (3^n states).
    pub max_trace_bundles: usize,
    /// Maximum product of state counts for paired trace enumeration.
    pub max_pair_states: u64,
    /// Maximum bundles for truncated full-current enumeration.
    pub max_current_bundles: usize,
    /// Per-bundle cap for truncated full-current enumeration.
    pub current_cap: u32,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_spin_free: 20,
            max_fk_bundles: 24,
            max_trace_bundles: 14,
            max_pair_states: 40_000_000,
            max_current_bundles: 5,
            current_cap: 16,
        }
    }
}

impl EnumCaps {
    /// Caps wide enough for the full oracle battery (boxes up to 25-27
    /// spins); enumeration passes take seconds, not milliseconds.
    pub fn battery() -> Self {
        EnumCaps { max_spin_free: 27, ..Default::default() }
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linked_parameters() {
        assert!(params_linked(0.5, 1.0 - (-1.0f64).exp()));
        assert!(!params_linked(0.5, 0.5));
        let p = 0.7;
        assert!((beta_to_p(p_to_beta(p)) - p).abs() < 1e-15);
    }

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let mut k = Kahan::default();
        k.add(1e16);
        for _ in 0..10 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 10.0);
    }
}
