//! Attack-count model and Bayesian belief state.
//!
//! Attacks on a node arrive as a Poisson process truncated at `m`: counts
//! below `m` keep their Poisson mass, all mass from `m` upward collapses onto
//! `m`, and nothing sits above `m`. The unknown rate of each node carries a
//! Gamma belief updated with the raw observed count.

use crate::math;
use core::fmt;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Errors from constructing or updating the attack model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackModelError {
    /// Rate must be finite and ≥ 0.
    InvalidRate(f64),
    /// Truncation level must be ≥ 1.
    InvalidTruncation(u32),
    /// Gamma shape must be finite and > 0.
    InvalidShape(f64),
    /// Gamma rate must be finite and > 0.
    InvalidRateParam(f64),
    /// Observed count exceeds the truncation level.
    CountAboveTruncation { count: u32, truncation: u32 },
    /// At least two nodes are required.
    TooFewNodes(usize),
}

impl fmt::Display for AttackModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidRate(l) => write!(f, "attack rate must be finite and >= 0, got {l}"),
            Self::InvalidTruncation(m) => write!(f, "truncation level must be >= 1, got {m}"),
            Self::InvalidShape(a) => write!(f, "gamma shape must be finite and > 0, got {a}"),
            Self::InvalidRateParam(b) => write!(f, "gamma rate must be finite and > 0, got {b}"),
            Self::CountAboveTruncation { count, truncation } => {
                write!(f, "observed count {count} above truncation level {truncation}")
            }
            Self::TooFewNodes(n) => write!(f, "need at least 2 nodes, got {n}"),
        }
    }
}

impl core::error::Error for AttackModelError {}

/// Poisson distribution with rate `lambda`, truncated at `m`.
///
/// `pmf(k) = λ^k e^{-λ}/k!` for `k < m`; `pmf(m)` absorbs the whole upper
/// tail; `pmf(k) = 0` for `k > m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPoisson {
    lambda: f64,
    m: u32,
}

impl TruncatedPoisson {
    pub fn new(lambda: f64, m: u32) -> Result<Self, AttackModelError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(AttackModelError::InvalidRate(lambda));
        }
        if m < 1 {
            return Err(AttackModelError::InvalidTruncation(m));
        }
        Ok(Self { lambda, m })
    }

    pub fn rate(&self) -> f64 {
        self.lambda
    }

    pub fn truncation(&self) -> u32 {
        self.m
    }

    /// Probability of observing exactly `k` attacks.
    ///
    /// The tail mass at `k = m` is computed as the complement of the partial
    /// series and clamped to `[0, 1]`, which keeps cancellation from ever
    /// producing a small negative value.
    pub fn pmf(&self, k: u32) -> f64 {
        if k > self.m {
            return 0.0;
        }
        if k < self.m {
            return self.density_below(k);
        }
        // k == m: everything the plain Poisson puts at m or above.
        let mut below = 0.0;
        let mut term = math::exp(-self.lambda);
        for j in 0..self.m {
            if j > 0 {
                term *= self.lambda / j as f64;
            }
            below += term;
        }
        (1.0 - below).clamp(0.0, 1.0)
    }

    /// Plain Poisson mass at `k` (< m), via the term recurrence.
    fn density_below(&self, k: u32) -> f64 {
        let mut term = math::exp(-self.lambda);
        for j in 1..=k {
            term *= self.lambda / j as f64;
        }
        term
    }

    /// Expected number of attacks per step: `Σ_{k<m} k·pmf(k) + m·pmf(m)`.
    ///
    /// Single pass over the series; term values and the tail complement are
    /// the same ones `pmf` produces.
    pub fn mean(&self) -> f64 {
        let mut term = math::exp(-self.lambda);
        let mut below = term;
        let mut mean = 0.0;
        for k in 1..self.m {
            term *= self.lambda / k as f64;
            below += term;
            mean += k as f64 * term;
        }
        mean + self.m as f64 * (1.0 - below).clamp(0.0, 1.0)
    }

    /// Draws an untruncated Poisson variate by CDF inversion and clamps it to
    /// `m`. Sequential accumulation keeps the draw exact for small rates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut term = math::exp(-self.lambda);
        let mut acc = term;
        let mut k = 0u32;
        // The cap only guards against pathological rates; the expected number
        // of iterations is about λ.
        while u >= acc && term > 0.0 && k < 100_000 {
            k += 1;
            term *= self.lambda / k as f64;
            acc += term;
        }
        k.min(self.m)
    }
}

/// Gamma belief over an attack rate, in the shape/rate parameterization:
/// `Gamma(alpha, beta)` has mean `alpha / beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBelief {
    alpha: f64,
    beta: f64,
}

impl GammaBelief {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, AttackModelError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(AttackModelError::InvalidShape(alpha));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(AttackModelError::InvalidRateParam(beta));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Posterior after observing `count` attacks: `(α, β) → (α + count, β + 1)`.
    ///
    /// The count is taken as observed, truncation included; no de-truncation
    /// correction is applied. Counts above `truncation` are rejected.
    pub fn observe(self, count: u32, truncation: u32) -> Result<Self, AttackModelError> {
        if count > truncation {
            return Err(AttackModelError::CountAboveTruncation { count, truncation });
        }
        Ok(Self {
            alpha: self.alpha + count as f64,
            beta: self.beta + 1.0,
        })
    }

    /// Samples a rate from the belief.
    pub fn sample_rate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // rand_distr's Gamma takes shape/scale; scale = 1/rate.
        let gamma = Gamma::new(self.alpha, 1.0 / self.beta)
            .expect("parameters validated at construction");
        gamma.sample(rng)
    }
}

/// The probed network: nodes indexed `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSet {
    n: usize,
}

impl NodeSet {
    /// At least two nodes; the learning-rate and batch-size formulas need
    /// `ln N > 0`.
    pub fn new(n: usize) -> Result<Self, AttackModelError> {
        if n < 2 {
            return Err(AttackModelError::TooFewNodes(n));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> core::ops::Range<usize> {
        0..self.n
    }
}
