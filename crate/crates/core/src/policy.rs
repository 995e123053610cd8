//! Online node-selection policies.
//!
//! All three policies keep one positive weight per node, select nodes with
//! probability proportional to (a mixture over) those weights, and restart —
//! reset every weight to 1 — on a fixed batch grid so they can track a
//! drifting adversary.
//!
//! * [`PolicyState`] is the exponential-weights core: full-information
//!   updates `ω_i ← ω_i · ε^{μ_i·c_i}` from a mean-attack vector and the
//!   revealed costs.
//! * [`ThompsonHedgeState`] drives those updates with mean-attack estimates
//!   computed from posterior-sampled rates, updating the probed node's
//!   belief each step.
//! * [`Rexp3State`] is the restarted EXP3 baseline under bandit feedback:
//!   only the probed node's total reward is used, importance-weighted.

use crate::attack::{AttackModelError, GammaBelief, TruncatedPoisson};
use crate::math;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

/// Weights above this are rescaled to keep long reward streaks finite.
/// Selection probabilities are invariant under the common rescale.
const WEIGHT_RESCALE_THRESHOLD: f64 = 1e150;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    /// The learning-rate formula needs T > ln(N)/2 so the root stays below 1.
    HorizonTooShort { horizon: usize, n_nodes: usize },
    TooFewNodes(usize),
    /// Variation budget fed to a batch-size formula must be positive.
    InvalidVariation(f64),
    InvalidTruncation(u32),
    /// A revealed cost fell outside [0, 1/m].
    CostOutOfRange { node: usize, value: f64, cap: f64 },
    /// A mean-attack value was negative or not finite.
    InvalidMeanAttacks { node: usize, value: f64 },
    /// Bandit reward must lie in [0, 1].
    RewardOutOfRange(f64),
    /// Exploration rate must lie in (0, 1].
    InvalidGamma(f64),
    /// Learning base must be finite and > 1.
    InvalidEpsilon(f64),
    InvalidBatchSize(usize),
    ChosenOutOfRange { chosen: usize, n_nodes: usize },
    /// Mismatched vector length against the node count.
    LengthMismatch { expected: usize, got: usize },
    Belief(AttackModelError),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HorizonTooShort { horizon, n_nodes } => write!(
                f,
                "horizon {horizon} too short for {n_nodes} nodes: need T > ln(N)/2"
            ),
            Self::TooFewNodes(n) => write!(f, "need at least 2 nodes, got {n}"),
            Self::InvalidVariation(v) => write!(f, "variation budget must be > 0, got {v}"),
            Self::InvalidTruncation(m) => write!(f, "truncation level must be >= 1, got {m}"),
            Self::CostOutOfRange { node, value, cap } => {
                write!(f, "cost {value} at node {node} outside [0, {cap}]")
            }
            Self::InvalidMeanAttacks { node, value } => {
                write!(f, "mean attacks {value} at node {node} invalid")
            }
            Self::RewardOutOfRange(r) => write!(f, "bandit reward {r} outside [0, 1]"),
            Self::InvalidGamma(g) => write!(f, "exploration rate {g} outside (0, 1]"),
            Self::InvalidEpsilon(e) => write!(f, "learning base {e} must be finite and > 1"),
            Self::InvalidBatchSize(d) => write!(f, "batch size must be >= 1, got {d}"),
            Self::ChosenOutOfRange { chosen, n_nodes } => {
                write!(f, "chosen node {chosen} out of range for {n_nodes} nodes")
            }
            Self::LengthMismatch { expected, got } => {
                write!(f, "vector length {got}, expected {expected}")
            }
            Self::Belief(e) => write!(f, "belief update failed: {e}"),
        }
    }
}

impl core::error::Error for PolicyError {}

impl From<AttackModelError> for PolicyError {
    fn from(e: AttackModelError) -> Self {
        Self::Belief(e)
    }
}

/// Which revealed cost enters the exponent of the weight update.
///
/// The protocol reveals every node's cost, and the full-information variant
/// uses each node's own cost. `Chosen` keeps the variant where every node is
/// updated with the probed node's cost, for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateCost {
    #[default]
    Own,
    Chosen,
}

/// Learning base `ε = (1 − √(ln N / 2T))⁻¹`; requires `T > ln(N)/2`.
pub fn hedge_epsilon(n_nodes: usize, horizon: usize) -> Result<f64, PolicyError> {
    if n_nodes < 2 {
        return Err(PolicyError::TooFewNodes(n_nodes));
    }
    let ln_n = math::ln(n_nodes as f64);
    let t = horizon as f64;
    if t <= ln_n / 2.0 {
        return Err(PolicyError::HorizonTooShort { horizon, n_nodes });
    }
    Ok(1.0 / (1.0 - math::sqrt(ln_n / (2.0 * t))))
}

/// Restart batch size `Δ = ⌈(ln N)^{1/3} (T/(m·V_T))^{2/3}⌉`, clamped to `[1, T]`.
pub fn hedge_batch_size(
    horizon: usize,
    truncation: u32,
    variation: f64,
    n_nodes: usize,
) -> Result<usize, PolicyError> {
    batch_size_common(horizon, truncation, variation, n_nodes, math::ln(n_nodes as f64))
}

/// Restart batch size for the bandit baseline:
/// `Δ_B = ⌈(N ln N)^{1/3} (T/(m·V_T))^{2/3}⌉`, clamped to `[1, T]`.
pub fn rexp3_batch_size(
    horizon: usize,
    truncation: u32,
    variation: f64,
    n_nodes: usize,
) -> Result<usize, PolicyError> {
    let n = n_nodes as f64;
    batch_size_common(horizon, truncation, variation, n_nodes, n * math::ln(n))
}

fn batch_size_common(
    horizon: usize,
    truncation: u32,
    variation: f64,
    n_nodes: usize,
    log_factor: f64,
) -> Result<usize, PolicyError> {
    if n_nodes < 2 {
        return Err(PolicyError::TooFewNodes(n_nodes));
    }
    if truncation < 1 {
        return Err(PolicyError::InvalidTruncation(truncation));
    }
    if !variation.is_finite() || variation <= 0.0 {
        return Err(PolicyError::InvalidVariation(variation));
    }
    let t = horizon as f64;
    let raw = math::cbrt(log_factor) * math::powf(t / (truncation as f64 * variation), 2.0 / 3.0);
    let delta = math::ceil(raw);
    let clamped = if delta < 1.0 {
        1
    } else if delta >= t {
        horizon
    } else {
        delta as usize
    };
    Ok(clamped.max(1))
}

/// Per-batch exploration rate `γ = min{1, √(N ln N / ((e−1)·Δ_B))}`.
pub fn rexp3_gamma(n_nodes: usize, batch_size: usize) -> f64 {
    let n = n_nodes as f64;
    let g = math::sqrt(n * math::ln(n) / ((core::f64::consts::E - 1.0) * batch_size as f64));
    g.min(1.0)
}

/// Exponential-weights state with batch restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    weights: Vec<f64>,
    epsilon: f64,
    ln_epsilon: f64,
    batch_size: usize,
    step_in_batch: usize,
    time: usize,
    cost_cap: f64,
    update_cost: UpdateCost,
}

impl PolicyState {
    /// `cost_cap` is the 1/m bound revealed costs are validated against.
    pub fn new(
        n_nodes: usize,
        epsilon: f64,
        batch_size: usize,
        cost_cap: f64,
        update_cost: UpdateCost,
    ) -> Result<Self, PolicyError> {
        if n_nodes < 2 {
            return Err(PolicyError::TooFewNodes(n_nodes));
        }
        if batch_size < 1 {
            return Err(PolicyError::InvalidBatchSize(batch_size));
        }
        if !epsilon.is_finite() || epsilon <= 1.0 {
            return Err(PolicyError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            weights: vec![1.0; n_nodes],
            epsilon,
            ln_epsilon: math::ln(epsilon),
            batch_size,
            step_in_batch: 0,
            time: 1,
            cost_cap,
            update_cost,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn step_in_batch(&self) -> usize {
        self.step_in_batch
    }

    /// Current step, 1-based.
    pub fn time(&self) -> usize {
        self.time
    }

    /// `p_i = ω_i / Σ_j ω_j`.
    pub fn selection_probs(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Samples a node index with probability proportional to its weight.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_proportional(&self.weights, rng)
    }

    /// Full-information weight update with the revealed cost vector and the
    /// mean attacks per node, then the batch-clock advance (weights reset to
    /// 1 when the batch completes).
    pub fn hedge_update(
        mut self,
        mean_attacks: &[f64],
        costs: &[f64],
        chosen: usize,
    ) -> Result<Self, PolicyError> {
        let n = self.weights.len();
        if mean_attacks.len() != n {
            return Err(PolicyError::LengthMismatch { expected: n, got: mean_attacks.len() });
        }
        if costs.len() != n {
            return Err(PolicyError::LengthMismatch { expected: n, got: costs.len() });
        }
        if chosen >= n {
            return Err(PolicyError::ChosenOutOfRange { chosen, n_nodes: n });
        }
        for (i, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c < 0.0 || c > self.cost_cap * (1.0 + 1e-12) {
                return Err(PolicyError::CostOutOfRange { node: i, value: c, cap: self.cost_cap });
            }
        }
        for (i, &mu) in mean_attacks.iter().enumerate() {
            if !mu.is_finite() || mu < 0.0 {
                return Err(PolicyError::InvalidMeanAttacks { node: i, value: mu });
            }
        }
        let mut max_w = 0.0f64;
        for i in 0..n {
            let cost = match self.update_cost {
                UpdateCost::Own => costs[i],
                UpdateCost::Chosen => costs[chosen],
            };
            self.weights[i] *= math::exp(mean_attacks[i] * cost * self.ln_epsilon);
            max_w = max_w.max(self.weights[i]);
        }
        if max_w > WEIGHT_RESCALE_THRESHOLD {
            for w in &mut self.weights {
                *w /= max_w;
            }
        }
        self.advance();
        Ok(self)
    }

    fn advance(&mut self) {
        self.step_in_batch += 1;
        self.time += 1;
        if self.step_in_batch == self.batch_size {
            self.step_in_batch = 0;
            self.weights.fill(1.0);
        }
    }
}

/// One resolved protocol step: the probed node, its observed attack count,
/// the achieved reward, and the full revealed cost vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<'a> {
    chosen: usize,
    count: u32,
    reward: f64,
    revealed_costs: &'a [f64],
}

impl<'a> StepOutcome<'a> {
    /// Computes `reward = count · revealed_costs[chosen]` and checks it lies
    /// in `[0, 1]`.
    pub fn new(
        chosen: usize,
        count: u32,
        revealed_costs: &'a [f64],
    ) -> Result<Self, PolicyError> {
        if chosen >= revealed_costs.len() {
            return Err(PolicyError::ChosenOutOfRange { chosen, n_nodes: revealed_costs.len() });
        }
        let reward = count as f64 * revealed_costs[chosen];
        if !(0.0..=1.0 + 1e-12).contains(&reward) {
            return Err(PolicyError::RewardOutOfRange(reward));
        }
        Ok(Self { chosen, count, reward, revealed_costs })
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn revealed_costs(&self) -> &[f64] {
        self.revealed_costs
    }
}

/// Hedge driven by posterior-sampled rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ThompsonHedgeState {
    base: PolicyState,
    beliefs: Vec<GammaBelief>,
    truncation: u32,
    mean_scratch: Vec<f64>,
}

impl ThompsonHedgeState {
    pub fn new(
        beliefs: Vec<GammaBelief>,
        truncation: u32,
        epsilon: f64,
        batch_size: usize,
        update_cost: UpdateCost,
    ) -> Result<Self, PolicyError> {
        if truncation < 1 {
            return Err(PolicyError::InvalidTruncation(truncation));
        }
        let n = beliefs.len();
        let base = PolicyState::new(
            n,
            epsilon,
            batch_size,
            1.0 / truncation as f64,
            update_cost,
        )?;
        Ok(Self { base, beliefs, truncation, mean_scratch: vec![0.0; n] })
    }

    pub fn base(&self) -> &PolicyState {
        &self.base
    }

    pub fn beliefs(&self) -> &[GammaBelief] {
        &self.beliefs
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.base.select(rng)
    }

    /// Updates the probed node's belief, samples a rate for every node from
    /// the current posteriors, converts each to a mean attack count, and
    /// applies the weight update with the revealed costs.
    pub fn observe<R: Rng + ?Sized>(
        mut self,
        outcome: &StepOutcome<'_>,
        rng: &mut R,
    ) -> Result<Self, PolicyError> {
        let n = self.beliefs.len();
        if outcome.revealed_costs().len() != n {
            return Err(PolicyError::LengthMismatch {
                expected: n,
                got: outcome.revealed_costs().len(),
            });
        }
        self.beliefs[outcome.chosen()] =
            self.beliefs[outcome.chosen()].observe(outcome.count(), self.truncation)?;
        for i in 0..n {
            let rate = self.beliefs[i].sample_rate(rng);
            self.mean_scratch[i] = TruncatedPoisson::new(rate, self.truncation)?.mean();
        }
        let mean_attacks = core::mem::take(&mut self.mean_scratch);
        self.base = self
            .base
            .hedge_update(&mean_attacks, outcome.revealed_costs(), outcome.chosen())?;
        self.mean_scratch = mean_attacks;
        Ok(self)
    }
}

/// Restarted EXP3 with bandit feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct Rexp3State {
    weights: Vec<f64>,
    gamma: f64,
    batch_size: usize,
    step_in_batch: usize,
    time: usize,
}

impl Rexp3State {
    pub fn new(n_nodes: usize, gamma: f64, batch_size: usize) -> Result<Self, PolicyError> {
        if n_nodes < 2 {
            return Err(PolicyError::TooFewNodes(n_nodes));
        }
        if !(0.0..=1.0).contains(&gamma) || gamma == 0.0 {
            return Err(PolicyError::InvalidGamma(gamma));
        }
        if batch_size < 1 {
            return Err(PolicyError::InvalidBatchSize(batch_size));
        }
        Ok(Self {
            weights: vec![1.0; n_nodes],
            gamma,
            batch_size,
            step_in_batch: 0,
            time: 1,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// Mixed exploration distribution `p_i = (1−γ)·ω_i/Σω + γ/N`.
    pub fn selection_probs(&self) -> Vec<f64> {
        let n = self.weights.len() as f64;
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .map(|w| (1.0 - self.gamma) * w / total + self.gamma / n)
            .collect()
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let probs = self.selection_probs();
        sample_proportional(&probs, rng)
    }

    /// Importance-weighted update from the probed node's total reward:
    /// `x̂ = reward / p_chosen` for the probed node (0 elsewhere), then
    /// `ω_chosen ← ω_chosen · exp(γ·x̂/N)` and the batch-clock advance.
    pub fn observe(mut self, chosen: usize, reward: f64) -> Result<Self, PolicyError> {
        let n = self.weights.len();
        if chosen >= n {
            return Err(PolicyError::ChosenOutOfRange { chosen, n_nodes: n });
        }
        if !(0.0..=1.0 + 1e-12).contains(&reward) {
            return Err(PolicyError::RewardOutOfRange(reward));
        }
        let p = {
            let total: f64 = self.weights.iter().sum();
            (1.0 - self.gamma) * self.weights[chosen] / total + self.gamma / n as f64
        };
        let estimate = reward / p;
        self.weights[chosen] *= math::exp(self.gamma * estimate / n as f64);
        if self.weights[chosen] > WEIGHT_RESCALE_THRESHOLD {
            let max_w = self.weights[chosen];
            for w in &mut self.weights {
                *w /= max_w;
            }
        }
        self.step_in_batch += 1;
        self.time += 1;
        if self.step_in_batch == self.batch_size {
            self.step_in_batch = 0;
            self.weights.fill(1.0);
        }
        Ok(self)
    }
}

/// Samples an index proportionally to nonnegative weights.
fn sample_proportional<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn epsilon_formula() {
        let eps = hedge_epsilon(10, 1000).unwrap();
        assert!((eps - 1.0351224).abs() < 1e-6);
        // Long horizons push ε toward 1 from above.
        let eps_long = hedge_epsilon(2, 100_000_000).unwrap();
        assert!(eps_long > 1.0 && eps_long < 1.0001);
        // ln(10)/2 ≈ 1.15 > 1 → error.
        assert!(matches!(
            hedge_epsilon(10, 1),
            Err(PolicyError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn batch_size_formula() {
        assert_eq!(hedge_batch_size(1000, 3, 10.0, 10).unwrap(), 14);
        // V_T = T/m makes the ratio 1, leaving ⌈(ln N)^{1/3}⌉.
        let expect = math::ceil(math::cbrt(math::ln(10.0))) as usize;
        assert_eq!(hedge_batch_size(900, 3, 300.0, 10).unwrap(), expect);
        // Huge variation clamps to 1.
        assert_eq!(hedge_batch_size(1000, 3, 1e12, 10).unwrap(), 1);
        // Tiny variation clamps to T.
        assert_eq!(hedge_batch_size(1000, 3, 1e-12, 10).unwrap(), 1000);
        assert!(hedge_batch_size(1000, 3, 0.0, 10).is_err());
    }

    #[test]
    fn selection_frequencies() {
        let state = PolicyState::new(10, 1.5, 100, 1.0, UpdateCost::Own).unwrap();
        let mut rng = stream(1, &[0]);
        let n = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..n {
            counts[state.select(&mut rng)] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.1).abs() < 0.003, "uniform freq {freq}");
        }

        // Weights (1, 2): node 1 should win 2/3 of the time.
        let mut state = PolicyState::new(2, 2.0, 100, 1.0, UpdateCost::Own).unwrap();
        state.weights = alloc::vec![1.0, 2.0];
        let mut hits = 0usize;
        for _ in 0..n {
            if state.select(&mut rng) == 1 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.01, "ratio freq {freq}");

        // Dominant weight.
        let mut state = PolicyState::new(2, 2.0, 100, 1.0, UpdateCost::Own).unwrap();
        state.weights = alloc::vec![1e9, 1.0];
        let mut hits = 0usize;
        for _ in 0..10_000 {
            if state.select(&mut rng) == 0 {
                hits += 1;
            }
        }
        assert!(hits >= 9_990);
    }

    #[test]
    fn hedge_update_closed_form() {
        // ε = 2, μ = (1, 2), c = (0.5, 0.5): ω' = (√2, 2), p'₂ = 2/(2+√2).
        let state = PolicyState::new(2, 2.0, 100, 1.0, UpdateCost::Own).unwrap();
        let state = state.hedge_update(&[1.0, 2.0], &[0.5, 0.5], 0).unwrap();
        assert!((state.weights()[0] - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((state.weights()[1] - 2.0).abs() < 1e-12);
        let p = state.selection_probs();
        assert!((p[1] - 2.0 / (2.0 + core::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((p[1] - 0.5858).abs() < 1e-4);
    }

    #[test]
    fn hedge_update_common_factor_cancels() {
        let state = PolicyState::new(3, 1.7, 100, 1.0, UpdateCost::Own).unwrap();
        let before = state.selection_probs();
        // All μ_i·c_i equal → distribution unchanged.
        let state = state.hedge_update(&[2.0, 1.0, 4.0], &[0.25, 0.5, 0.125], 1).unwrap();
        let after = state.selection_probs();
        for (a, b) in before.iter().zip(after.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hedge_restart_resets_weights() {
        let mut state = PolicyState::new(2, 2.0, 3, 1.0, UpdateCost::Own).unwrap();
        for step in 0..6 {
            state = state.hedge_update(&[1.0, 0.2], &[0.4, 0.1], 0).unwrap();
            if (step + 1) % 3 == 0 {
                assert_eq!(state.weights(), &[1.0, 1.0], "restart at step {step}");
                assert_eq!(state.step_in_batch(), 0);
            }
        }
        assert_eq!(state.time(), 7);
    }

    #[test]
    fn hedge_rejects_bad_costs() {
        let state = PolicyState::new(2, 2.0, 10, 0.25, UpdateCost::Own).unwrap();
        let err = state.clone().hedge_update(&[1.0, 1.0], &[0.3, 0.1], 0);
        assert!(matches!(err, Err(PolicyError::CostOutOfRange { .. })));
        let err = state.hedge_update(&[1.0, 1.0], &[-0.1, 0.1], 0);
        assert!(matches!(err, Err(PolicyError::CostOutOfRange { .. })));
    }

    #[test]
    fn chosen_cost_variant() {
        let state = PolicyState::new(2, 2.0, 100, 1.0, UpdateCost::Chosen).unwrap();
        // With the probed node's cost everywhere, exponents are μ_i·c_0.
        let state = state.hedge_update(&[1.0, 2.0], &[0.5, 0.125], 0).unwrap();
        assert!((state.weights()[0] - math::powf(2.0, 0.5)).abs() < 1e-12);
        assert!((state.weights()[1] - math::powf(2.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance_of_selection() {
        let mut state = PolicyState::new(4, 1.3, 50, 1.0, UpdateCost::Own).unwrap();
        state.weights = alloc::vec![0.5, 1.5, 2.5, 0.25];
        let p1 = state.selection_probs();
        for w in &mut state.weights {
            *w *= 77.0;
        }
        let p2 = state.selection_probs();
        for (a, b) in p1.iter().zip(p2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = p2.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thompson_updates_only_probed_belief() {
        let beliefs = alloc::vec![
            GammaBelief::new(2.0, 2.0).unwrap(),
            GammaBelief::new(2.0, 2.0).unwrap(),
            GammaBelief::new(2.0, 2.0).unwrap(),
        ];
        let state = ThompsonHedgeState::new(beliefs, 3, 1.5, 100, UpdateCost::Own).unwrap();
        let costs = [0.1, 0.2, 0.05];
        let outcome = StepOutcome::new(1, 2, &costs).unwrap();
        let mut rng = stream(8, &[0]);
        let state = state.observe(&outcome, &mut rng).unwrap();
        assert_eq!(
            (state.beliefs()[1].alpha(), state.beliefs()[1].beta()),
            (4.0, 3.0)
        );
        for i in [0usize, 2] {
            assert_eq!(
                (state.beliefs()[i].alpha(), state.beliefs()[i].beta()),
                (2.0, 2.0)
            );
        }
    }

    #[test]
    fn thompson_trajectory_deterministic() {
        let mk = || {
            ThompsonHedgeState::new(
                alloc::vec![GammaBelief::new(2.0, 2.0).unwrap(); 3],
                3,
                1.4,
                7,
                UpdateCost::Own,
            )
            .unwrap()
        };
        let mut a = mk();
        let mut b = mk();
        let mut rng_a = stream(4, &[4]);
        let mut rng_b = stream(4, &[4]);
        let costs = [0.2, 0.1, 0.3];
        for step in 0..20 {
            let ca = a.select(&mut rng_a);
            let cb = b.select(&mut rng_b);
            assert_eq!(ca, cb);
            let outcome_a = StepOutcome::new(ca, (step % 4) as u32 % 4, &costs).unwrap();
            let outcome_b = StepOutcome::new(cb, (step % 4) as u32 % 4, &costs).unwrap();
            a = a.observe(&outcome_a, &mut rng_a).unwrap();
            b = b.observe(&outcome_b, &mut rng_b).unwrap();
            assert_eq!(a.base().weights(), b.base().weights());
        }
    }

    #[test]
    fn point_mass_beliefs_reproduce_hedge() {
        // Near-degenerate Gamma beliefs pin λ̂ ≈ λ, so updates coincide with
        // Hedge fed the true rates; selection draws share one stream while
        // posterior sampling uses its own.
        let n = 3;
        let m = 3u32;
        let scale = 1e18;
        let rates = [0.5, 1.0, 1.5];
        let beliefs: Vec<GammaBelief> = rates
            .iter()
            .map(|&r| GammaBelief::new(r * scale, scale).unwrap())
            .collect();
        let mu: Vec<f64> = rates
            .iter()
            .map(|&r| TruncatedPoisson::new(r, m).unwrap().mean())
            .collect();
        let eps = hedge_epsilon(n, 200).unwrap();
        let mut th = ThompsonHedgeState::new(beliefs, m, eps, 9, UpdateCost::Own).unwrap();
        let mut hedge = PolicyState::new(n, eps, 9, 1.0 / m as f64, UpdateCost::Own).unwrap();
        let mut sel_a = stream(2, &[0]);
        let mut sel_b = stream(2, &[0]);
        let mut sampler = stream(2, &[1]);
        let mut env = stream(2, &[2]);
        let model: Vec<TruncatedPoisson> = rates
            .iter()
            .map(|&r| TruncatedPoisson::new(r, m).unwrap())
            .collect();
        for _ in 0..60 {
            let costs: Vec<f64> = (0..n).map(|_| env.random::<f64>() / m as f64).collect();
            let ca = th.select(&mut sel_a);
            let cb = hedge.select(&mut sel_b);
            assert_eq!(ca, cb);
            let k = model[ca].sample(&mut env);
            let outcome = StepOutcome::new(ca, k, &costs).unwrap();
            th = th.observe(&outcome, &mut sampler).unwrap();
            hedge = hedge.hedge_update(&mu, &costs, cb).unwrap();
            for (a, b) in th.base().weights().iter().zip(hedge.weights().iter()) {
                assert!((a - b).abs() < 1e-9, "weights diverged: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rexp3_zero_rewards_stay_uniform() {
        let n = 4;
        let state = Rexp3State::new(n, 0.5, 100).unwrap();
        let mut rng = stream(6, &[0]);
        let mut s = state;
        for _ in 0..50 {
            let c = s.select(&mut rng);
            s = s.observe(c, 0.0).unwrap();
            for p in s.selection_probs() {
                assert!((p - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rexp3_importance_weight_example() {
        // N=2, γ=0.5, uniform weights, node 0 earns reward 1:
        // p₀ = 0.5, x̂₀ = 2, ω₀ ← exp(0.5·2/2) = e^{1/2}.
        let state = Rexp3State::new(2, 0.5, 100).unwrap();
        let state = state.observe(0, 1.0).unwrap();
        assert!((state.weights()[0] - math::exp(0.5)).abs() < 1e-12);
        assert_eq!(state.weights()[1], 1.0);
    }

    #[test]
    fn rexp3_restart_and_reward_range() {
        let mut state = Rexp3State::new(2, 0.3, 2).unwrap();
        state = state.observe(0, 0.7).unwrap();
        state = state.observe(1, 0.2).unwrap();
        assert_eq!(state.weights(), &[1.0, 1.0]);
        assert!(matches!(
            state.clone().observe(0, 1.5),
            Err(PolicyError::RewardOutOfRange(_))
        ));
        assert!(matches!(
            state.observe(0, -0.1),
            Err(PolicyError::RewardOutOfRange(_))
        ));
    }

    #[test]
    fn rexp3_mixed_probs_floor() {
        let mut state = Rexp3State::new(5, 0.4, 100).unwrap();
        state.weights = alloc::vec![1e-9, 1.0, 2.0, 0.5, 1e-9];
        let probs = state.selection_probs();
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for p in probs {
            assert!(p >= 0.4 / 5.0 - 1e-15);
        }
    }

    #[test]
    fn gamma_schedule() {
        let g = rexp3_gamma(10, 66);
        assert!((g - math::sqrt(10.0 * math::ln(10.0) / ((core::f64::consts::E - 1.0) * 66.0)))
            .abs()
            < 1e-12);
        assert_eq!(rexp3_gamma(50, 1), 1.0);
    }

    #[test]
    fn weights_stay_finite_under_long_max_reward_streaks() {
        // Batch size T with maximal rewards every step stresses the weight
        // range; the rescale guard keeps everything finite (losing arms may
        // round to zero — the γ/N floor keeps them playable).
        let mut state = Rexp3State::new(2, 0.9, 5000).unwrap();
        for _ in 0..5000 {
            state = state.observe(0, 1.0).unwrap();
            assert!(state.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
        }
        let probs = state.selection_probs();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(probs.iter().all(|&p| p >= 0.9 / 2.0 - 1e-15));

        // Hedge weights stay strictly positive: per-step growth is capped by
        // ε and every batch resets.
        let mut hedge = PolicyState::new(2, 1.05, 40, 1.0, UpdateCost::Own).unwrap();
        for _ in 0..2000 {
            hedge = hedge.hedge_update(&[1.0, 0.0], &[1.0, 0.0], 0).unwrap();
            assert!(hedge.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        }
    }

    #[test]
    fn step_outcome_contract() {
        let costs = [0.2, 0.3];
        let o = StepOutcome::new(1, 2, &costs).unwrap();
        assert_eq!(o.reward(), 0.6);
        assert!(StepOutcome::new(2, 1, &costs).is_err());
        let big = [0.9, 0.9];
        assert!(StepOutcome::new(0, 2, &big).is_err());
    }
}
