//! Adversarial cost sequences under a variation budget.
//!
//! The adversary picks a per-node cost in `[0, 1/m]` each step. Its only
//! constraint is cumulative: summing the across-node maximum one-step change
//! up to any time must stay within a budget. This module generates such
//! sequences the way the reference protocol does (uniform start, uniform
//! bounded steps clipped to the valid range), measures realized variation,
//! and checks membership in the constraint set.

use crate::math;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryError {
    /// Step scale must be positive and at most 1/m.
    InvalidStepScale { step_scale: f64, cap: f64 },
    /// Cost entries must lie in [0, 1/m].
    CostOutOfRange { node: usize, t: usize, value: f64, cap: f64 },
    /// Variation is only defined from two steps on.
    HorizonTooShort(usize),
    /// A data shape problem (rows vs nodes vs horizon).
    ShapeMismatch { expected: usize, got: usize },
    /// Realized variation exceeded t/m at some step, violating the standing
    /// assumption on admissible adversaries.
    AssumptionViolated { t: usize, variation: f64, limit: f64 },
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidStepScale { step_scale, cap } => {
                write!(f, "step scale {step_scale} outside (0, {cap}]")
            }
            Self::CostOutOfRange { node, t, value, cap } => {
                write!(f, "cost {value} at node {node}, step {t} outside [0, {cap}]")
            }
            Self::HorizonTooShort(t) => {
                write!(f, "variation needs at least 2 steps, got {t}")
            }
            Self::ShapeMismatch { expected, got } => {
                write!(f, "cost data has {got} entries, expected {expected}")
            }
            Self::AssumptionViolated { t, variation, limit } => {
                write!(f, "cumulative variation {variation} at t={t} exceeds admissible limit {limit}")
            }
        }
    }
}

impl core::error::Error for AdversaryError {}

/// Adversarial costs, time-major: entry `(node i, step t)` is `data[t * n + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    data: Vec<f64>,
    n_nodes: usize,
    horizon: usize,
    truncation: u32,
}

impl CostMatrix {
    /// Validates every entry against `[0, 1/m]` (with a one-ulp-scale slack
    /// for normalized inputs).
    pub fn new(
        n_nodes: usize,
        horizon: usize,
        truncation: u32,
        data: Vec<f64>,
    ) -> Result<Self, AdversaryError> {
        if data.len() != n_nodes * horizon {
            return Err(AdversaryError::ShapeMismatch {
                expected: n_nodes * horizon,
                got: data.len(),
            });
        }
        let cap = 1.0 / truncation as f64;
        for (idx, &c) in data.iter().enumerate() {
            if !c.is_finite() || c < 0.0 || c > cap * (1.0 + 1e-12) {
                return Err(AdversaryError::CostOutOfRange {
                    node: idx % n_nodes,
                    t: idx / n_nodes,
                    value: c,
                    cap,
                });
            }
        }
        Ok(Self { data, n_nodes, horizon, truncation })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Upper bound 1/m on every entry.
    pub fn cost_cap(&self) -> f64 {
        1.0 / self.truncation as f64
    }

    /// Cost vector of step `t` (0-based), one entry per node.
    pub fn step(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_nodes..(t + 1) * self.n_nodes]
    }

    pub fn get(&self, node: usize, t: usize) -> f64 {
        self.data[t * self.n_nodes + node]
    }
}

/// Realized cumulative variation of a cost matrix.
///
/// `path()[t-1]` is `v_t = Σ_{τ<t} max_i |c_{i,τ+1} − c_{i,τ}|`, with
/// `v_1 = 0` by convention. `t0` is the first time the variation reaches
/// `1/m`, the point from which the standing assumption's lower bound holds.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationBudget {
    path: Vec<f64>,
    step_bound: f64,
    t0: Option<usize>,
}

impl VariationBudget {
    /// `v_t` for `t = 1..=T` (index `t-1`).
    pub fn path(&self) -> &[f64] {
        &self.path
    }

    /// Total variation `v_T`.
    pub fn total(&self) -> f64 {
        *self.path.last().unwrap_or(&0.0)
    }

    /// Largest observed single-step variation.
    pub fn step_bound(&self) -> f64 {
        self.step_bound
    }

    /// First time `t` (1-based) with `v_t ≥ 1/m`; `None` if never reached.
    pub fn t0(&self) -> Option<usize> {
        self.t0
    }

    #[cfg(test)]
    pub(crate) fn from_parts(path: Vec<f64>, step_bound: f64, t0: Option<usize>) -> Self {
        Self { path, step_bound, t0 }
    }

    /// Checks the admissibility upper bound `v_t ≤ t/m` at every step.
    /// Matrices whose entries respect the `[0, 1/m]` range can never trip
    /// this (their per-step variation is capped at 1/m); the check guards
    /// hand-assembled budgets and future generators.
    pub fn validate_upper(&self, truncation: u32) -> Result<(), AdversaryError> {
        let m = truncation as f64;
        for (idx, &v) in self.path.iter().enumerate() {
            let t = idx + 1;
            let limit = t as f64 / m;
            if v > limit + 1e-12 {
                return Err(AdversaryError::AssumptionViolated { t, variation: v, limit });
            }
        }
        Ok(())
    }
}

/// Generates a cost matrix: `c_{i,1} ~ U(0, 1/m)` per node, then each step
/// moves uniformly inside `(c_{i,t-1} − s, c_{i,t-1} + s) ∩ (0, 1/m)`.
/// Clipping to the valid range is done by intersecting the interval, so steps
/// near the boundary are asymmetric.
pub fn generate_costs<R: rand::Rng + ?Sized>(
    n_nodes: usize,
    horizon: usize,
    truncation: u32,
    step_scale: f64,
    rng: &mut R,
) -> Result<CostMatrix, AdversaryError> {
    let cap = 1.0 / truncation as f64;
    if !step_scale.is_finite() || step_scale <= 0.0 || step_scale > cap {
        return Err(AdversaryError::InvalidStepScale { step_scale, cap });
    }
    let mut data = Vec::with_capacity(n_nodes * horizon);
    for _ in 0..n_nodes {
        data.push(rng.random::<f64>() * cap);
    }
    for t in 1..horizon {
        for i in 0..n_nodes {
            let prev = data[(t - 1) * n_nodes + i];
            let lo = (prev - step_scale).max(0.0);
            let hi = (prev + step_scale).min(cap);
            data.push(lo + rng.random::<f64>() * (hi - lo));
        }
    }
    CostMatrix::new(n_nodes, horizon, truncation, data)
}

/// Cumulative variation of `costs`; requires at least two steps.
pub fn compute_variation(costs: &CostMatrix) -> Result<VariationBudget, AdversaryError> {
    if costs.horizon() < 2 {
        return Err(AdversaryError::HorizonTooShort(costs.horizon()));
    }
    let threshold = costs.cost_cap();
    let mut path = Vec::with_capacity(costs.horizon());
    let mut acc = 0.0;
    let mut step_bound = 0.0f64;
    let mut t0 = None;
    path.push(0.0);
    for t in 1..costs.horizon() {
        let prev = costs.step(t - 1);
        let cur = costs.step(t);
        let mut max_step = 0.0f64;
        for i in 0..costs.n_nodes() {
            max_step = max_step.max(math::abs(cur[i] - prev[i]));
        }
        acc += max_step;
        step_bound = step_bound.max(max_step);
        path.push(acc);
        if t0.is_none() && acc >= threshold {
            t0 = Some(t + 1);
        }
    }
    Ok(VariationBudget { path, step_bound, t0 })
}

/// True iff the matrix sits in the constraint set with the given budget:
/// all entries in `[0, 1/m]` (guaranteed by construction) and total realized
/// variation at most `budget`.
pub fn membership_check(costs: &CostMatrix, budget: f64) -> bool {
    if costs.horizon() < 2 {
        return true;
    }
    match compute_variation(costs) {
        Ok(v) => v.total() <= budget,
        Err(_) => false,
    }
}

/// Batch-local variations for the given batch grid: entry `b` sums the
/// across-node max one-step changes whose transitions start and end inside
/// batch `b`. Boundary transitions between consecutive batches belong to no
/// batch; summing these plus the boundary terms reproduces the total exactly.
pub fn batch_variation(costs: &CostMatrix, batch_size: usize) -> Vec<f64> {
    let horizon = costs.horizon();
    let n_batches = horizon.div_ceil(batch_size);
    let mut out = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let start = b * batch_size;
        let end = ((b + 1) * batch_size).min(horizon);
        let mut acc = 0.0;
        for t in start + 1..end {
            let prev = costs.step(t - 1);
            let cur = costs.step(t);
            let mut max_step = 0.0f64;
            for i in 0..costs.n_nodes() {
                max_step = max_step.max(math::abs(cur[i] - prev[i]));
            }
            acc += max_step;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn generated_costs_respect_step_and_range() {
        let mut rng = stream(1, &[0]);
        let m = 3;
        let s = 1.0 / (100.0 * m as f64);
        let costs = generate_costs(5, 400, m, s, &mut rng).unwrap();
        let cap = 1.0 / m as f64;
        for t in 0..400 {
            for i in 0..5 {
                let c = costs.get(i, t);
                assert!((0.0..=cap).contains(&c));
                if t > 0 {
                    assert!((c - costs.get(i, t - 1)).abs() <= s + 1e-15);
                }
            }
        }
        // Membership with the a-priori per-step cap accumulation.
        assert!(membership_check(&costs, (400.0 - 1.0) * s));
    }

    #[test]
    fn zero_like_step_scale_keeps_sequences_flat() {
        let mut rng = stream(2, &[0]);
        let costs = generate_costs(3, 50, 4, 1e-300, &mut rng).unwrap();
        let v = compute_variation(&costs).unwrap();
        assert!(v.total() < 1e-290);
        assert_eq!(v.t0(), None);
    }

    #[test]
    fn invalid_step_scale_rejected() {
        let mut rng = stream(2, &[1]);
        assert!(generate_costs(3, 10, 4, 0.0, &mut rng).is_err());
        assert!(generate_costs(3, 10, 4, 0.3, &mut rng).is_err());
    }

    #[test]
    fn variation_of_hand_matrix() {
        // two nodes, c1 = (0, 0.1), c2 = (0, 0.05) → v_2 = 0.1
        let costs = CostMatrix::new(2, 2, 3, alloc::vec![0.0, 0.0, 0.1, 0.05]).unwrap();
        let v = compute_variation(&costs).unwrap();
        assert_eq!(v.path(), &[0.0, 0.1]);
        assert_eq!(v.step_bound(), 0.1);
    }

    #[test]
    fn constant_costs_have_zero_variation() {
        let costs = CostMatrix::new(2, 5, 3, alloc::vec![0.2; 10]).unwrap();
        let v = compute_variation(&costs).unwrap();
        assert_eq!(v.total(), 0.0);
        assert_eq!(v.t0(), None);
    }

    #[test]
    fn alternating_steps_cross_threshold_at_expected_time() {
        // ±1/(100m) alternation with m = 4: threshold 1/4 needs 100 steps,
        // so t0 = 101.
        let m = 4u32;
        let step = 1.0 / (100.0 * m as f64);
        let horizon = 150;
        let mut data = Vec::new();
        for t in 0..horizon {
            let base = 0.1 + if t % 2 == 0 { 0.0 } else { step };
            data.push(base); // single node
        }
        let costs = CostMatrix::new(1, horizon, m, data).unwrap();
        let v = compute_variation(&costs).unwrap();
        assert_eq!(v.t0(), Some(101));
    }

    #[test]
    fn membership_strictness() {
        let mut rng = stream(3, &[0]);
        let costs = generate_costs(4, 100, 3, 1.0 / 300.0, &mut rng).unwrap();
        let v = compute_variation(&costs).unwrap().total();
        assert!(membership_check(&costs, v));
        assert!(!membership_check(&costs, v - 1e-9));
    }

    #[test]
    fn out_of_range_entry_rejected() {
        let m = 4u32;
        let bad = CostMatrix::new(1, 2, m, alloc::vec![0.1, 0.25 + 1e-6]);
        assert!(bad.is_err());
    }

    #[test]
    fn variation_invariant_under_node_permutation() {
        let mut rng = stream(4, &[0]);
        let costs = generate_costs(3, 60, 3, 1.0 / 150.0, &mut rng).unwrap();
        let mut permuted = Vec::with_capacity(3 * 60);
        for t in 0..60 {
            let s = costs.step(t);
            permuted.extend_from_slice(&[s[2], s[0], s[1]]);
        }
        let permuted = CostMatrix::new(3, 60, 3, permuted).unwrap();
        let a = compute_variation(&costs).unwrap();
        let b = compute_variation(&permuted).unwrap();
        assert_eq!(a.path(), b.path());
    }

    #[test]
    fn concatenation_identity() {
        // v(concat) = v(A) + v(B) + max-variation of the joining transition.
        let mut rng = stream(5, &[0]);
        let a = generate_costs(3, 40, 3, 1.0 / 120.0, &mut rng).unwrap();
        let b = generate_costs(3, 30, 3, 1.0 / 120.0, &mut rng).unwrap();
        let mut joined = Vec::new();
        for t in 0..40 {
            joined.extend_from_slice(a.step(t));
        }
        for t in 0..30 {
            joined.extend_from_slice(b.step(t));
        }
        let joined = CostMatrix::new(3, 70, 3, joined).unwrap();
        let join_step: f64 = (0..3)
            .map(|i| (b.get(i, 0) - a.get(i, 39)).abs())
            .fold(0.0, f64::max);
        let va = compute_variation(&a).unwrap().total();
        let vb = compute_variation(&b).unwrap().total();
        let vj = compute_variation(&joined).unwrap().total();
        assert!((vj - (va + vb + join_step)).abs() < 1e-12);
    }

    #[test]
    fn batch_decomposition_identity() {
        let mut rng = stream(6, &[0]);
        let costs = generate_costs(4, 97, 3, 1.0 / 200.0, &mut rng).unwrap();
        let delta = 10;
        let parts = batch_variation(&costs, delta);
        // Boundary transitions: from step b·Δ−1 to b·Δ.
        let mut boundary = 0.0;
        let mut t = delta;
        while t < 97 {
            let prev = costs.step(t - 1);
            let cur = costs.step(t);
            let mut max_step = 0.0f64;
            for i in 0..4 {
                max_step = max_step.max((cur[i] - prev[i]).abs());
            }
            boundary += max_step;
            t += delta;
        }
        let total = compute_variation(&costs).unwrap().total();
        let sum: f64 = parts.iter().sum();
        assert!((sum + boundary - total).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_validation() {
        // Any in-range matrix satisfies v_t ≤ (t−1)/m < t/m.
        let data = alloc::vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let costs = CostMatrix::new(1, 6, 1, data).unwrap();
        assert!(compute_variation(&costs).unwrap().validate_upper(1).is_ok());
        let mut rng = stream(7, &[0]);
        let ok = generate_costs(3, 100, 3, 1.0 / 300.0, &mut rng).unwrap();
        assert!(compute_variation(&ok).unwrap().validate_upper(3).is_ok());

        // A hand-assembled budget that overshoots the admissible line must
        // fail loudly.
        let bad = VariationBudget::from_parts(alloc::vec![0.0, 3.1, 4.0], 3.1, Some(2));
        assert!(matches!(
            bad.validate_upper(1),
            Err(AdversaryError::AssumptionViolated { t: 2, .. })
        ));
    }
}
