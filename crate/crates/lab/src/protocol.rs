//! The two standing experiment protocols: the policy comparison over both
//! priors and both network sizes, and the variation-sensitivity sweep.
//!
//! Both build on the same desk-scale defaults (horizon 2000, 200 outer ×
//! 50 inner trials); CLI flags can override the trial counts for quick runs.

use mnb_core::attack::GammaBelief;
use mnb_core::policy::UpdateCost;
use mnb_core::regret::{ExperimentConfig, PolicyKind};

pub const DEFAULT_HORIZON: usize = 2000;
pub const DEFAULT_OUTER: usize = 200;
pub const DEFAULT_INNER: usize = 50;
pub const DEFAULT_TRUNCATION: u32 = 3;

/// Common trial-size knobs for the standing protocols.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolScale {
    pub horizon: usize,
    pub outer_trials: usize,
    pub inner_trials: usize,
    pub seed: u64,
}

impl Default for ProtocolScale {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            outer_trials: DEFAULT_OUTER,
            inner_trials: DEFAULT_INNER,
            seed: 20240917,
        }
    }
}

/// The two standing priors: an informative one with mean 1 and a tighter
/// low-rate one with mean 0.25.
pub fn standing_priors() -> [(&'static str, f64, f64); 2] {
    [("theta1", 2.0, 2.0), ("theta2", 1.0, 4.0)]
}

fn config(
    n_nodes: usize,
    alpha: f64,
    beta: f64,
    step_scale: f64,
    policies: Vec<PolicyKind>,
    scale: ProtocolScale,
) -> ExperimentConfig {
    ExperimentConfig {
        n_nodes,
        horizon: scale.horizon,
        truncation: DEFAULT_TRUNCATION,
        priors: vec![GammaBelief::new(alpha, beta).expect("standing priors are valid"); n_nodes],
        step_scale,
        outer_trials: scale.outer_trials,
        inner_trials: scale.inner_trials,
        policies,
        seed: scale.seed,
        update_cost: UpdateCost::Own,
        schedule_variation: None,
        max_steps: ExperimentConfig::DEFAULT_MAX_STEPS,
    }
}

/// Comparison protocol: both priors × N ∈ {10, 20}, all three policies,
/// adversary step scale 1/(100m). Returns `(label, config)` pairs.
pub fn compare_configs(scale: ProtocolScale) -> Vec<(String, ExperimentConfig)> {
    let step = 1.0 / (100.0 * DEFAULT_TRUNCATION as f64);
    let mut out = Vec::new();
    for (name, alpha, beta) in standing_priors() {
        for n in [10usize, 20] {
            out.push((
                format!("{name}_n{n}"),
                config(
                    n,
                    alpha,
                    beta,
                    step,
                    vec![PolicyKind::ThompsonHedge, PolicyKind::HedgeOracle, PolicyKind::Rexp3],
                    scale,
                ),
            ));
        }
    }
    out
}

/// Sensitivity protocol: four adversary levels 1/(20m) … 1/(200m) at N = 20,
/// both priors, posterior-sampling policy only. Labels carry the level.
///
/// The schedule rule is the same as in the comparison protocol (batch size
/// from each trial's realized variation), so the sweep varies only the cost
/// generator while the policy stays matched to what it faces.
pub fn sensitivity_configs(scale: ProtocolScale) -> Vec<(String, ExperimentConfig)> {
    let m = DEFAULT_TRUNCATION as f64;
    let mut out = Vec::new();
    for (name, alpha, beta) in standing_priors() {
        for denom in [20.0f64, 50.0, 100.0, 200.0] {
            out.push((
                format!("{name}_scale{}m", denom as u32),
                config(
                    20,
                    alpha,
                    beta,
                    1.0 / (denom * m),
                    vec![PolicyKind::ThompsonHedge],
                    scale,
                ),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_protocol_shape() {
        let configs = compare_configs(ProtocolScale::default());
        assert_eq!(configs.len(), 4);
        assert_eq!(configs[0].1.n_nodes, 10);
        assert_eq!(configs[1].1.n_nodes, 20);
        assert!((configs[0].1.step_scale - 1.0 / 300.0).abs() < 1e-15);
        for (_, c) in &configs {
            assert_eq!(c.policies.len(), 3);
            c.validate().unwrap();
        }
        // Mean 1 and mean 0.25 priors.
        assert!((configs[0].1.priors[0].mean() - 1.0).abs() < 1e-12);
        assert!((configs[2].1.priors[0].mean() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_protocol_shape() {
        let configs = sensitivity_configs(ProtocolScale::default());
        assert_eq!(configs.len(), 8);
        for (label, c) in &configs {
            assert_eq!(c.n_nodes, 20);
            assert_eq!(c.policies, vec![PolicyKind::ThompsonHedge]);
            assert!(label.contains("scale"));
            c.validate().unwrap();
        }
        let scales: Vec<f64> = configs[..4].iter().map(|(_, c)| c.step_scale).collect();
        assert!(scales.windows(2).all(|w| w[0] > w[1]), "levels must descend");
    }
}
