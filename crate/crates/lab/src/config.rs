//! Experiment configuration files: flat `key = value` lines plus a `[prior]`
//! section. Unknown keys fail fast. The full schema is documented in
//! `docs/config.md`.

use crate::error::LabError;
use mnb_core::attack::GammaBelief;
use mnb_core::policy::UpdateCost;
use mnb_core::regret::{ExperimentConfig, PolicyKind};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
struct Raw {
    n_nodes: Option<usize>,
    horizon: Option<usize>,
    truncation: Option<u32>,
    step_scale: Option<f64>,
    outer_trials: Option<usize>,
    inner_trials: Option<usize>,
    seed: Option<u64>,
    policies: Option<Vec<PolicyKind>>,
    update_cost: Option<UpdateCost>,
    max_steps: Option<u64>,
    schedule_variation: Option<f64>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
}

/// Parses a config file into an [`ExperimentConfig`].
pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig, LabError> {
    let body = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&body, path)
}

pub fn parse_config(body: &str, path: &Path) -> Result<ExperimentConfig, LabError> {
    let mut raw = Raw::default();
    let mut section = "";
    for (idx, line) in body.lines().enumerate() {
        let line_no = idx + 1;
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| LabError::format(path, line_no, "unterminated section header"))?;
            if name != "prior" {
                return Err(LabError::format(path, line_no, format!("unknown section '[{name}]'")));
            }
            section = "prior";
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| LabError::format(path, line_no, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let parse_usize = |v: &str| -> Result<usize, LabError> {
            v.parse().map_err(|_| LabError::format(path, line_no, format!("bad integer '{v}'")))
        };
        let parse_f64 = |v: &str| -> Result<f64, LabError> {
            v.parse().map_err(|_| LabError::format(path, line_no, format!("bad number '{v}'")))
        };
        let parse_f64_list = |v: &str| -> Result<Vec<f64>, LabError> {
            v.split(',').map(|s| parse_f64(s.trim())).collect()
        };
        match (section, key) {
            ("", "n_nodes") => raw.n_nodes = Some(parse_usize(value)?),
            ("", "horizon") => raw.horizon = Some(parse_usize(value)?),
            ("", "truncation") => {
                raw.truncation = Some(value.parse().map_err(|_| {
                    LabError::format(path, line_no, format!("bad integer '{value}'"))
                })?)
            }
            ("", "step_scale") => raw.step_scale = Some(parse_f64(value)?),
            ("", "schedule_variation") => raw.schedule_variation = Some(parse_f64(value)?),
            ("", "outer_trials") => raw.outer_trials = Some(parse_usize(value)?),
            ("", "inner_trials") => raw.inner_trials = Some(parse_usize(value)?),
            ("", "seed") => {
                raw.seed = Some(value.parse().map_err(|_| {
                    LabError::format(path, line_no, format!("bad seed '{value}'"))
                })?)
            }
            ("", "max_steps") => {
                raw.max_steps = Some(value.parse().map_err(|_| {
                    LabError::format(path, line_no, format!("bad integer '{value}'"))
                })?)
            }
            ("", "policies") => {
                let mut roster = Vec::new();
                for name in value.split(',') {
                    let kind = PolicyKind::from_str(name.trim())
                        .map_err(|e| LabError::format(path, line_no, e.to_string()))?;
                    if roster.contains(&kind) {
                        return Err(LabError::format(
                            path,
                            line_no,
                            format!("policy '{}' listed twice", kind.name()),
                        ));
                    }
                    roster.push(kind);
                }
                raw.policies = Some(roster);
            }
            ("", "update_cost") => {
                raw.update_cost = Some(match value {
                    "own" => UpdateCost::Own,
                    "chosen" => UpdateCost::Chosen,
                    other => {
                        return Err(LabError::format(
                            path,
                            line_no,
                            format!("update_cost must be 'own' or 'chosen', got '{other}'"),
                        ))
                    }
                })
            }
            ("prior", "alpha") => raw.alpha = Some(parse_f64_list(value)?),
            ("prior", "beta") => raw.beta = Some(parse_f64_list(value)?),
            (_, key) => {
                return Err(LabError::format(path, line_no, format!("unknown key '{key}'")))
            }
        }
    }

    let require = |name: &str, missing: bool| -> Result<(), LabError> {
        if missing {
            Err(LabError::Validation(format!("{}: missing required key '{name}'", path.display())))
        } else {
            Ok(())
        }
    };
    require("n_nodes", raw.n_nodes.is_none())?;
    require("horizon", raw.horizon.is_none())?;
    require("truncation", raw.truncation.is_none())?;
    require("step_scale", raw.step_scale.is_none())?;
    require("outer_trials", raw.outer_trials.is_none())?;
    require("inner_trials", raw.inner_trials.is_none())?;
    require("seed", raw.seed.is_none())?;
    require("policies", raw.policies.is_none())?;
    require("[prior] alpha", raw.alpha.is_none())?;
    require("[prior] beta", raw.beta.is_none())?;

    let n_nodes = raw.n_nodes.unwrap();
    let priors = broadcast_priors(n_nodes, &raw.alpha.unwrap(), &raw.beta.unwrap())?;
    Ok(ExperimentConfig {
        n_nodes,
        horizon: raw.horizon.unwrap(),
        truncation: raw.truncation.unwrap(),
        priors,
        step_scale: raw.step_scale.unwrap(),
        outer_trials: raw.outer_trials.unwrap(),
        inner_trials: raw.inner_trials.unwrap(),
        policies: raw.policies.unwrap(),
        seed: raw.seed.unwrap(),
        update_cost: raw.update_cost.unwrap_or_default(),
        schedule_variation: raw.schedule_variation,
        max_steps: raw.max_steps.unwrap_or(ExperimentConfig::DEFAULT_MAX_STEPS),
    })
}

/// A single value broadcasts to every node; a list must match the node count.
pub fn broadcast_priors(
    n_nodes: usize,
    alpha: &[f64],
    beta: &[f64],
) -> Result<Vec<GammaBelief>, LabError> {
    let pick = |values: &[f64], i: usize, what: &str| -> Result<f64, LabError> {
        match values.len() {
            1 => Ok(values[0]),
            len if len == n_nodes => Ok(values[i]),
            len => Err(LabError::Validation(format!(
                "prior {what} must have 1 or {n_nodes} entries, got {len}"
            ))),
        }
    };
    (0..n_nodes)
        .map(|i| {
            let a = pick(alpha, i, "alpha")?;
            let b = pick(beta, i, "beta")?;
            GammaBelief::new(a, b)
                .map_err(|e| LabError::Validation(format!("prior for node {}: {e}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    const SAMPLE: &str = "\
# comparison run
n_nodes = 4
horizon = 500
truncation = 3
step_scale = 0.0033333333333333335
outer_trials = 10
inner_trials = 5
seed = 42
policies = thompson_hedge, rexp3
update_cost = own

[prior]
alpha = 2.0
beta = 2.0
";

    #[test]
    fn parses_sample() {
        let config = parse_config(SAMPLE, &PathBuf::from("sample.conf")).unwrap();
        assert_eq!(config.n_nodes, 4);
        assert_eq!(config.priors.len(), 4);
        assert_eq!(config.priors[0].alpha(), 2.0);
        assert_eq!(config.policies, vec![PolicyKind::ThompsonHedge, PolicyKind::Rexp3]);
        config.validate().unwrap();
    }

    #[test]
    fn unknown_key_fails_fast() {
        let body = SAMPLE.replace("seed = 42", "seed = 42\nbananas = 7");
        let err = parse_config(&body, &PathBuf::from("x.conf")).unwrap_err();
        assert!(err.to_string().contains("bananas"), "{err}");
    }

    #[test]
    fn per_node_priors() {
        let body = SAMPLE.replace("alpha = 2.0", "alpha = 2.0, 1.0, 2.0, 1.0");
        let config = parse_config(&body, &PathBuf::from("x.conf")).unwrap();
        assert_eq!(config.priors[1].alpha(), 1.0);
        let bad = SAMPLE.replace("alpha = 2.0", "alpha = 2.0, 1.0");
        assert!(parse_config(&bad, &PathBuf::from("x.conf")).is_err());
    }

    #[test]
    fn missing_key_reported() {
        let body = SAMPLE.replace("horizon = 500\n", "");
        let err = parse_config(&body, &PathBuf::from("x.conf")).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
    }
}
