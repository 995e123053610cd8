//! The `mnb` command line: simulation protocols, grid cost extraction,
//! variation analysis, and bound tables.

use crate::config::parse_config_file;
use crate::costs_io::{read_cost_matrix, write_cost_matrix, write_cost_meta, CostMeta};
use crate::error::{
    LabError, EXIT_BUDGET, EXIT_FORMAT, EXIT_IO, EXIT_USAGE, EXIT_VALIDATION,
};
use crate::grid_io::{load_grid, load_states};
use crate::protocol::{compare_configs, sensitivity_configs, ProtocolScale};
use crate::regression::{estimate_t0, regress_variation, RegressionReport};
use crate::runner::run_and_write;
use crate::synth::synthetic_states;
use clap::{Parser, Subcommand};
use mnb_core::adversary::compute_variation;
use mnb_core::opf::cost_timeseries;
use mnb_core::policy::{hedge_batch_size, rexp3_batch_size, rexp3_gamma};
use mnb_core::regret::{hedge_bound, per_batch_bound, rexp3_bound_reference, PolicyKind};
use std::path::PathBuf;

const EXIT_HELP: &str = "\
EXIT CODES:
  0  success
  2  usage error (unknown flag or subcommand)
  3  file not readable or writable
  4  malformed input file (reported with line number)
  5  model or configuration invariant violated
  6  experiment step budget exceeded (raise max_steps in the config)";

#[derive(Parser)]
#[command(
    name = "mnb",
    version,
    about = "Multi-node bandit lab: adversarial grid-defense policies, DC-OPF attack costs, regret estimation",
    after_help = EXIT_HELP
)]
struct Cli {
    /// Master seed override for any command that simulates.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the trial grid (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file; writes summary.csv + metadata.
    Simulate {
        /// Config file (schema in docs/config.md).
        #[arg(long)]
        config: PathBuf,
    },
    /// Comparison protocol: both priors × N ∈ {10, 20}, all policies.
    Compare {
        #[arg(long, default_value_t = crate::protocol::DEFAULT_HORIZON)]
        horizon: usize,
        /// Outer trials Q.
        #[arg(long, default_value_t = crate::protocol::DEFAULT_OUTER)]
        outer: usize,
        /// Inner trials L.
        #[arg(long, default_value_t = crate::protocol::DEFAULT_INNER)]
        inner: usize,
    },
    /// Sensitivity protocol: four adversary levels at N = 20, both priors.
    Sensitivity {
        #[arg(long, default_value_t = crate::protocol::DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = crate::protocol::DEFAULT_OUTER)]
        outer: usize,
        #[arg(long, default_value_t = crate::protocol::DEFAULT_INNER)]
        inner: usize,
    },
    /// Attack costs from a grid: solve the dispatch LP per step with and
    /// without each node and normalize the differences.
    OpfCosts {
        /// Grid topology file.
        #[arg(long)]
        topology: PathBuf,
        /// Operating-state time series; mutually exclusive with --synthetic-steps.
        #[arg(long, conflicts_with = "synthetic_steps")]
        timeseries: Option<PathBuf>,
        /// Generate this many synthetic 15-minute states instead.
        #[arg(long)]
        synthetic_steps: Option<usize>,
        /// Truncation level m for the [0, 1/m] normalization.
        #[arg(long, default_value_t = 4)]
        truncation: u32,
        /// Output CSV (default <out-dir>/costs.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variation regression and threshold-time estimate for a cost CSV.
    Analyze {
        #[arg(long)]
        costs: PathBuf,
        /// Truncation level m; defaults to the CSV's metadata sidecar.
        #[arg(long)]
        truncation: Option<u32>,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print bound values and schedule parameters for given (m, V_T, N, T).
    Bound {
        #[arg(long)]
        truncation: u32,
        /// Variation budget V_T.
        #[arg(long)]
        vt: f64,
        /// Number of nodes N.
        #[arg(long)]
        n: usize,
        /// Horizon T.
        #[arg(long)]
        t: usize,
    },
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(
                [EXIT_USAGE, EXIT_IO, EXIT_FORMAT, EXIT_VALIDATION, EXIT_BUDGET].contains(&code)
            );
            code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Simulate { config } => {
            let mut experiment = parse_config_file(&config)?;
            if let Some(seed) = cli.seed {
                experiment.seed = seed;
            }
            let csv = cli.out_dir.join("summary.csv");
            let summary = run_and_write(&experiment, &csv, "simulate", cli.threads)?;
            print_run_result("simulate", &csv, &summary);
            Ok(())
        }
        Command::Compare { horizon, outer, inner } => {
            let scale = protocol_scale(horizon, outer, inner, cli.seed);
            for (label, config) in compare_configs(scale) {
                let csv = cli.out_dir.join(format!("compare_{label}.csv"));
                let summary = run_and_write(&config, &csv, "compare", cli.threads)?;
                print_run_result(&label, &csv, &summary);
            }
            Ok(())
        }
        Command::Sensitivity { horizon, outer, inner } => {
            let scale = protocol_scale(horizon, outer, inner, cli.seed);
            for (label, config) in sensitivity_configs(scale) {
                let csv = cli.out_dir.join(format!("sensitivity_{label}.csv"));
                let summary = run_and_write(&config, &csv, "sensitivity", cli.threads)?;
                print_run_result(&label, &csv, &summary);
            }
            Ok(())
        }
        Command::OpfCosts { topology, timeseries, synthetic_steps, truncation, out } => {
            let grid = load_grid(&topology)?;
            let (states, source) = match (timeseries, synthetic_steps) {
                (Some(path), None) => {
                    let states = load_states(&path, &grid)?;
                    (states, format!("timeseries {}", path.display()))
                }
                (None, Some(steps)) => {
                    let seed = cli.seed.unwrap_or(20240917);
                    (
                        synthetic_states(&grid, steps, seed),
                        format!("synthetic states, seed {seed}"),
                    )
                }
                (None, None) => {
                    return Err(LabError::Validation(
                        "pass --timeseries FILE or --synthetic-steps N".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let result = cost_timeseries(&grid, &states, truncation)?;
            let csv = out.unwrap_or_else(|| cli.out_dir.join("costs.csv"));
            write_cost_matrix(&csv, &result.matrix)?;
            write_cost_meta(
                &csv,
                &CostMeta {
                    n_nodes: result.matrix.n_nodes(),
                    horizon: result.matrix.horizon(),
                    truncation,
                    normalization: result.normalization,
                    all_zero: result.all_zero,
                    source,
                },
            )?;
            if result.all_zero {
                eprintln!("warning: every attack cost was zero; normalization skipped");
            }
            println!(
                "wrote {} ({} nodes × {} steps, normalization {:.6e})",
                csv.display(),
                result.matrix.n_nodes(),
                result.matrix.horizon(),
                result.normalization
            );
            Ok(())
        }
        Command::Analyze { costs, truncation, report } => {
            let (matrix, meta) = read_cost_matrix(&costs, truncation)?;
            let budget = compute_variation(&matrix)?;
            budget.validate_upper(matrix.truncation())?;
            let fit = regress_variation(&budget)?;
            print_regression(&fit, &budget, matrix.truncation());
            if let Some(meta) = meta {
                println!("normalization constant: {:.6e} (m = {})", meta.normalization, meta.truncation);
            }
            match estimate_t0(&fit, matrix.truncation()) {
                Ok(t0) => println!("estimated threshold time t0 = {t0} (first fitted crossing of 1/m)"),
                Err(e) => println!("threshold time unavailable: {e}"),
            }
            if let Some(path) = report {
                let body = serde_json::to_string_pretty(&fit)
                    .map_err(|e| LabError::Validation(format!("report serialization: {e}")))?;
                crate::costs_io::write_atomic(&path, body.as_bytes())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Bound { truncation, vt, n, t } => {
            if vt <= 0.0 {
                return Err(LabError::Validation(format!(
                    "variation budget must be positive, got {vt}"
                )));
            }
            if n < 2 {
                return Err(LabError::Validation(format!("need at least 2 nodes, got {n}")));
            }
            let delta = hedge_batch_size(t, truncation, vt, n).map_err(|e| {
                LabError::Validation(format!("batch size: {e}"))
            })?;
            let delta_b = rexp3_batch_size(t, truncation, vt, n).map_err(|e| {
                LabError::Validation(format!("batch size: {e}"))
            })?;
            println!("inputs: m = {truncation}, V_T = {vt}, N = {n}, T = {t}");
            println!("theorem bound:        {:.4}", hedge_bound(truncation, vt, n, t));
            println!("batch size Δ:         {delta}");
            println!("per-batch bound:      {:.4}", per_batch_bound(delta, n));
            println!("bandit batch Δ_B:     {delta_b}");
            println!("bandit exploration γ: {:.4}", rexp3_gamma(n, delta_b));
            println!(
                "bandit order reference (unit constant, not a guarantee): {:.4}",
                rexp3_bound_reference(truncation, vt, n, t)
            );
            Ok(())
        }
    }
}

fn protocol_scale(horizon: usize, outer: usize, inner: usize, seed: Option<u64>) -> ProtocolScale {
    let mut scale = ProtocolScale { horizon, outer_trials: outer, inner_trials: inner, ..ProtocolScale::default() };
    if let Some(seed) = seed {
        scale.seed = seed;
    }
    scale
}

fn print_run_result(label: &str, csv: &std::path::Path, summary: &mnb_core::regret::RegretSummary) {
    let start = summary
        .assumption_start
        .map(|t| t.to_string())
        .unwrap_or_else(|| "never".into());
    println!(
        "[{label}] wrote {} (realized V_T mean {:.4}, bound valid from t = {start})",
        csv.display(),
        summary.variation.mean
    );
    for policy in &summary.policies {
        let bound_ok = match policy.kind {
            PolicyKind::Rexp3 => String::new(),
            _ => {
                let ok = summary
                    .assumption_start
                    .map(|start| {
                        (start - 1..summary.horizon)
                            .all(|t| policy.sup_path[t] <= summary.bound_path[t])
                    })
                    .unwrap_or(false);
                format!(", within bound: {}", if ok { "yes" } else { "NO" })
            }
        };
        println!(
            "    {:<15} sup R̂(T) = {:.3} ± {:.3}, expected {:.3} ± {:.3}{bound_ok}",
            policy.kind.name(),
            policy.final_sup(),
            policy.final_sup_stderr(),
            policy.final_avg(),
            policy.final_avg_stderr()
        );
    }
}

fn print_regression(fit: &RegressionReport, budget: &mnb_core::adversary::VariationBudget, m: u32) {
    println!("variation regression on t = 2..={} ({} points)", fit.n + 1, fit.n);
    println!("realized V_T = {:.6}, first crossing of 1/m at t = {}", budget.total(),
        budget.t0().map(|t| t.to_string()).unwrap_or_else(|| "never".into()));
    println!("threshold 1/m = {:.6}", 1.0 / m as f64);
    println!();
    println!("{:<12}{:>14}{:>14}{:>12}{:>14}", "", "coefficient", "std error", "t stat", "p value");
    println!(
        "{:<12}{:>14.6}{:>14.6}{:>12.3}{:>14.6e}",
        "intercept", fit.intercept, fit.se_intercept, fit.t_intercept, fit.p_intercept
    );
    println!(
        "{:<12}{:>14.6}{:>14.6}{:>12.3}{:>14.6e}",
        "t", fit.slope, fit.se_slope, fit.t_slope, fit.p_slope
    );
    println!();
    println!("{:<12}{:>6}{:>16}{:>16}{:>12}{:>14}", "ANOVA", "df", "SS", "MS", "F", "significance");
    println!(
        "{:<12}{:>6}{:>16.4}{:>16.4}{:>12.2}{:>14.6e}",
        "regression",
        fit.regression.df,
        fit.regression.ss,
        fit.regression.ms.unwrap_or(f64::NAN),
        fit.regression.f.unwrap_or(f64::NAN),
        fit.regression.significance.unwrap_or(f64::NAN)
    );
    println!(
        "{:<12}{:>6}{:>16.4}{:>16.4}",
        "residual",
        fit.residual.df,
        fit.residual.ss,
        fit.residual.ms.unwrap_or(f64::NAN)
    );
    println!("{:<12}{:>6}{:>16.4}", "total", fit.total.df, fit.total.ss);
    println!("R² = {:.6}", fit.r_squared);
}
