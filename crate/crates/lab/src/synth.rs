//! Synthetic operating states for a grid, standing in for a live market
//! feed. Fifteen-minute cadence: daily load and price shapes, a wandering
//! wind availability, a daylight-shaped solar curve, and a slow storage
//! state-of-charge cycle. Fully deterministic given the seed.

use mnb_core::opf::{GridModel, GridState, SourceKind};
use mnb_core::rng::stream;
use rand::Rng;

/// Steps per day at 15-minute resolution.
pub const STEPS_PER_DAY: usize = 96;

/// Generates `steps` snapshots for `grid`.
///
/// Base loads are sized from the grid's non-storage generation so that the
/// daily peak approaches, and congestion occasionally forces shedding in,
/// the dispatch problem.
pub fn synthetic_states(grid: &GridModel, steps: usize, seed: u64) -> Vec<GridState> {
    let n = grid.n_nodes();
    let total_rated: f64 = grid
        .sources
        .iter()
        .filter(|s| s.kind != SourceKind::Ess)
        .map(|s| s.rated_kw)
        .sum();
    // Spread 60% of rated generation over the nodes, unevenly.
    let weights: Vec<f64> = (0..n).map(|i| 0.5 + ((i * 37) % 100) as f64 / 100.0).collect();
    let weight_sum: f64 = weights.iter().sum();
    let base_loads: Vec<f64> = weights
        .iter()
        .map(|w| 0.6 * total_rated * w / weight_sum)
        .collect();

    let mut rng = stream(seed, &[0x5_fe3du64]);
    let mut wind_level = 0.6f64;
    let mut cloud = 0.3f64;
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let hour = (t % STEPS_PER_DAY) as f64 * 24.0 / STEPS_PER_DAY as f64;
        // Evening-peaked demand shape in [0.5, 1.0].
        let shape = 0.75 + 0.25 * (core::f64::consts::TAU * (hour - 10.0) / 24.0).sin();
        let loads_kw: Vec<f64> = base_loads
            .iter()
            .map(|b| {
                let jitter = 1.0 + 0.08 * (rng.random::<f64>() * 2.0 - 1.0);
                (b * shape * jitter).max(0.0)
            })
            .collect();

        wind_level = (wind_level + 0.06 * (rng.random::<f64>() * 2.0 - 1.0)).clamp(0.05, 1.0);
        cloud = (cloud + 0.05 * (rng.random::<f64>() * 2.0 - 1.0)).clamp(0.0, 0.8);
        let sun = if (6.0..18.0).contains(&hour) {
            (core::f64::consts::PI * (hour - 6.0) / 12.0).sin().max(0.0)
        } else {
            0.0
        };

        let available_kw: Vec<f64> = grid
            .sources
            .iter()
            .map(|s| match s.kind {
                SourceKind::Gas | SourceKind::Biomass | SourceKind::Ess => s.rated_kw,
                SourceKind::Wind => s.rated_kw * wind_level,
                SourceKind::Pv => s.rated_kw * sun * (1.0 - cloud),
            })
            .collect();

        let price = 0.05 + 0.03 * shape + 0.004 * (rng.random::<f64>() * 2.0 - 1.0);
        let ess_soc = (0.5
            + 0.4 * (core::f64::consts::TAU * (hour - 4.0) / 24.0).sin())
        .clamp(0.05, 0.95);

        out.push(GridState { loads_kw, available_kw, price, ess_soc });
    }
    out
}
