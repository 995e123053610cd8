//! DC optimal power flow for a distributed generation system, and the
//! per-node attack costs it induces.
//!
//! Each operating snapshot is dispatched by a linear program: generation is
//! bounded by availability, storage by its remaining capacity, line flows by
//! ampacity, and unserved demand is allowed at a penalty. The attack cost of
//! a node is the absolute difference between the optimal operation cost of
//! the intact grid and of the grid with that node disconnected (its incident
//! feeders opened, generation zeroed, load shed).
//!
//! Flow magnitudes in the objective are linearized with nonnegative splits
//! `f⁺, f⁻` tied to the angle difference by `f⁺ − f⁻ = B·(δ_i − δ_j)`; free
//! angles are split the same way. The reference angle is node 0, moving to
//! the lowest surviving index when node 0 is attacked.

use crate::adversary::{AdversaryError, CostMatrix};
use crate::attack::NodeSet;
use crate::math;
use crate::simplex::{self, Constraint, LinearProgram, Relation, SimplexError};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    NodeOutOfRange { index: usize, n_nodes: usize },
    Disconnected,
    InvalidValue { what: &'static str, value: f64 },
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    DuplicateSource { node: usize, kind: SourceKind },
    UnknownSourceKind(String),
    EmptyStates,
    Solver(SimplexError),
    CostMatrix(AdversaryError),
    TooFewNodes(usize),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NodeOutOfRange { index, n_nodes } => {
                write!(f, "node index {index} out of range for {n_nodes} nodes")
            }
            Self::Disconnected => write!(f, "feeder graph does not connect all nodes"),
            Self::InvalidValue { what, value } => write!(f, "invalid {what}: {value}"),
            Self::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected {expected} entries, got {got}")
            }
            Self::DuplicateSource { node, kind } => {
                write!(f, "duplicate {} source at node {node}", kind.as_str())
            }
            Self::UnknownSourceKind(s) => write!(f, "unknown source type '{s}'"),
            Self::EmptyStates => write!(f, "no operating states supplied"),
            Self::Solver(e) => write!(f, "dispatch LP failed: {e}"),
            Self::CostMatrix(e) => write!(f, "cost matrix construction failed: {e}"),
            Self::TooFewNodes(n) => write!(f, "need at least 2 nodes, got {n}"),
        }
    }
}

impl core::error::Error for GridError {}

impl From<SimplexError> for GridError {
    fn from(e: SimplexError) -> Self {
        Self::Solver(e)
    }
}

impl From<AdversaryError> for GridError {
    fn from(e: AdversaryError) -> Self {
        Self::CostMatrix(e)
    }
}

/// Power source categories carried by the grid files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Gas,
    Biomass,
    Wind,
    Pv,
    Ess,
}

impl SourceKind {
    pub const ALL: [SourceKind; 5] = [
        SourceKind::Gas,
        SourceKind::Biomass,
        SourceKind::Wind,
        SourceKind::Pv,
        SourceKind::Ess,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Gas => "gas",
            Self::Biomass => "biomass",
            Self::Wind => "wind",
            Self::Pv => "pv",
            Self::Ess => "ess",
        }
    }
}

impl core::str::FromStr for SourceKind {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        match s {
            "gas" => Ok(Self::Gas),
            "biomass" => Ok(Self::Biomass),
            "wind" => Ok(Self::Wind),
            "pv" => Ok(Self::Pv),
            "ess" => Ok(Self::Ess),
            other => Err(GridError::UnknownSourceKind(String::from(other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub node: usize,
    pub kind: SourceKind,
    pub rated_kw: f64,
    pub variable_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feeder {
    pub from: usize,
    pub to: usize,
    /// Susceptance, strictly positive.
    pub susceptance: f64,
    /// Ampacity, strictly positive.
    pub ampacity: f64,
    /// Variable cost per unit of carried flow.
    pub cost: f64,
}

/// Static description of the distributed generation system.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    nodes: NodeSet,
    pub sources: Vec<Source>,
    pub feeders: Vec<Feeder>,
    pub nominal_kv: f64,
    pub penalty_cost: f64,
    pub ess_capacity_kwh: f64,
    pub step_hours: f64,
}

impl GridModel {
    pub fn new(
        n_nodes: usize,
        sources: Vec<Source>,
        feeders: Vec<Feeder>,
        nominal_kv: f64,
        penalty_cost: f64,
        ess_capacity_kwh: f64,
        step_hours: f64,
    ) -> Result<Self, GridError> {
        let nodes = NodeSet::new(n_nodes).map_err(|_| GridError::TooFewNodes(n_nodes))?;
        for s in &sources {
            if s.node >= n_nodes {
                return Err(GridError::NodeOutOfRange { index: s.node, n_nodes });
            }
            if !s.rated_kw.is_finite() || s.rated_kw < 0.0 {
                return Err(GridError::InvalidValue { what: "rated power", value: s.rated_kw });
            }
            if !s.variable_cost.is_finite() {
                return Err(GridError::InvalidValue {
                    what: "source variable cost",
                    value: s.variable_cost,
                });
            }
        }
        for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                if sources[i].node == sources[j].node && sources[i].kind == sources[j].kind {
                    return Err(GridError::DuplicateSource {
                        node: sources[i].node,
                        kind: sources[i].kind,
                    });
                }
            }
        }
        for fdr in &feeders {
            for &end in &[fdr.from, fdr.to] {
                if end >= n_nodes {
                    return Err(GridError::NodeOutOfRange { index: end, n_nodes });
                }
            }
            if !fdr.susceptance.is_finite() || fdr.susceptance <= 0.0 {
                return Err(GridError::InvalidValue {
                    what: "susceptance",
                    value: fdr.susceptance,
                });
            }
            if !fdr.ampacity.is_finite() || fdr.ampacity <= 0.0 {
                return Err(GridError::InvalidValue { what: "ampacity", value: fdr.ampacity });
            }
            if !fdr.cost.is_finite() || fdr.cost < 0.0 {
                return Err(GridError::InvalidValue { what: "feeder cost", value: fdr.cost });
            }
        }
        for (what, value) in [
            ("nominal voltage", nominal_kv),
            ("step duration", step_hours),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(GridError::InvalidValue { what, value });
            }
        }
        for (what, value) in [
            ("penalty cost", penalty_cost),
            ("storage capacity", ess_capacity_kwh),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(GridError::InvalidValue { what, value });
            }
        }
        let grid = Self {
            nodes,
            sources,
            feeders,
            nominal_kv,
            penalty_cost,
            ess_capacity_kwh,
            step_hours,
        };
        if !grid.is_connected() {
            return Err(GridError::Disconnected);
        }
        Ok(grid)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for fdr in &self.feeders {
            let a = find(&mut parent, fdr.from);
            let b = find(&mut parent, fdr.to);
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root)
    }
}

/// One operating snapshot: loads, per-source availability, energy price, and
/// storage state of charge.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub loads_kw: Vec<f64>,
    /// Available power per source, aligned with `GridModel::sources`.
    pub available_kw: Vec<f64>,
    pub price: f64,
    pub ess_soc: f64,
}

impl GridState {
    pub fn validate(&self, grid: &GridModel) -> Result<(), GridError> {
        if self.loads_kw.len() != grid.n_nodes() {
            return Err(GridError::LengthMismatch {
                what: "loads",
                expected: grid.n_nodes(),
                got: self.loads_kw.len(),
            });
        }
        if self.available_kw.len() != grid.sources.len() {
            return Err(GridError::LengthMismatch {
                what: "source availability",
                expected: grid.sources.len(),
                got: self.available_kw.len(),
            });
        }
        for &l in &self.loads_kw {
            if !l.is_finite() || l < 0.0 {
                return Err(GridError::InvalidValue { what: "load", value: l });
            }
        }
        for (s, &a) in grid.sources.iter().zip(self.available_kw.iter()) {
            if !a.is_finite() || a < 0.0 || a > s.rated_kw * (1.0 + 1e-9) {
                return Err(GridError::InvalidValue { what: "availability", value: a });
            }
        }
        if !self.price.is_finite() {
            return Err(GridError::InvalidValue { what: "price", value: self.price });
        }
        if !(0.0..=1.0).contains(&self.ess_soc) {
            return Err(GridError::InvalidValue { what: "state of charge", value: self.ess_soc });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum DispatchCols {
    Single(usize),
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone)]
struct VarMap {
    dispatch: Vec<DispatchCols>,
    shed: Vec<usize>,
    angle: Vec<Option<(usize, usize)>>,
    flow: Vec<(usize, usize)>,
    n_cols: usize,
}

/// An assembled dispatch program for one snapshot.
#[derive(Debug, Clone)]
pub struct OpfProgram {
    pub lp: LinearProgram,
    vars: VarMap,
    pub reference: usize,
    pub outage: Option<usize>,
}

/// Optimal dispatch of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct OpfSolution {
    /// Net output per source (negative = storage charging).
    pub dispatch_kw: Vec<f64>,
    /// Unserved demand per node.
    pub shed_kw: Vec<f64>,
    /// Voltage angles, reference pinned at zero.
    pub angles: Vec<f64>,
    /// Flow per feeder, oriented from → to.
    pub flows_kw: Vec<f64>,
    /// The (f⁺, f⁻) split behind each flow.
    pub flow_splits: Vec<(f64, f64)>,
    /// Optimal operation cost.
    pub objective: f64,
}

impl OpfSolution {
    /// Largest nodal power imbalance, recomputed from the solution.
    pub fn max_balance_residual(&self, grid: &GridModel, state: &GridState) -> f64 {
        let n = grid.n_nodes();
        let mut residual = 0.0f64;
        for i in 0..n {
            let mut inj = self.shed_kw[i] - state.loads_kw[i];
            for (s, src) in grid.sources.iter().enumerate() {
                if src.node == i {
                    inj += self.dispatch_kw[s];
                }
            }
            for (f, fdr) in grid.feeders.iter().enumerate() {
                if fdr.to == i {
                    inj += self.flows_kw[f];
                }
                if fdr.from == i {
                    inj -= self.flows_kw[f];
                }
            }
            residual = residual.max(math::abs(inj));
        }
        residual
    }
}

/// Builds the dispatch LP for one snapshot; `outage` disconnects that node
/// (all incident feeders opened, generation zeroed, full load shed).
pub fn build_lp(
    grid: &GridModel,
    state: &GridState,
    outage: Option<usize>,
) -> Result<OpfProgram, GridError> {
    state.validate(grid)?;
    let n = grid.n_nodes();
    if let Some(node) = outage {
        if node >= n {
            return Err(GridError::NodeOutOfRange { index: node, n_nodes: n });
        }
    }
    let reference = (0..n)
        .find(|&i| Some(i) != outage)
        .expect("at least two nodes");

    let mut n_cols = 0usize;
    let mut next = || {
        let c = n_cols;
        n_cols += 1;
        c
    };
    let dispatch: Vec<DispatchCols> = grid
        .sources
        .iter()
        .map(|s| {
            if s.kind == SourceKind::Ess {
                DispatchCols::Split { pos: next(), neg: next() }
            } else {
                DispatchCols::Single(next())
            }
        })
        .collect();
    let shed: Vec<usize> = (0..n).map(|_| next()).collect();
    let angle: Vec<Option<(usize, usize)>> = (0..n)
        .map(|i| if i == reference { None } else { Some((next(), next())) })
        .collect();
    let flow: Vec<(usize, usize)> = grid.feeders.iter().map(|_| (next(), next())).collect();

    let mut objective = vec![0.0; n_cols];
    for (s, src) in grid.sources.iter().enumerate() {
        let unit = src.variable_cost - state.price;
        match dispatch[s] {
            DispatchCols::Single(c) => objective[c] = unit,
            DispatchCols::Split { pos, neg } => {
                objective[pos] = unit;
                objective[neg] = -unit;
            }
        }
    }
    for &c in &shed {
        objective[c] = grid.penalty_cost + state.price;
    }
    for (f, fdr) in grid.feeders.iter().enumerate() {
        objective[flow[f].0] = fdr.cost;
        objective[flow[f].1] = fdr.cost;
    }

    let mut constraints = Vec::new();
    let cut = |fdr: &Feeder| -> bool {
        match outage {
            Some(node) => fdr.from == node || fdr.to == node,
            None => false,
        }
    };

    // Nodal balance: generation + shed + inflow − outflow = load.
    for i in 0..n {
        let mut coeffs = vec![0.0; n_cols];
        for (s, src) in grid.sources.iter().enumerate() {
            if src.node == i {
                match dispatch[s] {
                    DispatchCols::Single(c) => coeffs[c] = 1.0,
                    DispatchCols::Split { pos, neg } => {
                        coeffs[pos] = 1.0;
                        coeffs[neg] = -1.0;
                    }
                }
            }
        }
        coeffs[shed[i]] = 1.0;
        for (f, fdr) in grid.feeders.iter().enumerate() {
            if fdr.to == i {
                coeffs[flow[f].0] += 1.0;
                coeffs[flow[f].1] -= 1.0;
            }
            if fdr.from == i {
                coeffs[flow[f].0] -= 1.0;
                coeffs[flow[f].1] += 1.0;
            }
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, state.loads_kw[i]));
    }

    // Flow definition on live feeders: f⁺ − f⁻ = B (δ_from − δ_to).
    for (f, fdr) in grid.feeders.iter().enumerate() {
        if cut(fdr) {
            continue;
        }
        let mut coeffs = vec![0.0; n_cols];
        coeffs[flow[f].0] = 1.0;
        coeffs[flow[f].1] = -1.0;
        if let Some((pos, neg)) = angle[fdr.from] {
            coeffs[pos] -= fdr.susceptance;
            coeffs[neg] += fdr.susceptance;
        }
        if let Some((pos, neg)) = angle[fdr.to] {
            coeffs[pos] += fdr.susceptance;
            coeffs[neg] -= fdr.susceptance;
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, 0.0));
    }

    // Line capacity: f⁺ + f⁻ ≤ V·A on live feeders, 0 on opened ones.
    for (f, fdr) in grid.feeders.iter().enumerate() {
        let mut coeffs = vec![0.0; n_cols];
        coeffs[flow[f].0] = 1.0;
        coeffs[flow[f].1] = 1.0;
        let cap = if cut(fdr) { 0.0 } else { grid.nominal_kv * fdr.ampacity };
        constraints.push(Constraint::new(coeffs, Relation::Le, cap));
    }

    // Dispatch limits.
    for (s, src) in grid.sources.iter().enumerate() {
        let knocked_out = outage == Some(src.node);
        match dispatch[s] {
            DispatchCols::Single(c) => {
                let mut coeffs = vec![0.0; n_cols];
                coeffs[c] = 1.0;
                let cap = if knocked_out { 0.0 } else { state.available_kw[s] };
                constraints.push(Constraint::new(coeffs, Relation::Le, cap));
            }
            DispatchCols::Split { pos, neg } => {
                // |P·T_s| ≤ min{(1−φ)·C̄, P̄·T_s}
                let energy_room = (1.0 - state.ess_soc) * grid.ess_capacity_kwh / grid.step_hours;
                let cap = if knocked_out {
                    0.0
                } else {
                    energy_room.min(state.available_kw[s])
                };
                for &col in &[pos, neg] {
                    let mut coeffs = vec![0.0; n_cols];
                    coeffs[col] = 1.0;
                    constraints.push(Constraint::new(coeffs, Relation::Le, cap));
                }
            }
        }
    }

    // Shedding limits; the attacked node sheds its whole load.
    for i in 0..n {
        let mut coeffs = vec![0.0; n_cols];
        coeffs[shed[i]] = 1.0;
        let relation = if outage == Some(i) { Relation::Eq } else { Relation::Le };
        constraints.push(Constraint::new(coeffs, relation, state.loads_kw[i]));
    }

    Ok(OpfProgram {
        lp: LinearProgram { objective, constraints },
        vars: VarMap { dispatch, shed, angle, flow, n_cols },
        reference,
        outage,
    })
}

/// Solves an assembled program into dispatch, shedding, angles and flows.
pub fn solve_lp(program: &OpfProgram) -> Result<OpfSolution, GridError> {
    let sol = simplex::solve(&program.lp)?;
    let x = &sol.x;
    let dispatch_kw = program
        .vars
        .dispatch
        .iter()
        .map(|d| match *d {
            DispatchCols::Single(c) => x[c],
            DispatchCols::Split { pos, neg } => x[pos] - x[neg],
        })
        .collect();
    let shed_kw = program.vars.shed.iter().map(|&c| x[c]).collect();
    let angles = program
        .vars
        .angle
        .iter()
        .map(|a| match a {
            None => 0.0,
            Some((pos, neg)) => x[*pos] - x[*neg],
        })
        .collect();
    let flow_splits: Vec<(f64, f64)> = program
        .vars
        .flow
        .iter()
        .map(|&(pos, neg)| (x[pos], x[neg]))
        .collect();
    let flows_kw = flow_splits.iter().map(|&(p, n)| p - n).collect();
    debug_assert_eq!(program.vars.n_cols, program.lp.objective.len());
    Ok(OpfSolution {
        dispatch_kw,
        shed_kw,
        angles,
        flows_kw,
        flow_splits,
        objective: sol.objective,
    })
}

/// Optimal operation cost of one snapshot.
pub fn operation_cost(
    grid: &GridModel,
    state: &GridState,
    outage: Option<usize>,
) -> Result<f64, GridError> {
    Ok(solve_lp(&build_lp(grid, state, outage)?)?.objective)
}

/// Attack cost of `node`: |intact cost − outage cost|.
pub fn attack_cost(grid: &GridModel, state: &GridState, node: usize) -> Result<f64, GridError> {
    let intact = operation_cost(grid, state, None)?;
    let outage = operation_cost(grid, state, Some(node))?;
    Ok(math::abs(intact - outage))
}

/// A normalized attack-cost matrix plus the normalization that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTimeseries {
    pub matrix: CostMatrix,
    /// Divisor applied to raw costs: `m ×` the global raw maximum (1 when all
    /// raw costs are zero).
    pub normalization: f64,
    /// Set when every raw cost was zero and normalization was skipped.
    pub all_zero: bool,
}

/// Attack costs for every (node, step), normalized into `[0, 1/m]` by the
/// global maximum.
pub fn cost_timeseries(
    grid: &GridModel,
    states: &[GridState],
    truncation: u32,
) -> Result<CostTimeseries, GridError> {
    if states.is_empty() {
        return Err(GridError::EmptyStates);
    }
    let n = grid.n_nodes();
    let horizon = states.len();
    let mut raw = Vec::with_capacity(n * horizon);
    for state in states {
        let intact = operation_cost(grid, state, None)?;
        for i in 0..n {
            let outage = operation_cost(grid, state, Some(i))?;
            raw.push(math::abs(intact - outage));
        }
    }
    let max = raw.iter().fold(0.0f64, |a, &b| a.max(b));
    let all_zero = max <= 0.0;
    let normalization = if all_zero { 1.0 } else { truncation as f64 * max };
    let cap = 1.0 / truncation as f64;
    let data: Vec<f64> = raw
        .iter()
        .map(|&c| (c / normalization).min(cap))
        .collect();
    let matrix = CostMatrix::new(n, horizon, truncation, data)?;
    Ok(CostTimeseries { matrix, normalization, all_zero })
}
