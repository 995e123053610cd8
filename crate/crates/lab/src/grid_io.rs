//! Grid description files.
//!
//! Topology (sectioned CSV):
//!
//! ```text
//! [nodes]
//! node_id,name
//! [feeders]
//! from,to,susceptance,ampacity,feeder_cost
//! [sources]
//! node_id,type,rated_kw,variable_cost
//! [scalars]
//! key,value          # keys: V, Cp, ess_capacity, step_hours
//! ```
//!
//! Time series (flat CSV, one row per timestamp × node):
//!
//! ```text
//! timestamp,node,load_kw,avail_<type>…,price,ess_soc
//! ```
//!
//! Node ids are 1-based in files. All violations are reported with the
//! offending line number.

use crate::error::LabError;
use mnb_core::opf::{Feeder, GridModel, GridState, Source, SourceKind};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

const NODES_HEADER: [&str; 2] = ["node_id", "name"];
const FEEDERS_HEADER: [&str; 5] = ["from", "to", "susceptance", "ampacity", "feeder_cost"];
const SOURCES_HEADER: [&str; 4] = ["node_id", "type", "rated_kw", "variable_cost"];
const SCALARS_HEADER: [&str; 2] = ["key", "value"];

struct Cursor<'a> {
    path: &'a Path,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, body: &'a str) -> Self {
        let lines = body
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { path, lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn err(&self, line: usize, message: impl Into<String>) -> LabError {
        LabError::format(self.path, line, message)
    }

    fn expect_section(&mut self, name: &str) -> Result<usize, LabError> {
        match self.next() {
            Some((line, l)) if l == format!("[{name}]") => Ok(line),
            Some((line, l)) => Err(self.err(line, format!("expected section [{name}], found '{l}'"))),
            None => Err(self.err(self.lines.last().map(|(l, _)| *l).unwrap_or(0) + 1,
                format!("missing section [{name}]"))),
        }
    }

    fn expect_header(&mut self, columns: &[&str]) -> Result<(), LabError> {
        match self.next() {
            Some((line, l)) => {
                let found: Vec<&str> = l.split(',').map(str::trim).collect();
                for (i, want) in columns.iter().enumerate() {
                    match found.get(i) {
                        Some(got) if got == want => {}
                        Some(got) => {
                            return Err(self.err(line, format!("expected column '{want}', found '{got}'")))
                        }
                        None => return Err(self.err(line, format!("missing column '{want}'"))),
                    }
                }
                if found.len() != columns.len() {
                    return Err(self.err(line, format!(
                        "unexpected extra column '{}'",
                        found[columns.len()]
                    )));
                }
                Ok(())
            }
            None => Err(self.err(0, format!("missing header {columns:?}"))),
        }
    }

    /// Rows until the next section header or end of file.
    fn rows(&mut self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        while let Some((line, l)) = self.peek() {
            if l.starts_with('[') {
                break;
            }
            out.push((line, l));
            self.pos += 1;
        }
        out
    }
}

fn parse_field<T: FromStr>(
    cursor: &Cursor<'_>,
    line: usize,
    field: &str,
    what: &str,
) -> Result<T, LabError> {
    field
        .trim()
        .parse()
        .map_err(|_| cursor.err(line, format!("bad {what}: '{}'", field.trim())))
}

/// Loads and validates a grid topology file.
pub fn load_grid(path: &Path) -> Result<GridModel, LabError> {
    let body = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut cursor = Cursor::new(path, &body);

    cursor.expect_section("nodes")?;
    cursor.expect_header(&NODES_HEADER)?;
    let mut node_ids = Vec::new();
    for (line, row) in cursor.rows() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 {
            return Err(cursor.err(line, format!("expected 2 fields, found {}", fields.len())));
        }
        let id: usize = parse_field(&cursor, line, fields[0], "node id")?;
        if id == 0 {
            return Err(cursor.err(line, "node ids are 1-based"));
        }
        if node_ids.contains(&id) {
            return Err(cursor.err(line, format!("duplicate node id {id}")));
        }
        node_ids.push(id);
    }
    let n_nodes = node_ids.len();
    if node_ids.iter().any(|&id| id > n_nodes) {
        return Err(LabError::format(path, 1, format!("node ids must cover 1..={n_nodes}")));
    }

    cursor.expect_section("feeders")?;
    cursor.expect_header(&FEEDERS_HEADER)?;
    let mut feeders = Vec::new();
    for (line, row) in cursor.rows() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(cursor.err(line, format!("expected 5 fields, found {}", fields.len())));
        }
        let from: usize = parse_field(&cursor, line, fields[0], "feeder endpoint")?;
        let to: usize = parse_field(&cursor, line, fields[1], "feeder endpoint")?;
        for &end in &[from, to] {
            if end == 0 || end > n_nodes {
                return Err(cursor.err(line, format!("feeder endpoint {end} out of range")));
            }
        }
        feeders.push(Feeder {
            from: from - 1,
            to: to - 1,
            susceptance: parse_field(&cursor, line, fields[2], "susceptance")?,
            ampacity: parse_field(&cursor, line, fields[3], "ampacity")?,
            cost: parse_field(&cursor, line, fields[4], "feeder cost")?,
        });
    }

    cursor.expect_section("sources")?;
    cursor.expect_header(&SOURCES_HEADER)?;
    let mut sources = Vec::new();
    for (line, row) in cursor.rows() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 4 {
            return Err(cursor.err(line, format!("expected 4 fields, found {}", fields.len())));
        }
        let node: usize = parse_field(&cursor, line, fields[0], "node id")?;
        if node == 0 || node > n_nodes {
            return Err(cursor.err(line, format!("source node {node} out of range")));
        }
        let kind = SourceKind::from_str(fields[1].trim())
            .map_err(|e| cursor.err(line, e.to_string()))?;
        sources.push(Source {
            node: node - 1,
            kind,
            rated_kw: parse_field(&cursor, line, fields[2], "rated power")?,
            variable_cost: parse_field(&cursor, line, fields[3], "variable cost")?,
        });
    }

    cursor.expect_section("scalars")?;
    cursor.expect_header(&SCALARS_HEADER)?;
    let mut scalars: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (line, row) in cursor.rows() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 {
            return Err(cursor.err(line, format!("expected 2 fields, found {}", fields.len())));
        }
        let key = fields[0].trim().to_string();
        let value: f64 = parse_field(&cursor, line, fields[1], "scalar value")?;
        if scalars.insert(key.clone(), (line, value)).is_some() {
            return Err(cursor.err(line, format!("duplicate scalar '{key}'")));
        }
    }
    if let Some((line, l)) = cursor.peek() {
        return Err(cursor.err(line, format!("unexpected content '{l}' after [scalars]")));
    }
    let mut take = |key: &str| -> Result<f64, LabError> {
        scalars
            .remove(key)
            .map(|(_, v)| v)
            .ok_or_else(|| LabError::format(path, 1, format!("missing scalar '{key}'")))
    };
    let nominal_kv = take("V")?;
    let penalty = take("Cp")?;
    let ess_capacity = take("ess_capacity")?;
    let step_hours = take("step_hours")?;
    if let Some((key, (line, _))) = scalars.into_iter().next() {
        return Err(LabError::format(path, line, format!("unknown scalar '{key}'")));
    }

    Ok(GridModel::new(
        n_nodes,
        sources,
        feeders,
        nominal_kv,
        penalty,
        ess_capacity,
        step_hours,
    )?)
}

/// Loads the operating snapshots for `grid` from a time-series file.
pub fn load_states(path: &Path, grid: &GridModel) -> Result<Vec<GridState>, LabError> {
    let body = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut lines = body
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines
        .next()
        .ok_or_else(|| LabError::format(path, 1, "empty file"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let fixed = ["timestamp", "node", "load_kw"];
    for (i, want) in fixed.iter().enumerate() {
        if columns.get(i) != Some(want) {
            return Err(LabError::format(path, 1, format!("expected column '{want}' at position {i}")));
        }
    }
    let tail = ["price", "ess_soc"];
    if columns.len() < fixed.len() + tail.len() {
        return Err(LabError::format(path, 1, "missing 'price' and 'ess_soc' columns"));
    }
    for (offset, want) in tail.iter().enumerate() {
        let idx = columns.len() - tail.len() + offset;
        if columns[idx] != *want {
            return Err(LabError::format(path, 1, format!("expected column '{want}', found '{}'", columns[idx])));
        }
    }
    let mut avail_kinds = Vec::new();
    for col in &columns[fixed.len()..columns.len() - tail.len()] {
        let Some(kind_name) = col.strip_prefix("avail_") else {
            return Err(LabError::format(path, 1, format!("expected an 'avail_<type>' column, found '{col}'")));
        };
        let kind = SourceKind::from_str(kind_name)
            .map_err(|e| LabError::format(path, 1, e.to_string()))?;
        if avail_kinds.contains(&kind) {
            return Err(LabError::format(path, 1, format!("duplicate column '{col}'")));
        }
        avail_kinds.push(kind);
    }
    for s in &grid.sources {
        if !avail_kinds.contains(&s.kind) {
            return Err(LabError::format(
                path,
                1,
                format!("missing column 'avail_{}' required by a grid source", s.kind.as_str()),
            ));
        }
    }

    let n = grid.n_nodes();
    let price_idx = columns.len() - 2;
    let soc_idx = columns.len() - 1;

    struct Block {
        started_at: usize,
        timestamp: String,
        loads: Vec<Option<f64>>,
        avail: Vec<Vec<Option<f64>>>, // per kind, per node
        price: f64,
        soc: f64,
    }

    let mut states = Vec::new();
    let mut block: Option<Block> = None;
    let finish = |b: Block, grid: &GridModel, avail_kinds: &[SourceKind]| -> Result<GridState, LabError> {
        let mut loads = Vec::with_capacity(n);
        for (i, l) in b.loads.iter().enumerate() {
            loads.push(l.ok_or_else(|| {
                LabError::format(path, b.started_at, format!(
                    "timestamp '{}' is missing node {}",
                    b.timestamp, i + 1
                ))
            })?);
        }
        let mut available = Vec::with_capacity(grid.sources.len());
        for s in &grid.sources {
            let kind_pos = avail_kinds.iter().position(|k| *k == s.kind).expect("checked");
            let v = b.avail[kind_pos][s.node].expect("filled with loads");
            available.push(v);
        }
        let state = GridState {
            loads_kw: loads,
            available_kw: available,
            price: b.price,
            ess_soc: b.soc,
        };
        state.validate(grid)?;
        Ok(state)
    };

    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(LabError::format(
                path,
                line,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let timestamp = fields[0].to_string();
        let node: usize = fields[1]
            .parse()
            .map_err(|_| LabError::format(path, line, format!("bad node id '{}'", fields[1])))?;
        if node == 0 || node > n {
            return Err(LabError::format(path, line, format!("node id {node} out of range")));
        }
        let parse_f = |idx: usize, what: &str| -> Result<f64, LabError> {
            fields[idx]
                .parse()
                .map_err(|_| LabError::format(path, line, format!("bad {what}: '{}'", fields[idx])))
        };
        let load = parse_f(2, "load")?;
        let price = parse_f(price_idx, "price")?;
        let soc = parse_f(soc_idx, "ess_soc")?;

        let start_new = match &block {
            Some(b) => b.timestamp != timestamp,
            None => true,
        };
        if start_new {
            if let Some(b) = block.take() {
                states.push(finish(b, grid, &avail_kinds)?);
            }
            block = Some(Block {
                started_at: line,
                timestamp: timestamp.clone(),
                loads: vec![None; n],
                avail: vec![vec![None; n]; avail_kinds.len()],
                price,
                soc,
            });
        }
        let b = block.as_mut().expect("just ensured");
        if (b.price - price).abs() > 1e-9 || (b.soc - soc).abs() > 1e-9 {
            return Err(LabError::format(
                path,
                line,
                format!("price/ess_soc must agree across rows of timestamp '{timestamp}'"),
            ));
        }
        if b.loads[node - 1].is_some() {
            return Err(LabError::format(
                path,
                line,
                format!("duplicate row for timestamp '{timestamp}', node {node}"),
            ));
        }
        b.loads[node - 1] = Some(load);
        for (k, _kind) in avail_kinds.iter().enumerate() {
            b.avail[k][node - 1] = Some(parse_f(fixed.len() + k, "availability")?);
        }
    }
    if let Some(b) = block.take() {
        states.push(finish(b, grid, &avail_kinds)?);
    }
    if states.is_empty() {
        return Err(LabError::format(path, 1, "no data rows"));
    }
    Ok(states)
}
