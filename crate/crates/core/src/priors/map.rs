//! Grid archives of elite behaviors and the `MAP v1` text format.
//!
//! ```text
//! MAP v1 dim=2 res=20,20 lo=-5,-5 hi=5,5 param_dim=5
//! 3 17 | -3.41 3.62 | -2.5 | 0.1 0.2 0.3 0.4 0.5
//! ```
//!
//! One row per occupied cell: cell indices, descriptor, reward, parameters.
//! Reals are written in shortest round-trip form so a load after a save is
//! value-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative slack (in cell widths) allowed when binning a descriptor that
/// sits just outside the grid bounds.
pub const BOUNDS_TOLERANCE: f64 = 1e-9;

/// Axis-aligned grid over an n-dimensional descriptor space.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    resolution: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != resolution.len() {
            return Err(Error::usage(format!(
                "grid needs matching non-empty bounds and resolution (lo {}, hi {}, res {})",
                lo.len(),
                hi.len(),
                resolution.len()
            )));
        }
        for d in 0..lo.len() {
            if !(lo[d].is_finite() && hi[d].is_finite() && lo[d] < hi[d]) {
                return Err(Error::usage(format!(
                    "grid dimension {d}: need finite lo < hi, got [{}, {}]",
                    lo[d], hi[d]
                )));
            }
            if resolution[d] == 0 {
                return Err(Error::usage(format!(
                    "grid dimension {d}: resolution must be >= 1"
                )));
            }
        }
        Ok(Self { lo, hi, resolution })
    }

    /// `dim`-dimensional grid with the same bounds and resolution on every axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![resolution; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn total_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn cell_width(&self, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / self.resolution[d] as f64
    }

    /// Uniform binning; values on the upper boundary fall into the last cell.
    pub fn cell_of(&self, descriptor: &[f64]) -> Result<Vec<usize>> {
        if descriptor.len() != self.dim() {
            return Err(Error::usage(format!(
                "descriptor has {} components, grid has {}",
                descriptor.len(),
                self.dim()
            )));
        }
        let mut idx = Vec::with_capacity(self.dim());
        for (d, &v) in descriptor.iter().enumerate() {
            let w = self.cell_width(d);
            let tol = BOUNDS_TOLERANCE * w;
            if !v.is_finite() || v < self.lo[d] - tol || v > self.hi[d] + tol {
                return Err(Error::usage(format!(
                    "descriptor component {d} = {v} outside [{}, {}]",
                    self.lo[d], self.hi[d]
                )));
            }
            let raw = ((v - self.lo[d]) / w).floor();
            let i = if raw < 0.0 {
                0
            } else {
                (raw as usize).min(self.resolution[d] - 1)
            };
            idx.push(i);
        }
        Ok(idx)
    }

    pub fn contains_index(&self, index: &[usize]) -> bool {
        index.len() == self.dim() && index.iter().zip(&self.resolution).all(|(i, r)| i < r)
    }

    pub fn cell_bounds(&self, index: &[usize]) -> Vec<(f64, f64)> {
        index
            .iter()
            .enumerate()
            .map(|(d, &i)| {
                let w = self.cell_width(d);
                (self.lo[d] + i as f64 * w, self.lo[d] + (i + 1) as f64 * w)
            })
            .collect()
    }

    pub fn centroid(&self, index: &[usize]) -> Vec<f64> {
        self.cell_bounds(index)
            .into_iter()
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// Elite stored in one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MapEntry {
    pub descriptor: Vec<f64>,
    pub params: Vec<f64>,
    pub reward: f64,
}

/// Sparse grid archive: at most one elite per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorMap {
    grid: GridSpec,
    param_dim: usize,
    cells: BTreeMap<Vec<usize>, MapEntry>,
}

impl BehaviorMap {
    pub fn new(grid: GridSpec, param_dim: usize) -> Self {
        Self {
            grid,
            param_dim,
            cells: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn descriptor_dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Occupied fraction of the grid.
    pub fn coverage(&self) -> f64 {
        self.cells.len() as f64 / self.grid.total_cells() as f64
    }

    pub fn get(&self, index: &[usize]) -> Option<&MapEntry> {
        self.cells.get(index)
    }

    /// Occupied cells in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &MapEntry)> {
        self.cells.iter()
    }

    pub fn cell_indices(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cells.keys()
    }

    /// Keeps the better of the incumbent and the candidate. Ties keep the
    /// incumbent. Returns whether the cell changed.
    pub fn insert(&mut self, descriptor: Vec<f64>, params: Vec<f64>, reward: f64) -> Result<bool> {
        if params.len() != self.param_dim {
            return Err(Error::usage(format!(
                "expected {} parameters, got {}",
                self.param_dim,
                params.len()
            )));
        }
        let index = self.grid.cell_of(&descriptor)?;
        Ok(self.insert_at(
            index,
            MapEntry {
                descriptor,
                params,
                reward,
            },
        ))
    }

    pub(crate) fn insert_at(&mut self, index: Vec<usize>, entry: MapEntry) -> bool {
        match self.cells.get_mut(&index) {
            Some(current) if entry.reward > current.reward => {
                *current = entry;
                true
            }
            Some(_) => false,
            None => {
                self.cells.insert(index, entry);
                true
            }
        }
    }

    /// Copy of this map with every stored reward replaced by `f(entry)`.
    pub fn with_rewards(&self, mut f: impl FnMut(&MapEntry) -> f64) -> Self {
        let mut out = self.clone();
        for entry in out.cells.values_mut() {
            entry.reward = f(entry);
        }
        out
    }

    pub fn to_map_string(&self) -> String {
        let mut s = String::new();
        let join_f = |v: &[f64], sep: &str| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(sep)
        };
        let res = self
            .grid
            .resolution
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(
            s,
            "MAP v1 dim={} res={} lo={} hi={} param_dim={}",
            self.grid.dim(),
            res,
            join_f(&self.grid.lo, ","),
            join_f(&self.grid.hi, ","),
            self.param_dim
        );
        for (idx, e) in &self.cells {
            let idx_s = idx
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            let _ = write!(
                s,
                "{} | {} | {:?} |",
                idx_s,
                join_f(&e.descriptor, " "),
                e.reward
            );
            if !e.params.is_empty() {
                let _ = write!(s, " {}", join_f(&e.params, " "));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing MAP header"))?;
        let (grid, param_dim) = parse_header(hline, header)?;
        let mut map = BehaviorMap::new(grid, param_dim);
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split('|').collect();
            if parts.len() != 4 {
                return Err(Error::parse(
                    ln,
                    format!("expected 4 '|'-separated fields, found {}", parts.len()),
                ));
            }
            let index: Vec<usize> = parts[0]
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| Error::parse(ln, format!("bad cell index {t:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            let descriptor = parse_reals(ln, parts[1], "descriptor")?;
            let reward_v = parse_reals(ln, parts[2], "reward")?;
            let params = parse_reals(ln, parts[3], "params")?;
            if index.len() != map.descriptor_dim() || descriptor.len() != map.descriptor_dim() {
                return Err(Error::parse(
                    ln,
                    format!(
                        "dimension mismatch: header dim={}, row has {} indices and {} descriptor values",
                        map.descriptor_dim(),
                        index.len(),
                        descriptor.len()
                    ),
                ));
            }
            if reward_v.len() != 1 {
                return Err(Error::parse(ln, "reward field must hold exactly one value"));
            }
            if params.len() != param_dim {
                return Err(Error::parse(
                    ln,
                    format!(
                        "dimension mismatch: header param_dim={param_dim}, row has {}",
                        params.len()
                    ),
                ));
            }
            if !map.grid.contains_index(&index) {
                return Err(Error::parse(
                    ln,
                    format!("cell index {index:?} outside the grid"),
                ));
            }
            let binned = map
                .grid
                .cell_of(&descriptor)
                .map_err(|e| Error::parse(ln, e.to_string()))?;
            if binned != index {
                return Err(Error::parse(
                    ln,
                    format!("descriptor {descriptor:?} belongs to cell {binned:?}, not {index:?}"),
                ));
            }
            if map.cells.contains_key(&index) {
                return Err(Error::parse(ln, format!("duplicate cell index {index:?}")));
            }
            map.cells.insert(
                index,
                MapEntry {
                    descriptor,
                    params,
                    reward: reward_v[0],
                },
            );
        }
        Ok(map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::io::write_atomic(path, self.to_map_string().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn parse_reals(line: usize, field: &str, what: &str) -> Result<Vec<f64>> {
    field
        .split_whitespace()
        .map(|t| {
            let v = t
                .parse::<f64>()
                .map_err(|e| Error::parse(line, format!("bad {what} value {t:?}: {e}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(line, format!("non-finite {what} value {t:?}")))
            }
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|t| {
            t.trim().parse::<T>().map_err(|e| {
                Error::parse(
                    line,
                    format!("malformed header: bad {key} entry {t:?}: {e}"),
                )
            })
        })
        .collect()
}

fn parse_header(line: usize, header: &str) -> Result<(GridSpec, usize)> {
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("MAP") || tokens.next() != Some("v1") {
        return Err(Error::parse(
            line,
            "malformed header: expected it to start with 'MAP v1'",
        ));
    }
    let (mut dim, mut res, mut lo, mut hi, mut pdim) = (None, None, None, None, None);
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| {
            Error::parse(
                line,
                format!("malformed header: token {tok:?} is not key=value"),
            )
        })?;
        match k {
            "dim" => dim = Some(parse_list::<usize>(line, k, v)?),
            "res" => res = Some(parse_list::<usize>(line, k, v)?),
            "lo" => lo = Some(parse_list::<f64>(line, k, v)?),
            "hi" => hi = Some(parse_list::<f64>(line, k, v)?),
            "param_dim" => pdim = Some(parse_list::<usize>(line, k, v)?),
            other => {
                return Err(Error::parse(
                    line,
                    format!("malformed header: unknown key {other:?}"),
                ))
            }
        }
    }
    let missing = |k: &str| Error::parse(line, format!("malformed header: missing {k}="));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let pdim = pdim.ok_or_else(|| missing("param_dim"))?;
    let (res, lo, hi) = (
        res.ok_or_else(|| missing("res"))?,
        lo.ok_or_else(|| missing("lo"))?,
        hi.ok_or_else(|| missing("hi"))?,
    );
    if dim.len() != 1 || pdim.len() != 1 {
        return Err(Error::parse(
            line,
            "malformed header: dim and param_dim take a single value",
        ));
    }
    if res.len() != dim[0] || lo.len() != dim[0] || hi.len() != dim[0] {
        return Err(Error::parse(
            line,
            format!(
                "dimension mismatch: dim={} but res/lo/hi have {}/{}/{} entries",
                dim[0],
                res.len(),
                lo.len(),
                hi.len()
            ),
        ));
    }
    let grid = GridSpec::new(lo, hi, res).map_err(|e| Error::parse(line, e.to_string()))?;
    Ok((grid, pdim[0]))
}
