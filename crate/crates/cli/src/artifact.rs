//! Provenance records, value-grid CSV files and solve artifacts.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use mftg_core::solver::{SimplexGrid, ValueGrid, ValueKind};
use mftg_core::{GameModel, Team};

use crate::canonical::{canonical, canonical_line, format_float};
use crate::error::{io_err, CliError, CliResult};

pub const TOOL: &str = "mftg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub args: Vec<String>,
}

impl Provenance {
    pub fn new(seed: Option<u64>, args: &[String]) -> Self {
        Provenance {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            args: args.to_vec(),
        }
    }

    /// `#`-prefixed comment lines placed above a CSV header.
    pub fn csv_comment(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        let args = canonical_line(&self.args).expect("argument list serializes");
        format!("# tool: {} {}\n# seed: {seed}\n# args: {args}\n", self.tool, self.version)
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &canonical(value).expect("artifact serializes"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Artifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn values_file(kind: ValueKind) -> String {
    format!("{kind}.csv")
}

pub fn successors_file(kind: ValueKind) -> String {
    format!("{kind}_successors.csv")
}

fn coord_header(prefix: &str, n: usize) -> String {
    (0..n).map(|i| format!(",{prefix}_{i}")).collect()
}

/// Writes the value CSV (`t,mu_index,nu_index,mu_0..,nu_0..,value`) and the
/// successor CSV (`t,mu_index,nu_index,next_mu_index,next_nu_index`).
pub fn write_value_grid(dir: &Path, grid: &ValueGrid, prov: &Provenance) -> CliResult<()> {
    let (bg, rg) = (grid.blue_grid(), grid.red_grid());
    let blue_coords: Vec<String> = (0..bg.len()).map(|i| bg.coords(i).iter().map(|c| format!(",{}", format_float(*c))).collect()).collect();
    let red_coords: Vec<String> = (0..rg.len()).map(|j| rg.coords(j).iter().map(|c| format!(",{}", format_float(*c))).collect()).collect();

    let path = dir.join(values_file(grid.kind()));
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let emit = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        w.write_all(prov.csv_comment().as_bytes())?;
        writeln!(w, "t,mu_index,nu_index{}{},value", coord_header("mu", bg.dim()), coord_header("nu", rg.dim()))?;
        for t in 0..=grid.horizon() {
            for (i, bc) in blue_coords.iter().enumerate() {
                for (j, rc) in red_coords.iter().enumerate() {
                    writeln!(w, "{t},{i},{j}{bc}{rc},{}", format_float(grid.value_at_index(t, i, j)))?;
                }
            }
        }
        w.flush()
    };
    emit(&mut w).map_err(io_err(&path))?;

    let path = dir.join(successors_file(grid.kind()));
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let emit = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        w.write_all(prov.csv_comment().as_bytes())?;
        writeln!(w, "t,mu_index,nu_index,next_mu_index,next_nu_index")?;
        for t in 0..grid.horizon() {
            for i in 0..bg.len() {
                for j in 0..rg.len() {
                    let (a, b) = grid.successor_at_index(t, i, j);
                    writeln!(w, "{t},{i},{j},{a},{b}")?;
                }
            }
        }
        w.flush()
    };
    emit(&mut w).map_err(io_err(&path))
}

/// Data rows of a CSV file with `#` comments and the header line skipped.
fn csv_rows(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        rows.push(line.split(',').map(str::to_string).collect());
    }
    Ok(rows)
}

fn malformed(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Artifact {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: &[String], i: usize) -> CliResult<T> {
    row.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| malformed(path, format!("bad field {i} in row {row:?}")))
}

/// Reloads a grid written by [`write_value_grid`].
pub fn read_value_grid(dir: &Path, kind: ValueKind, model: &GameModel, bins: u32, membership_tol: f64) -> CliResult<ValueGrid> {
    let bg = SimplexGrid::new(model.num_states(Team::Blue), bins)?;
    let rg = SimplexGrid::new(model.num_states(Team::Red), bins)?;
    let (nb, nr, horizon) = (bg.len(), rg.len(), model.horizon());
    let n = nb * nr;

    let path = dir.join(values_file(kind));
    let rows = csv_rows(&path)?;
    if rows.len() != (horizon + 1) * n {
        return Err(malformed(&path, format!("expected {} rows, found {}", (horizon + 1) * n, rows.len())));
    }
    let mut values = vec![vec![f64::NAN; n]; horizon + 1];
    let width = 3 + bg.dim() + rg.dim() + 1;
    for row in &rows {
        if row.len() != width {
            return Err(malformed(&path, format!("expected {width} columns, found {}", row.len())));
        }
        let (t, i, j): (usize, usize, usize) = (parse_field(&path, row, 0)?, parse_field(&path, row, 1)?, parse_field(&path, row, 2)?);
        if t > horizon || i >= nb || j >= nr {
            return Err(malformed(&path, format!("index out of range in row {row:?}")));
        }
        values[t][i * nr + j] = parse_field(&path, row, width - 1)?;
    }
    if values.iter().flatten().any(|v| v.is_nan()) {
        return Err(malformed(&path, "missing grid points"));
    }

    let path = dir.join(successors_file(kind));
    let rows = csv_rows(&path)?;
    if rows.len() != horizon * n {
        return Err(malformed(&path, format!("expected {} rows, found {}", horizon * n, rows.len())));
    }
    let mut successors = vec![vec![(u32::MAX, u32::MAX); n]; horizon];
    for row in &rows {
        let (t, i, j): (usize, usize, usize) = (parse_field(&path, row, 0)?, parse_field(&path, row, 1)?, parse_field(&path, row, 2)?);
        let (a, b): (u32, u32) = (parse_field(&path, row, 3)?, parse_field(&path, row, 4)?);
        if t >= horizon || i >= nb || j >= nr || a as usize >= nb || b as usize >= nr {
            return Err(malformed(&path, format!("index out of range in row {row:?}")));
        }
        successors[t][i * nr + j] = (a, b);
    }
    if successors.iter().flatten().any(|s| s.0 == u32::MAX) {
        return Err(malformed(&path, "missing grid points"));
    }
    Ok(ValueGrid::from_parts(kind, bg, rg, membership_tol, values, successors)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueAt {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub provenance: Provenance,
    pub model: String,
    pub model_name: String,
    pub sizes: [usize; 4],
    pub horizon: usize,
    #[serde(rename = "G")]
    pub bins: u32,
    pub kind: String,
    pub grids: Vec<ValueKind>,
    pub membership_tol: f64,
    pub runtime_secs: f64,
    pub value_at: Option<ValueAt>,
    pub max_abs_gap: Option<f64>,
}

pub fn model_sizes(model: &GameModel) -> [usize; 4] {
    let s = model.sizes();
    [s.blue_states, s.red_states, s.blue_actions, s.red_actions]
}

/// A directory written by `mftg solve`.
pub struct SolveArtifact {
    pub dir: PathBuf,
    pub summary: SolveSummary,
}

impl SolveArtifact {
    pub fn open(dir: &Path) -> CliResult<Self> {
        let path = dir.join(SUMMARY_FILE);
        if !path.is_file() {
            return Err(CliError::MissingArtifact(format!("{} not found", path.display())));
        }
        Ok(SolveArtifact {
            dir: dir.to_path_buf(),
            summary: read_json(&path)?,
        })
    }

    pub fn check_model(&self, model: &GameModel) -> CliResult<()> {
        let s = &self.summary;
        if s.model_name != model.name() || s.sizes != model_sizes(model) || s.horizon != model.horizon() {
            return Err(CliError::Usage(format!(
                "solve artifact in {} was produced for model '{}', not '{}'",
                self.dir.display(),
                s.model_name,
                model.name()
            )));
        }
        Ok(())
    }

    pub fn has(&self, kind: ValueKind) -> bool {
        self.summary.grids.contains(&kind)
    }

    pub fn grid(&self, kind: ValueKind, model: &GameModel) -> CliResult<Arc<ValueGrid>> {
        if !self.has(kind) {
            return Err(CliError::MissingArtifact(format!("{} holds no {kind} grid", self.dir.display())));
        }
        self.check_model(model)?;
        Ok(Arc::new(read_value_grid(&self.dir, kind, model, self.summary.bins, self.summary.membership_tol)?))
    }

    /// Preferred grid for a team: lower for Blue, upper for Red, falling
    /// back to whichever was solved.
    pub fn grid_for(&self, team: Team, model: &GameModel) -> CliResult<Arc<ValueGrid>> {
        let (first, second) = match team {
            Team::Blue => (ValueKind::Lower, ValueKind::Upper),
            Team::Red => (ValueKind::Upper, ValueKind::Lower),
        };
        self.grid(if self.has(first) { first } else { second }, model)
    }
}
