//! Resumable sweeps. Finished cells are persisted every `every` cells; a
//! restart with the same key picks up after the last saved cell.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use windflex_core::sweep::{CellStats, Executor, LossSurface, PreparedSweep};

use crate::error::{display, IoError, Result};

/// Cell statistics stored as raw bits so a resumed run is bit-identical.
#[derive(Debug, Serialize, Deserialize)]
struct Saved {
    key: String,
    total_cells: usize,
    /// Per cell, per scenario: expected, per-node penalties, stderr.
    cells: Vec<Vec<[u64; 4]>>,
}

fn pack(c: &CellStats) -> [u64; 4] {
    [
        c.expected.to_bits(),
        c.per_node[0].to_bits(),
        c.per_node[1].to_bits(),
        c.stderr.to_bits(),
    ]
}

fn unpack(b: &[u64; 4]) -> CellStats {
    CellStats {
        expected: f64::from_bits(b[0]),
        per_node: [f64::from_bits(b[1]), f64::from_bits(b[2])],
        stderr: f64::from_bits(b[3]),
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub path: PathBuf,
    pub every: usize,
    /// Identifies the run; a checkpoint with another key is ignored.
    pub key: String,
}

#[derive(Debug)]
pub enum Progress {
    Complete(LossSurface),
    Partial { done: usize, total: usize },
}

impl Checkpoint {
    fn load(&self, total: usize) -> Result<Vec<Vec<CellStats>>> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&self.path).map_err(|e| IoError::io(&self.path, e))?;
        let saved: Saved = serde_json::from_str(&text).map_err(|e| {
            IoError::invalid(display(&self.path), format!("unreadable checkpoint: {e}"))
        })?;
        if saved.key != self.key || saved.total_cells != total || saved.cells.len() > total {
            return Ok(Vec::new());
        }
        Ok(saved
            .cells
            .iter()
            .map(|c| c.iter().map(unpack).collect())
            .collect())
    }

    fn save(&self, total: usize, cells: &[Vec<CellStats>]) -> Result<()> {
        let saved = Saved {
            key: self.key.clone(),
            total_cells: total,
            cells: cells.iter().map(|c| c.iter().map(pack).collect()).collect(),
        };
        let tmp = self.path.with_extension("tmp");
        fs::write(
            &tmp,
            serde_json::to_string(&saved).expect("checkpoint serialises"),
        )
        .map_err(|e| IoError::io(&tmp, e))?;
        fs::rename(&tmp, &self.path).map_err(|e| IoError::io(&self.path, e))
    }

    /// Evaluate remaining cells in chunks, saving after each chunk. With a
    /// `budget`, stops after that many newly evaluated cells.
    pub fn run<E: Executor>(
        &self,
        prepared: &PreparedSweep,
        executor: &E,
        budget: Option<usize>,
    ) -> Result<Progress> {
        let total = prepared.cell_count();
        let mut cells = self.load(total)?;
        let stop = budget.map_or(total, |b| (cells.len() + b).min(total));
        while cells.len() < stop {
            let start = cells.len();
            let len = self.every.max(1).min(stop - start);
            let chunk = executor.map_indexed(len, |k| prepared.evaluate_cell(start + k));
            for c in chunk {
                cells.push(c.map_err(|e| IoError::model("sweep", e))?);
            }
            self.save(total, &cells)?;
        }
        if cells.len() < total {
            return Ok(Progress::Partial {
                done: cells.len(),
                total,
            });
        }
        let surface = prepared
            .assemble(cells)
            .map_err(|e| IoError::model("sweep", e))?;
        if self.path.exists() {
            fs::remove_file(&self.path).map_err(|e| IoError::io(&self.path, e))?;
        }
        Ok(Progress::Complete(surface))
    }
}

pub fn default_path(out: &Path) -> PathBuf {
    out.join("sweep.checkpoint.json")
}
