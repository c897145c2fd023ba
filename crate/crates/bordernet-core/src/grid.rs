//! The 10×10 accuracy grid over stripe width × spacing, its difference
//! grids, and the CSV / PGM heatmap artifact formats.

use crate::error::{CoreError, Result};
use crate::imageio::write_pgm;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Width and spacing both run over 1..=10.
pub const GRID_SIDE: usize = 10;

/// Accuracies (or accuracy differences) indexed by (w, s), w-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyGrid {
    /// Row-major over w (outer) and s (inner), both 1-based in [1, 10].
    pub values: Vec<f64>,
    pub model_id: String,
    pub seed: u64,
    pub dataset_hash: String,
    /// Accuracy on the unoccluded test set; None for difference grids.
    pub clean_accuracy: Option<f64>,
    pub timestamp: String,
}

impl AccuracyGrid {
    pub fn empty(model_id: impl Into<String>, seed: u64, dataset_hash: impl Into<String>) -> Self {
        AccuracyGrid {
            values: vec![0.0; GRID_SIDE * GRID_SIDE],
            model_id: model_id.into(),
            seed,
            dataset_hash: dataset_hash.into(),
            clean_accuracy: None,
            timestamp: now_rfc3339(),
        }
    }

    fn index(w: u32, s: u32) -> usize {
        assert!(
            (1..=GRID_SIDE as u32).contains(&w) && (1..=GRID_SIDE as u32).contains(&s),
            "grid indices are 1-based in [1,10], got ({w},{s})"
        );
        (w as usize - 1) * GRID_SIDE + (s as usize - 1)
    }

    pub fn at(&self, w: u32, s: u32) -> f64 {
        self.values[Self::index(w, s)]
    }

    pub fn set(&mut self, w: u32, s: u32, value: f64) {
        self.values[Self::index(w, s)] = value;
    }

    /// Mean over the cells selected by `region(w, s)`.
    pub fn mean_over(&self, region: impl Fn(u32, u32) -> bool) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for w in 1..=GRID_SIDE as u32 {
            for s in 1..=GRID_SIDE as u32 {
                if region(w, s) {
                    sum += self.at(w, s);
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Elementwise a − b; metadata names both operands.
pub fn diff_grid(a: &AccuracyGrid, b: &AccuracyGrid) -> AccuracyGrid {
    AccuracyGrid {
        values: a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x - y)
            .collect(),
        model_id: format!("{}-minus-{}", a.model_id, b.model_id),
        seed: a.seed,
        dataset_hash: a.dataset_hash.clone(),
        clean_accuracy: None,
        timestamp: now_rfc3339(),
    }
}

/// CSV layout: header `w\s,1,…,10`, then one row per w with 6-decimal
/// values. Only the values travel through the CSV; richer metadata lives in
/// the JSON sidecar written next to it by the harness.
pub fn export_csv(grid: &AccuracyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("w\\s");
    for s in 1..=GRID_SIDE {
        out.push_str(&format!(",{s}"));
    }
    out.push('\n');
    for w in 1..=GRID_SIDE as u32 {
        out.push_str(&w.to_string());
        for s in 1..=GRID_SIDE as u32 {
            out.push_str(&format!(",{:.6}", grid.at(w, s)));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CoreError::io(path.display().to_string(), e))
}

/// Parse a grid CSV produced by [`export_csv`]. Metadata fields that the
/// CSV does not carry are filled with placeholders (model id = file stem).
pub fn import_csv(path: impl AsRef<Path>) -> Result<AccuracyGrid> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    let parse_err = |message: String| CoreError::CsvParse {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty file".into()))?;
    let expected_header = {
        let mut h = String::from("w\\s");
        for s in 1..=GRID_SIDE {
            h.push_str(&format!(",{s}"));
        }
        h
    };
    if header.trim_end() != expected_header {
        return Err(parse_err(format!("unexpected header '{header}'")));
    }
    let mut grid = AccuracyGrid::empty(
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "grid".into()),
        0,
        "",
    );
    grid.timestamp = String::new();
    let mut rows = 0usize;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != GRID_SIDE + 1 {
            return Err(parse_err(format!(
                "row {} has {} fields, expected {}",
                i + 2,
                fields.len(),
                GRID_SIDE + 1
            )));
        }
        let w: u32 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad w label '{}'", fields[0])))?;
        if w as usize != i + 1 {
            return Err(parse_err(format!("row {} labeled w={w}", i + 2)));
        }
        for (s, field) in fields[1..].iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("bad value '{field}'")))?;
            grid.set(w, s as u32 + 1, v);
        }
        rows += 1;
    }
    if rows != GRID_SIDE {
        return Err(parse_err(format!("{rows} data rows, expected {GRID_SIDE}")));
    }
    Ok(grid)
}

/// 10×10 grayscale heatmap: [min, max] mapped linearly onto [0, 255]; a
/// `.scale.txt` sidecar records the mapping so pixel values stay readable.
/// A constant grid renders mid-gray.
pub fn export_heatmap_pgm(grid: &AccuracyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (lo, hi) = (grid.min(), grid.max());
    let span = hi - lo;
    let pixels: Vec<u8> = grid
        .values
        .iter()
        .map(|&v| {
            if span <= f64::EPSILON {
                128
            } else {
                ((v - lo) / span * 255.0).round() as u8
            }
        })
        .collect();
    write_pgm(path, GRID_SIDE, GRID_SIDE, &pixels)?;
    let sidecar = format!(
        "model_id: {}\nmin: {lo:.6}\nmax: {hi:.6}\nvalue(gray) = min + (max - min) * gray / 255\nrows: w = 1..10 top to bottom; cols: s = 1..10 left to right\n",
        grid.model_id
    );
    let sidecar_path = path.with_extension("scale.txt");
    std::fs::write(&sidecar_path, sidecar)
        .map_err(|e| CoreError::io(sidecar_path.display().to_string(), e))
}
