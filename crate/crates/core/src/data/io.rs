use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Dataset, ElectrodeLayout, Label, Trial};
use crate::error::{Error, Result};

/// One record of the JSON manifest. `file` is relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub label: Label,
}

/// Read a trial CSV: one row per channel, one column per sample.
pub fn load_trial_csv(path: impl AsRef<Path>, id: &str, label: Label) -> Result<Trial> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading trial {}", path.display()), e))?;
    let parse_err = |reason: String| Error::Parse {
        path: path.to_path_buf(),
        reason,
    };
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(format!("line {}: bad value `{}`", lineno + 1, s.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err("empty trial file".into()));
    }
    Trial::from_rows(id, label, &rows)
}

pub fn trial_to_csv(trial: &Trial) -> String {
    let mut out = String::with_capacity(trial.data().len() * 20);
    for row in trial.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Load every trial listed in `manifest` against `layout`.
pub fn load_dataset(manifest: impl AsRef<Path>, layout: &ElectrodeLayout) -> Result<Dataset> {
    let manifest = manifest.as_ref();
    let text =
        fs::read_to_string(manifest).map_err(|e| Error::io(format!("reading manifest {}", manifest.display()), e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: manifest.to_path_buf(),
        reason: e.to_string(),
    })?;
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let trials = entries
        .iter()
        .map(|e| load_trial_csv(base.join(&e.file), &e.id, e.label))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trials, layout.clone())
}

/// Write `trials/<id>.csv` files and `manifest.json` under `dir`; returns the manifest path.
pub fn write_dataset(dir: impl AsRef<Path>, dataset: &Dataset) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let trial_dir = dir.join("trials");
    fs::create_dir_all(&trial_dir).map_err(|e| Error::io(format!("creating {}", trial_dir.display()), e))?;
    let mut entries = Vec::with_capacity(dataset.len());
    for t in &dataset.trials {
        let file = format!("trials/{}.csv", t.id);
        let path = dir.join(&file);
        fs::write(&path, trial_to_csv(t)).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        entries.push(ManifestEntry {
            id: t.id.clone(),
            file,
            label: t.label,
        });
    }
    let manifest = dir.join("manifest.json");
    fs::write(&manifest, serde_json::to_string_pretty(&entries)? + "\n")
        .map_err(|e| Error::io(format!("writing {}", manifest.display()), e))?;
    Ok(manifest)
}
