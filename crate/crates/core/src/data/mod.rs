//! Trials, datasets, electrode layouts, normalization and stratified splits.

mod io;
mod layout;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, load_trial_csv, trial_to_csv, write_dataset, ManifestEntry};
pub use layout::{Electrode, ElectrodeLayout, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Relaxed,
    Stressed,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Relaxed, Label::Stressed];

    pub fn as_f64(self) -> f64 {
        match self {
            Label::Relaxed => 0.0,
            Label::Stressed => 1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Stressed
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One EEG recording: a channels × samples matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub id: String,
    pub label: Label,
    channels: usize,
    samples: usize,
    data: Vec<f64>,
}

impl Trial {
    pub fn new(id: impl Into<String>, label: Label, channels: usize, samples: usize, data: Vec<f64>) -> Result<Self> {
        let id = id.into();
        let bad = |reason: String| Error::Trial { id: id.clone(), reason };
        if channels == 0 {
            return Err(bad("no channels".into()));
        }
        if samples < 2 {
            return Err(bad(format!("need at least 2 samples, got {samples}")));
        }
        if data.len() != channels * samples {
            return Err(bad(format!("{} values for a {channels}x{samples} signal", data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(bad(format!(
                "non-finite sample at channel {}, index {}",
                pos / samples,
                pos % samples
            )));
        }
        Ok(Self {
            id,
            label,
            channels,
            samples,
            data,
        })
    }

    pub fn from_rows(id: impl Into<String>, label: Label, rows: &[Vec<f64>]) -> Result<Self> {
        let samples = rows.first().map_or(0, Vec::len);
        let id = id.into();
        if rows.iter().any(|r| r.len() != samples) {
            return Err(Error::Trial {
                id,
                reason: "ragged rows".into(),
            });
        }
        Self::new(id, label, rows.len(), samples, rows.concat())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.data[channel * self.samples..(channel + 1) * self.samples]
    }

    pub fn row_mut(&mut self, channel: usize) -> &mut [f64] {
        &mut self.data[channel * self.samples..(channel + 1) * self.samples]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.samples)
    }

    /// Copy with each row replaced by the columns selected by `columns`.
    pub(crate) fn select_columns(&self, columns: &[std::ops::Range<usize>]) -> Result<Self> {
        let samples: usize = columns.iter().map(|r| r.len()).sum();
        let mut data = Vec::with_capacity(self.channels * samples);
        for row in self.rows() {
            for r in columns {
                data.extend_from_slice(&row[r.clone()]);
            }
        }
        Trial::new(self.id.clone(), self.label, self.channels, samples, data)
    }
}

/// Column range of segment `index` when `samples` is cut into `segments` equal parts.
pub fn segment_range(samples: usize, segments: usize, index: usize) -> Result<std::ops::Range<usize>> {
    if segments == 0 || !samples.is_multiple_of(segments) {
        return Err(Error::Config(format!(
            "{samples} samples cannot be cut into {segments} equal segments"
        )));
    }
    if index >= segments {
        return Err(Error::Config(format!("segment {index} out of range 0..{segments}")));
    }
    let len = samples / segments;
    Ok(index * len..(index + 1) * len)
}

/// Per-channel population z-score. Constant rows become all zeros.
pub fn zscore_normalize(trial: &Trial) -> Trial {
    let mut out = trial.clone();
    for c in 0..out.channels {
        zscore_in_place(out.row_mut(c));
    }
    out
}

pub(crate) fn zscore_in_place(row: &mut [f64]) {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    // Rows that are constant up to rounding carry no signal.
    if std <= 1e-12 * mean.abs().max(1.0) {
        row.fill(0.0);
    } else {
        row.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub trials: Vec<Trial>,
    pub layout: ElectrodeLayout,
}

impl Dataset {
    pub fn new(trials: Vec<Trial>, layout: ElectrodeLayout) -> Result<Self> {
        let n = layout.len();
        let mut ids = std::collections::HashSet::new();
        for t in &trials {
            if t.channels() != n {
                return Err(Error::Shape(format!(
                    "trial `{}` has {} channels, layout has {n}",
                    t.id,
                    t.channels()
                )));
            }
            if !ids.insert(t.id.as_str()) {
                return Err(Error::Config(format!("duplicate trial id `{}`", t.id)));
            }
        }
        Ok(Self { trials, layout })
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.layout.len()
    }

    /// Common sample count, if all trials agree.
    pub fn samples(&self) -> Option<usize> {
        let first = self.trials.first()?.samples();
        self.trials.iter().all(|t| t.samples() == first).then_some(first)
    }

    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for t in &self.trials {
            counts[t.label.index()] += 1;
        }
        counts
    }

    pub fn with_trials(&self, trials: Vec<Trial>) -> Self {
        Self {
            trials,
            layout: self.layout.clone(),
        }
    }

    pub fn map_trials<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Trial) -> Result<Trial>,
    {
        Ok(self.with_trials(self.trials.iter().map(f).collect::<Result<_>>()?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Stratified train/validation/test split.
///
/// Each partition's size is `round(len * fraction)`, allocated across labels
/// by largest remainder (ties to the lower label). Trials are ordered by id
/// before the seeded shuffle, so the result does not depend on input order.
pub fn stratified_split(dataset: &Dataset, test_fraction: f64, val_fraction: f64, seed: u64) -> Result<Split> {
    let mut parts = stratified_partition(dataset, &[test_fraction, val_fraction], seed)?;
    let train = parts.pop().expect("remainder partition");
    let val = parts.pop().expect("val partition");
    let test = parts.pop().expect("test partition");
    Ok(Split { train, val, test })
}

/// Two-way stratified split returning `(rest, held_out)`.
pub fn stratified_holdout(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut parts = stratified_partition(dataset, &[fraction], seed)?;
    let rest = parts.pop().expect("remainder partition");
    let held = parts.pop().expect("held-out partition");
    Ok((rest, held))
}

/// Partition into `fractions.len() + 1` datasets; the last one takes the remainder.
pub fn stratified_partition(dataset: &Dataset, fractions: &[f64], seed: u64) -> Result<Vec<Dataset>> {
    if fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::Config(format!(
            "split fractions must lie in (0,1): {fractions:?}"
        )));
    }
    if fractions.iter().sum::<f64>() >= 1.0 {
        return Err(Error::Config(format!(
            "split fractions must sum below 1: {fractions:?}"
        )));
    }
    let total = dataset.len();
    let counts = dataset.label_counts();

    let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, t) in dataset.trials.iter().enumerate() {
        by_label.entry(t.label).or_default().push(i);
    }

    // quota[p][label]
    let mut quota = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let size = (total as f64 * f).round() as usize;
        if size == 0 {
            return Err(Error::InsufficientData(format!(
                "fraction {f} of {total} trials leaves an empty partition"
            )));
        }
        quota.push(largest_remainder(size, counts, total));
    }
    for label in Label::ALL {
        let used: usize = quota.iter().map(|q| q[label.index()]).sum();
        if counts[label.index()] > 0 && used >= counts[label.index()] {
            return Err(Error::InsufficientData(format!(
                "{} {label:?} trials cannot populate every partition",
                counts[label.index()]
            )));
        }
    }

    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); fractions.len() + 1];
    for (label, mut idx) in by_label {
        idx.sort_by(|&a, &b| dataset.trials[a].id.cmp(&dataset.trials[b].id));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(label.index() as u64 + 1));
        idx.shuffle(&mut rng);
        let mut cursor = 0;
        for (p, q) in quota.iter().enumerate() {
            let take = q[label.index()];
            assignment[p].extend_from_slice(&idx[cursor..cursor + take]);
            cursor += take;
        }
        assignment[fractions.len()].extend_from_slice(&idx[cursor..]);
    }

    Ok(assignment
        .into_iter()
        .map(|idx| dataset.with_trials(idx.into_iter().map(|i| dataset.trials[i].clone()).collect()))
        .collect())
}

fn largest_remainder(size: usize, counts: [usize; 2], total: usize) -> [usize; 2] {
    let exact: Vec<f64> = counts.iter().map(|&c| size as f64 * c as f64 / total as f64).collect();
    let mut alloc = [exact[0].floor() as usize, exact[1].floor() as usize];
    let mut remaining = size - alloc.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &l in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if alloc[l] < counts[l] {
            alloc[l] += 1;
            remaining -= 1;
        }
    }
    alloc
}
