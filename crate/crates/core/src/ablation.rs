//! Channel, region and temporal-segment ablation.
//!
//! Channel and region filters zero rows, so the channel count, positions and
//! structural graph stay fixed. Segment filters cut columns and change `T`.
//! Graphs are always rebuilt from the filtered signal downstream.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{segment_range, Dataset, Region};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{run_experiment, Metrics, MetricsSummary, ModelConfig, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    ChannelOnly,
    ChannelRemoved,
    RegionOnly,
    RegionRemoved,
    SegmentOnly,
    SegmentRemoved,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::ChannelOnly,
        Protocol::ChannelRemoved,
        Protocol::RegionOnly,
        Protocol::RegionRemoved,
        Protocol::SegmentOnly,
        Protocol::SegmentRemoved,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::ChannelOnly => "channel_only",
            Protocol::ChannelRemoved => "channel_removed",
            Protocol::RegionOnly => "region_only",
            Protocol::RegionRemoved => "region_removed",
            Protocol::SegmentOnly => "segment_only",
            Protocol::SegmentRemoved => "segment_removed",
        }
    }

    pub fn mode(self) -> FilterMode {
        match self {
            Protocol::ChannelOnly | Protocol::RegionOnly | Protocol::SegmentOnly => FilterMode::Only,
            _ => FilterMode::Removed,
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown ablation protocol `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    Only,
    Removed,
}

fn zero_channels(dataset: &Dataset, zero: impl Fn(usize) -> bool) -> Result<Dataset> {
    dataset.map_trials(|t| {
        let mut out = t.clone();
        for c in (0..t.channels()).filter(|&c| zero(c)) {
            out.row_mut(c).fill(0.0);
        }
        Ok(out)
    })
}

fn check_channel(dataset: &Dataset, channel: usize) -> Result<()> {
    if channel >= dataset.channels() {
        return Err(Error::Config(format!(
            "channel {channel} out of range 0..{}",
            dataset.channels()
        )));
    }
    Ok(())
}

/// Zero every channel except `channel`.
pub fn keep_single_channel(dataset: &Dataset, channel: usize) -> Result<Dataset> {
    check_channel(dataset, channel)?;
    zero_channels(dataset, |c| c != channel)
}

/// Zero `channel` only.
pub fn remove_single_channel(dataset: &Dataset, channel: usize) -> Result<Dataset> {
    check_channel(dataset, channel)?;
    zero_channels(dataset, |c| c == channel)
}

pub fn region_filter(dataset: &Dataset, region: Region, mode: FilterMode) -> Result<Dataset> {
    let members = dataset.layout.region_members(region);
    if members.is_empty() {
        return Err(Error::Config(format!("region {region} has no channels in this layout")));
    }
    let inside = |c: usize| members.contains(&c);
    match mode {
        FilterMode::Only => zero_channels(dataset, |c| !inside(c)),
        FilterMode::Removed => zero_channels(dataset, inside),
    }
}

/// Keep only segment `index` of `segments`, or cut it out and join the rest.
pub fn segment_filter(dataset: &Dataset, index: usize, segments: usize, mode: FilterMode) -> Result<Dataset> {
    let samples = dataset
        .samples()
        .ok_or_else(|| Error::Shape("segment filter needs a common sample count".into()))?;
    let range = segment_range(samples, segments, index)?;
    let columns = match mode {
        FilterMode::Only => vec![range],
        FilterMode::Removed => vec![0..range.start, range.end..samples],
    };
    if columns.iter().map(|r| r.len()).sum::<usize>() == 0 {
        return Err(Error::InsufficientData(format!(
            "removing segment {index} of {segments} leaves no samples"
        )));
    }
    dataset.map_trials(|t| t.select_columns(&columns))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Channel(usize),
    Region(Region),
    Segment(usize),
}

fn units(protocol: Protocol, dataset: &Dataset, segments: usize) -> Vec<(String, Unit)> {
    let mut units: Vec<(String, Unit)> = match protocol {
        Protocol::ChannelOnly | Protocol::ChannelRemoved => dataset
            .layout
            .names()
            .enumerate()
            .map(|(i, n)| (n.to_string(), Unit::Channel(i)))
            .collect(),
        Protocol::RegionOnly | Protocol::RegionRemoved => dataset
            .layout
            .regions()
            .into_iter()
            .map(|r| (r.as_str().to_string(), Unit::Region(r)))
            .collect(),
        Protocol::SegmentOnly | Protocol::SegmentRemoved => (0..segments)
            .map(|s| (format!("seg{s:02}"), Unit::Segment(s)))
            .collect(),
    };
    units.sort_by(|a, b| a.0.cmp(&b.0));
    units
}

fn apply(unit: Unit, mode: FilterMode, dataset: &Dataset, segments: usize) -> Result<Dataset> {
    match (unit, mode) {
        (Unit::Channel(c), FilterMode::Only) => keep_single_channel(dataset, c),
        (Unit::Channel(c), FilterMode::Removed) => remove_single_channel(dataset, c),
        (Unit::Region(r), m) => region_filter(dataset, r, m),
        (Unit::Segment(s), m) => segment_filter(dataset, s, segments, m),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub unit: String,
    /// Mean test metrics over seeds.
    pub metrics: Option<Metrics>,
    pub std: Option<Metrics>,
    /// Unit accuracy minus baseline accuracy.
    pub delta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub protocol: Protocol,
    pub seeds: Vec<u64>,
    pub baseline: Metrics,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// Successful rows by descending accuracy; ties keep name order.
    pub fn ranked(&self) -> Vec<&AblationRow> {
        let mut rows: Vec<&AblationRow> = self.rows.iter().filter(|r| r.metrics.is_some()).collect();
        rows.sort_by(|a, b| {
            let acc = |r: &AblationRow| r.metrics.map_or(f64::NEG_INFINITY, |m| m.accuracy);
            acc(b).total_cmp(&acc(a))
        });
        rows
    }

    pub fn row(&self, unit: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.unit == unit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub segments: usize,
    /// How units are scheduled; each unit's training uses `TrainConfig::execution`.
    pub execution: Execution,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            segments: 10,
            execution: Execution::default(),
        }
    }
}

/// Mean test metrics over `seeds`, each seed fixing the split, init and shuffles.
fn mean_over_seeds(
    dataset: &Dataset,
    model: &ModelConfig,
    train: &TrainConfig,
    seeds: &[u64],
) -> Result<MetricsSummary> {
    let runs = seeds
        .iter()
        .map(|&s| {
            let result = run_experiment(&model.with_seed(s), dataset, &TrainConfig { seed: s, ..*train })?;
            Ok(result.test.metrics)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsSummary::from_runs(&runs).expect("seeds are non-empty"))
}

/// Retrain from scratch on every filtered unit and compare with the unfiltered baseline.
///
/// Filters apply to the whole dataset before splitting; they preserve trial ids
/// and labels, so each seed sees the same partition for every unit.
pub fn run_ablation(
    protocol: Protocol,
    dataset: &Dataset,
    model: &ModelConfig,
    train: &TrainConfig,
    seeds: &[u64],
    config: &AblationConfig,
) -> Result<AblationReport> {
    if seeds.is_empty() {
        return Err(Error::Config("ablation needs at least one seed".into()));
    }
    model.validate()?;
    train.validate()?;
    let baseline = mean_over_seeds(dataset, model, train, seeds)?.mean;
    let units = units(protocol, dataset, config.segments);
    let rows = config.execution.map(&units, |_, (name, unit)| {
        let result = apply(*unit, protocol.mode(), dataset, config.segments)
            .and_then(|filtered| mean_over_seeds(&filtered, model, train, seeds));
        match result {
            Ok(summary) => AblationRow {
                unit: name.clone(),
                metrics: Some(summary.mean),
                std: Some(summary.std),
                delta: Some(summary.mean.accuracy - baseline.accuracy),
                error: None,
            },
            Err(e) => AblationRow {
                unit: name.clone(),
                metrics: None,
                std: None,
                delta: None,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(AblationReport {
        protocol,
        seeds: seeds.to_vec(),
        baseline,
        rows,
    })
}
