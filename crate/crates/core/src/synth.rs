//! Seeded synthetic EEG with a controllable planted stress signature.
//!
//! Every channel carries unit-variance pink noise. Stressed trials also get,
//! on the signature channels and inside the signature segments, a sinusoid
//! shared by those channels (random phase per trial) plus a shared pink
//! noise source. Both raise the channels' mutual correlation, which is what
//! the functional graph picks up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{segment_range, Dataset, ElectrodeLayout, Label, Trial};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution};

/// Voss-McCartney rows; row `r` is redrawn every `2^r` samples.
const PINK_ROWS: u32 = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_relaxed: usize,
    pub n_stressed: usize,
    pub channels: usize,
    pub samples: usize,
    pub sample_rate: f64,
    pub segments: usize,
    pub signature_channels: Vec<usize>,
    /// Empty means every segment.
    pub signature_segments: Vec<usize>,
    /// Peak amplitude in units of the background noise std.
    pub signature_amplitude: f64,
    pub signature_freq: f64,
    pub shared_noise_gain: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_relaxed: 120,
            n_stressed: 360,
            channels: 32,
            samples: 3200,
            sample_rate: 128.0,
            segments: 10,
            signature_channels: vec![2, 5],
            signature_segments: Vec::new(),
            signature_amplitude: 3.0,
            signature_freq: 10.0,
            shared_noise_gain: 1.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Balanced spec with no planted signal.
    pub fn null(n_per_label: usize) -> Self {
        Self {
            n_relaxed: n_per_label,
            n_stressed: n_per_label,
            signature_amplitude: 0.0,
            shared_noise_gain: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_relaxed + self.n_stressed == 0 {
            return Err(Error::Config("synthetic dataset needs at least one trial".into()));
        }
        if self.channels < 2 || self.channels > 32 {
            return Err(Error::Config(format!(
                "channels must lie in 2..=32 (bundled layout), got {}",
                self.channels
            )));
        }
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!(
                "sample_rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if !self.signature_segments.is_empty() {
            segment_range(self.samples, self.segments, 0)?;
        }
        if let Some(c) = self.signature_channels.iter().find(|&&c| c >= self.channels) {
            return Err(Error::Config(format!(
                "signature channel {c} out of range 0..{}",
                self.channels
            )));
        }
        if let Some(s) = self.signature_segments.iter().find(|&&s| s >= self.segments) {
            return Err(Error::Config(format!(
                "signature segment {s} out of range 0..{}",
                self.segments
            )));
        }
        for (name, v) in [
            ("signature_amplitude", self.signature_amplitude),
            ("shared_noise_gain", self.shared_noise_gain),
            ("signature_freq", self.signature_freq),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn signature_columns(&self) -> Vec<std::ops::Range<usize>> {
        if self.signature_segments.is_empty() {
            return std::iter::once(0..self.samples).collect();
        }
        let mut segs = self.signature_segments.clone();
        segs.sort_unstable();
        segs.dedup();
        segs.into_iter()
            .map(|s| segment_range(self.samples, self.segments, s).expect("validated"))
            .collect()
    }
}

/// Voss-McCartney pink noise scaled to unit variance.
pub fn pink_noise(samples: usize, seed: u64) -> Vec<f64> {
    pink_from(&mut ChaCha8Rng::seed_from_u64(seed), samples)
}

fn pink_from(rng: &mut ChaCha8Rng, samples: usize) -> Vec<f64> {
    let mut rows = [0.0f64; PINK_ROWS as usize];
    let norm = (PINK_ROWS as f64).sqrt().recip();
    (0..samples)
        .map(|n| {
            for (r, row) in rows.iter_mut().enumerate() {
                if n % (1usize << r) == 0 {
                    *row = rng.sample(StandardNormal);
                }
            }
            rows.iter().sum::<f64>() * norm
        })
        .collect()
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    generate_with(spec, Execution::default())
}

/// Generate with an explicit execution mode. Each trial draws from its own
/// derived seed, so the output does not depend on the mode.
pub fn generate_with(spec: &SynthSpec, exec: Execution) -> Result<Dataset> {
    spec.validate()?;
    let layout = ElectrodeLayout::default_32().truncated(spec.channels)?;
    let columns = spec.signature_columns();
    let total = spec.n_relaxed + spec.n_stressed;
    let trials = exec
        .map_range(total, |i| {
            let (label, k) = if i < spec.n_relaxed {
                (Label::Relaxed, i)
            } else {
                (Label::Stressed, i - spec.n_relaxed)
            };
            synth_trial(spec, &columns, label, k, derive_seed(spec.seed, i as u64))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trials, layout)
}

fn synth_trial(
    spec: &SynthSpec,
    columns: &[std::ops::Range<usize>],
    label: Label,
    k: usize,
    seed: u64,
) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = spec.samples;
    let mut data = Vec::with_capacity(spec.channels * t);
    for _ in 0..spec.channels {
        data.extend(pink_from(&mut rng, t));
    }
    if label == Label::Stressed {
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let shared = pink_from(&mut rng, t);
        let omega = std::f64::consts::TAU * spec.signature_freq / spec.sample_rate;
        for &c in &spec.signature_channels {
            let row = &mut data[c * t..(c + 1) * t];
            for range in columns {
                for n in range.clone() {
                    row[n] += spec.signature_amplitude * (omega * n as f64 + phase).sin()
                        + spec.shared_noise_gain * shared[n];
                }
            }
        }
    }
    let tag = match label {
        Label::Relaxed => "relaxed",
        Label::Stressed => "stressed",
    };
    Trial::new(format!("{tag}-{k:04}"), label, spec.channels, t, data)
}
