use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_LAYOUT: &str = include_str!("../../data/layout_32.csv");

/// Scalp region of a 10-20 electrode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Frontal,
    FrontalCentral,
    FrontalTemporal,
    Temporal,
    Central,
    CentralParietal,
    Parietal,
    ParietalOccipital,
    Occipital,
}

impl Region {
    pub const ALL: [Region; 9] = [
        Region::Frontal,
        Region::FrontalCentral,
        Region::FrontalTemporal,
        Region::Temporal,
        Region::Central,
        Region::CentralParietal,
        Region::Parietal,
        Region::ParietalOccipital,
        Region::Occipital,
    ];

    // Two-letter prefixes first so the longest prefix wins.
    const PREFIXES: [(&'static str, Region); 11] = [
        ("fp", Region::Frontal),
        ("af", Region::Frontal),
        ("fc", Region::FrontalCentral),
        ("ft", Region::FrontalTemporal),
        ("cp", Region::CentralParietal),
        ("po", Region::ParietalOccipital),
        ("f", Region::Frontal),
        ("t", Region::Temporal),
        ("c", Region::Central),
        ("p", Region::Parietal),
        ("o", Region::Occipital),
    ];

    /// Resolve a 10-20 channel name by longest case-insensitive prefix.
    pub fn from_channel_name(name: &str) -> Option<Region> {
        let lower = name.trim().to_ascii_lowercase();
        Self::PREFIXES
            .iter()
            .find(|(prefix, _)| lower.starts_with(prefix))
            .map(|&(_, region)| region)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Frontal => "frontal",
            Region::FrontalCentral => "frontal-central",
            Region::FrontalTemporal => "frontal-temporal",
            Region::Temporal => "temporal",
            Region::Central => "central",
            Region::CentralParietal => "central-parietal",
            Region::Parietal => "parietal",
            Region::ParietalOccipital => "parietal-occipital",
            Region::Occipital => "occipital",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown region `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub name: String,
    pub position: [f64; 2],
    pub region: Region,
}

/// Ordered electrode set with 2-D head coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    electrodes: Vec<Electrode>,
}

impl ElectrodeLayout {
    /// Build a layout from `(name, position)` pairs, deriving regions from names.
    pub fn new<S: Into<String>>(channels: impl IntoIterator<Item = (S, [f64; 2])>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut electrodes = Vec::new();
        for (name, position) in channels {
            let name: String = name.into();
            if name.is_empty() {
                return Err(Error::Layout("empty channel name".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Layout(format!("duplicate channel `{name}`")));
            }
            if !position.iter().all(|v| v.is_finite()) {
                return Err(Error::Layout(format!("non-finite coordinates for `{name}`")));
            }
            let region = Region::from_channel_name(&name)
                .ok_or_else(|| Error::Layout(format!("no region rule matches `{name}`")))?;
            electrodes.push(Electrode { name, position, region });
        }
        if electrodes.len() < 2 {
            return Err(Error::Layout(format!(
                "need at least 2 channels, got {}",
                electrodes.len()
            )));
        }
        Ok(Self { electrodes })
    }

    /// The bundled 32-channel 10-20 montage.
    pub fn default_32() -> Self {
        Self::parse(DEFAULT_LAYOUT).expect("bundled layout is valid")
    }

    /// Parse `name,x,y` records. Blank lines, `#` comments and a leading
    /// `name,x,y` header are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut channels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if channels.is_empty() && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("name")) {
                continue;
            }
            if fields.len() != 3 {
                return Err(Error::Layout(format!(
                    "line {}: expected `name,x,y`, got `{line}`",
                    lineno + 1
                )));
            }
            let coord = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Layout(format!("line {}: bad coordinate `{s}`", lineno + 1)))
            };
            channels.push((fields[0].to_string(), [coord(fields[1])?, coord(fields[2])?]));
        }
        if channels.is_empty() {
            return Err(Error::Layout("layout file contains no channels".into()));
        }
        Self::new(channels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading layout {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,x,y\n");
        for e in &self.electrodes {
            out.push_str(&format!("{},{},{}\n", e.name, e.position[0], e.position[1]));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.electrodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.electrodes.is_empty()
    }

    pub fn electrodes(&self) -> &[Electrode] {
        &self.electrodes
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.electrodes.iter().map(|e| e.name.as_str())
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        self.electrodes[i].position
    }

    pub fn region_of(&self, i: usize) -> Region {
        self.electrodes[i].region
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.electrodes.iter().position(|e| e.name == name)
    }

    /// Channel indices belonging to `region`, in layout order.
    pub fn region_members(&self, region: Region) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.region_of(i) == region).collect()
    }

    /// Regions with at least one member, in enumeration order.
    pub fn regions(&self) -> Vec<Region> {
        Region::ALL
            .into_iter()
            .filter(|&r| self.electrodes.iter().any(|e| e.region == r))
            .collect()
    }

    /// Keep the first `n` channels.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::new(self.electrodes.iter().take(n).map(|e| (e.name.clone(), e.position)))
    }
}
