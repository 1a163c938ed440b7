use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mlp, ModelConfig, ModelKind, Network, Stgcn};
use crate::error::{Error, Result};
use crate::nn::ParamSet;

pub const CHECKPOINT_FORMAT: &str = "stressgraph-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned JSON snapshot of a trained network: named tensors with shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model: ModelConfig,
    pub channels: usize,
    pub samples: usize,
    pub params: ParamSet,
}

impl Checkpoint {
    pub fn new(network: &Network, channels: usize, samples: usize) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model: *network.config(),
            channels,
            samples,
            params: network.params().clone(),
        }
    }

    pub fn into_network(self) -> Result<Network> {
        Ok(match self.model.kind {
            ModelKind::Stgcn => Network::Stgcn(Stgcn::from_params(self.model, self.params)?),
            ModelKind::Mlp => Network::Mlp(Mlp::from_params(self.model, self.channels, self.samples, self.params)?),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!("unsupported checkpoint {} v{}", ckpt.format, ckpt.version),
            });
        }
        Ok(ckpt)
    }
}
