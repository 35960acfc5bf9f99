//! Assembling a [`StudyContext`] from files, shared by the binaries.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::{load_dataset, Dataset};
use crate::protocol::StudyContext;
use crate::recommender::{RecommenderConfig, RecommenderModel};
use crate::synthetic::{generate, SyntheticConfig};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read(path)?).map_err(|e| Error::Parse {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

/// Where the study dataset and recommender settings come from. Without a
/// ratings file a synthetic dataset is generated.
#[derive(Debug, Clone, Default)]
pub struct StudySetup {
    pub ratings: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
    pub recommender: Option<PathBuf>,
}

impl StudySetup {
    pub fn dataset(&self) -> Result<Dataset> {
        match &self.ratings {
            Some(r) => {
                let loaded = load_dataset(r, self.catalog.as_deref(), self.schema.as_deref())?;
                for d in &loaded.rejected {
                    tracing::warn!(%d, "rejected row");
                }
                Ok(loaded.dataset)
            }
            None => {
                let cfg: SyntheticConfig = match &self.synthetic {
                    Some(p) => parse_toml(p)?,
                    None => SyntheticConfig::default(),
                };
                generate(&cfg)
            }
        }
    }

    pub fn recommender_config(&self) -> Result<RecommenderConfig> {
        match &self.recommender {
            Some(p) => RecommenderConfig::from_toml(&read(p)?),
            None => Ok(RecommenderConfig::default()),
        }
    }

    pub fn build(&self) -> Result<StudyContext> {
        let ds = self.dataset()?;
        let model = RecommenderModel::fit(&ds, self.recommender_config()?)?;
        tracing::info!(stats = %ds.stats(), clusters = model.clusters.n_clusters, "study context ready");
        Ok(StudyContext::new(ds, model))
    }
}
