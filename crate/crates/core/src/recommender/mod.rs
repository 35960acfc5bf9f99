//! Context-aware recommendation by contextual pre-filtering.
//!
//! 1. cluster movies by their rating vectors ([`cluster_items`]);
//! 2. correlate every contextual condition with ratings inside each cluster
//!    ([`condition_profiles`]);
//! 3. represent a situation by the mean profile of its conditions and compare
//!    situations by cosine ([`situation_similarity`]);
//! 4. keep the ratings whose situation is close to the target
//!    ([`select_local_dataset`]);
//! 5. run item-based KNN collaborative filtering on that local subset
//!    ([`recommend`]).

mod cluster;
mod knn;
mod profile;

use serde::{Deserialize, Serialize};

use crate::domain::ContextualSituation;
use crate::error::{Error, Result};
use crate::ingest::Dataset;

pub use cluster::{cluster_items, ClusterAssignment};
pub use knn::{popularity_ranking, recommend, Recommendations};
pub use profile::{
    condition_profiles, select_by_similarity, select_local_dataset, situation_similarity, ConditionKey,
    ConditionProfile, ConditionProfiles, LocalDataset, Selection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Average,
    Complete,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommenderConfig {
    pub n_clusters: usize,
    pub linkage: Linkage,
    /// Minimum situation similarity for a rating to enter the local dataset.
    pub similarity_threshold: f64,
    pub neighborhood_k: usize,
    pub top_n: usize,
    /// Relax the threshold until the local dataset holds this many ratings.
    pub min_local_ratings: usize,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            n_clusters: 10,
            linkage: Linkage::Average,
            similarity_threshold: 0.5,
            neighborhood_k: 20,
            top_n: 6,
            min_local_ratings: 50,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::invalid("recommender config", "n_clusters must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::invalid(
                "recommender config",
                "similarity_threshold must lie in [-1, 1]",
            ));
        }
        if self.neighborhood_k == 0 || self.top_n == 0 {
            return Err(Error::invalid(
                "recommender config",
                "neighborhood_k and top_n must be positive",
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RecommenderConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<recommender config>".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Clusters and condition profiles built once per dataset.
#[derive(Debug, Clone)]
pub struct RecommenderModel {
    pub config: RecommenderConfig,
    pub clusters: ClusterAssignment,
    pub profiles: ConditionProfiles,
}

impl RecommenderModel {
    pub fn fit(ds: &Dataset, config: RecommenderConfig) -> Result<Self> {
        config.validate()?;
        let clusters = cluster_items(ds, &config)?;
        let profiles = condition_profiles(ds, &clusters);
        Ok(RecommenderModel {
            config,
            clusters,
            profiles,
        })
    }

    /// Local selection followed by KNN for one user.
    pub fn recommend_in_context(
        &self,
        ds: &Dataset,
        target: &ContextualSituation,
        user: &crate::domain::UserId,
        exclude: &std::collections::BTreeSet<crate::domain::MovieId>,
    ) -> Result<(LocalDataset, Recommendations)> {
        let local = select_local_dataset(ds, target, &self.profiles, &self.config);
        let recs = recommend(&local.dataset, user, exclude, &self.config)?;
        tracing::info!(
            requested_theta = local.selection.requested_theta,
            effective_theta = local.selection.effective_theta,
            full_fallback = local.selection.full_fallback,
            cold_start = recs.cold_start,
            local_ratings = local.dataset.n_ratings(),
            "recommendation"
        );
        Ok((local, recs))
    }
}
