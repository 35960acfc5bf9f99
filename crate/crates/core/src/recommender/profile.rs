use std::collections::BTreeMap;

use super::{ClusterAssignment, RecommenderConfig};
use crate::domain::{ConditionId, ContextualRating, ContextualSituation, FactorId};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::stats::pearson;

pub type ConditionKey = (FactorId, ConditionId);

/// PCC between one condition's presence and the rating, per item cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionProfile {
    pub pcc_by_cluster: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionProfiles {
    pub n_clusters: usize,
    pub by_condition: BTreeMap<ConditionKey, ConditionProfile>,
}

impl ConditionProfiles {
    pub fn get(&self, factor: &FactorId, condition: &ConditionId) -> Option<&ConditionProfile> {
        self.by_condition.get(&(factor.clone(), condition.clone()))
    }

    /// Mean of the profile vectors of the situation's profiled conditions,
    /// absent entries counted as zero. `None` when no condition is profiled.
    pub fn representation(&self, situation: &ContextualSituation) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.n_clusters];
        let mut count = 0usize;
        for (f, c) in situation.iter() {
            if let Some(p) = self.get(f, c) {
                for (a, v) in acc.iter_mut().zip(&p.pcc_by_cluster) {
                    *a += v.unwrap_or(0.0);
                }
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        for a in &mut acc {
            *a /= count as f64;
        }
        Some(acc)
    }
}

/// Profiles for every condition of every schema factor.
pub fn condition_profiles(ds: &Dataset, ca: &ClusterAssignment) -> ConditionProfiles {
    let mut by_cluster: Vec<Vec<&ContextualRating>> = vec![Vec::new(); ca.n_clusters];
    for r in &ds.ratings {
        if let Some(&c) = ca.cluster_of.get(&r.movie_id) {
            by_cluster[c].push(r);
        }
    }
    let mut by_condition = BTreeMap::new();
    for factor in &ds.factors {
        for condition in &factor.vocabulary {
            let pcc_by_cluster = by_cluster
                .iter()
                .map(|ratings| {
                    if ratings.len() < 2 {
                        return None;
                    }
                    let (indicator, scores): (Vec<f64>, Vec<f64>) = ratings
                        .iter()
                        .map(|r| {
                            let hit = r.situation.get(&factor.factor_id) == Some(condition);
                            (if hit { 1.0 } else { 0.0 }, r.score.as_f64())
                        })
                        .unzip();
                    pearson(&indicator, &scores).ok().flatten()
                })
                .collect();
            by_condition.insert(
                (factor.factor_id.clone(), condition.clone()),
                ConditionProfile { pcc_by_cluster },
            );
        }
    }
    ConditionProfiles {
        n_clusters: ca.n_clusters,
        by_condition,
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity of the two situations' representations; 0 when either
/// representation is the zero vector.
pub fn situation_similarity(
    a: &ContextualSituation,
    b: &ContextualSituation,
    profiles: &ConditionProfiles,
) -> Result<f64> {
    let ra = profiles.representation(a).ok_or(Error::NoProfiledConditions)?;
    let rb = profiles.representation(b).ok_or(Error::NoProfiledConditions)?;
    Ok(cosine(&ra, &rb))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Indices of the selected items.
    pub indices: Vec<usize>,
    pub requested_theta: f64,
    pub effective_theta: f64,
    /// The threshold reached −1 and everything was taken.
    pub full_fallback: bool,
}

impl Selection {
    pub fn relaxed(&self) -> bool {
        self.effective_theta < self.requested_theta
    }
}

/// Threshold selection with relaxation in steps of 0.1 until `floor` items
/// are kept. Items without a similarity only enter through the full fallback.
pub fn select_by_similarity(similarities: &[Option<f64>], theta: f64, floor: usize) -> Selection {
    let pick = |t: f64| -> Vec<usize> {
        similarities
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some_and(|s| s >= t))
            .map(|(i, _)| i)
            .collect()
    };
    let all = || (0..similarities.len()).collect::<Vec<_>>();
    let mut step = 0u32;
    loop {
        let t = theta - 0.1 * f64::from(step);
        if t <= -1.0 + 1e-12 {
            return Selection {
                indices: all(),
                requested_theta: theta,
                effective_theta: -1.0,
                full_fallback: true,
            };
        }
        let indices = pick(t);
        if indices.len() >= floor {
            return Selection {
                indices,
                requested_theta: theta,
                effective_theta: t,
                full_fallback: false,
            };
        }
        step += 1;
    }
}

#[derive(Debug, Clone)]
pub struct LocalDataset {
    pub dataset: Dataset,
    pub selection: Selection,
}

/// Ratings whose situation is similar enough to the target.
pub fn select_local_dataset(
    ds: &Dataset,
    target: &ContextualSituation,
    profiles: &ConditionProfiles,
    cfg: &RecommenderConfig,
) -> LocalDataset {
    let target_repr = profiles.representation(target);
    let similarities: Vec<Option<f64>> = ds
        .ratings
        .iter()
        .map(|r| {
            let t = target_repr.as_ref()?;
            let rr = profiles.representation(&r.situation)?;
            Some(cosine(t, &rr))
        })
        .collect();
    let selection = select_by_similarity(&similarities, cfg.similarity_threshold, cfg.min_local_ratings);
    let ratings = selection.indices.iter().map(|&i| ds.ratings[i].clone()).collect();
    LocalDataset {
        dataset: ds.with_ratings(ratings),
        selection,
    }
}
