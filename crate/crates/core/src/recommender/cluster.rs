use std::collections::BTreeMap;

use kodama::{linkage, Method};

use super::{Linkage, RecommenderConfig};
use crate::domain::{MovieId, UserId};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Merge heights at or below this count as identical items.
const ZERO_HEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub cluster_of: BTreeMap<MovieId, usize>,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = &MovieId> {
        self.cluster_of
            .iter()
            .filter(move |(_, &c)| c == cluster)
            .map(|(m, _)| m)
    }

    /// The partition as sorted member lists, independent of label numbering.
    pub fn partition(&self) -> Vec<Vec<MovieId>> {
        let mut groups = vec![Vec::new(); self.n_clusters];
        for (m, &c) in &self.cluster_of {
            groups[c].push(m.clone());
        }
        groups.sort();
        groups
    }
}

/// Per movie, each user's mean rating. Sums are integer so the result does
/// not depend on rating order.
pub(crate) fn item_vectors(ds: &Dataset) -> BTreeMap<MovieId, BTreeMap<UserId, f64>> {
    let mut acc: BTreeMap<MovieId, BTreeMap<UserId, (u32, u32)>> = BTreeMap::new();
    for r in &ds.ratings {
        let e = acc
            .entry(r.movie_id.clone())
            .or_default()
            .entry(r.user_id.clone())
            .or_insert((0, 0));
        e.0 += u32::from(r.score.get());
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(m, users)| {
            let v = users
                .into_iter()
                .map(|(u, (s, n))| (u, f64::from(s) / f64::from(n)))
                .collect();
            (m, v)
        })
        .collect()
}

/// `1 − cosine` over co-rating users; 1 when nobody rated both.
pub(crate) fn cosine_distance(a: &BTreeMap<UserId, f64>, b: &BTreeMap<UserId, f64>) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (u, x) in a {
        if let Some(y) = b.get(u) {
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
    }
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
}

/// Agglomerative clustering of rated movies, cut into exactly
/// `cfg.n_clusters` groups. Cluster labels are numbered by each group's
/// smallest movie id.
pub fn cluster_items(ds: &Dataset, cfg: &RecommenderConfig) -> Result<ClusterAssignment> {
    let vectors = item_vectors(ds);
    let ids: Vec<&MovieId> = vectors.keys().collect();
    let n = ids.len();
    let k = cfg.n_clusters;
    if k == 0 || n < k {
        return Err(Error::NotEnoughItems {
            available: n,
            requested: k,
        });
    }
    if n == 1 {
        return Ok(ClusterAssignment {
            cluster_of: BTreeMap::from([(ids[0].clone(), 0)]),
            n_clusters: 1,
        });
    }

    let rows: Vec<&BTreeMap<UserId, f64>> = vectors.values().collect();
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n - 1 {
        for j in i + 1..n {
            condensed.push(cosine_distance(rows[i], rows[j]));
        }
    }
    let method = match cfg.linkage {
        Linkage::Average => Method::Average,
        Linkage::Complete => Method::Complete,
        Linkage::Single => Method::Single,
    };
    let dendrogram = linkage(&mut condensed, n, method);

    let zero_merges = dendrogram
        .steps()
        .iter()
        .filter(|s| s.dissimilarity <= ZERO_HEIGHT)
        .count();
    if n - zero_merges < k {
        return Err(Error::IndistinctItems {
            distinct: n - zero_merges,
            requested: k,
        });
    }

    // Replay the first n − k merges; kodama labels the cluster created by
    // step i as n + i.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for step in &dendrogram.steps()[..n - k] {
        let mut merged = std::mem::take(&mut members[step.cluster1]);
        merged.append(&mut std::mem::take(&mut members[step.cluster2]));
        members.push(merged);
    }
    let mut groups: Vec<Vec<usize>> = members.into_iter().filter(|g| !g.is_empty()).collect();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_unstable_by_key(|g| g[0]);
    debug_assert_eq!(groups.len(), k);

    let mut cluster_of = BTreeMap::new();
    for (label, g) in groups.iter().enumerate() {
        for &i in g {
            cluster_of.insert(ids[i].clone(), label);
        }
    }
    Ok(ClusterAssignment {
        cluster_of,
        n_clusters: k,
    })
}
