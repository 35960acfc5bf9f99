use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::cluster::item_vectors;
use super::RecommenderConfig;
use crate::domain::{MovieId, UserId};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::stats::pearson;

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendations {
    /// Best first, predicted scores within [1, 5].
    pub items: Vec<(MovieId, f64)>,
    /// The user had no local ratings; items are ranked by local mean.
    pub cold_start: bool,
}

impl Recommendations {
    pub fn movie_ids(&self) -> impl Iterator<Item = &MovieId> {
        self.items.iter().map(|(m, _)| m)
    }
}

struct ItemStats {
    mean: f64,
    count: usize,
}

fn item_stats(ds: &Dataset) -> BTreeMap<MovieId, ItemStats> {
    let mut acc: BTreeMap<MovieId, (u64, usize)> = BTreeMap::new();
    for r in &ds.ratings {
        let e = acc.entry(r.movie_id.clone()).or_insert((0, 0));
        e.0 += u64::from(r.score.get());
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(m, (s, n))| {
            (
                m,
                ItemStats {
                    mean: s as f64 / n as f64,
                    count: n,
                },
            )
        })
        .collect()
}

/// Item–item PCC over users who rated both; needs two co-raters.
fn item_similarity(a: &BTreeMap<UserId, f64>, b: &BTreeMap<UserId, f64>) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = a.iter().filter_map(|(u, &ra)| b.get(u).map(|&rb| (ra, rb))).unzip();
    if x.len() < 2 {
        return None;
    }
    pearson(&x, &y).ok().flatten()
}

fn rank(items: &mut [(MovieId, f64, usize)]) {
    items.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(b.2.cmp(&a.2))
            .then(a.0.cmp(&b.0))
    });
}

/// Item-based KNN collaborative filtering on a (local) dataset.
///
/// For each candidate the `neighborhood_k` most similar items the user has
/// rated (positive similarity only) give the prediction
/// `mean_i + Σ s_ij (r_uj − mean_j) / Σ s_ij`, clamped to [1, 5]. Users with
/// no ratings here get items ranked by mean rating, then rating count, then
/// id.
pub fn recommend(
    local: &Dataset,
    user: &UserId,
    exclude: &BTreeSet<MovieId>,
    cfg: &RecommenderConfig,
) -> Result<Recommendations> {
    let vectors = item_vectors(local);
    let stats = item_stats(local);
    let rated: BTreeMap<&MovieId, f64> = vectors
        .iter()
        .filter_map(|(m, users)| users.get(user).map(|&r| (m, r)))
        .collect();
    let candidates: Vec<&MovieId> = vectors
        .keys()
        .filter(|m| !exclude.contains(*m) && !rated.contains_key(m))
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }

    let cold_start = rated.is_empty();
    let mut scored: Vec<(MovieId, f64, usize)> = candidates
        .into_iter()
        .map(|m| {
            let st = &stats[m];
            if cold_start {
                return (m.clone(), st.mean, st.count);
            }
            let mut neighbours: Vec<(f64, &MovieId)> = rated
                .keys()
                .filter_map(|j| {
                    item_similarity(&vectors[m], &vectors[*j])
                        .filter(|s| *s > 0.0)
                        .map(|s| (s, *j))
                })
                .collect();
            neighbours.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(b.1)));
            neighbours.truncate(cfg.neighborhood_k);
            let (num, den) = neighbours.iter().fold((0.0, 0.0), |(n, d), (s, j)| {
                (n + s * (rated[j] - stats[*j].mean), d + s)
            });
            let pred = if den > 0.0 { st.mean + num / den } else { st.mean };
            (m.clone(), pred.clamp(1.0, 5.0), st.count)
        })
        .collect();
    rank(&mut scored);
    scored.truncate(cfg.top_n);
    Ok(Recommendations {
        items: scored.into_iter().map(|(m, p, _)| (m, p)).collect(),
        cold_start,
    })
}

/// Movies ranked by mean rating, rating count and id; used to pad short
/// recommendation lists.
pub fn popularity_ranking(ds: &Dataset, exclude: &BTreeSet<MovieId>) -> Vec<MovieId> {
    let mut items: Vec<(MovieId, f64, usize)> = item_stats(ds)
        .into_iter()
        .filter(|(m, _)| !exclude.contains(m))
        .map(|(m, s)| (m, s.mean, s.count))
        .collect();
    rank(&mut items);
    items.into_iter().map(|(m, _, _)| m).collect()
}
