//! Textual explanations in the six styles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::domain::{ContextualSituation, ExplanationStyle, FactorId, Movie, MovieId, UserId};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::stats::pearson;

const CONTEXT_PREFIX: &str = "The system suppose that you would like to watch this movie when";
const SIMI_TEXT: &str = "This movie is similar to movies you watched before";
const DEFAULT_PHRASES: &str = include_str!("../resources/phrases.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub style: ExplanationStyle,
    pub text: String,
    /// Named statistics the text was rendered from.
    pub evidence: BTreeMap<String, Value>,
}

impl Explanation {
    fn new(style: ExplanationStyle, text: String) -> Self {
        Explanation {
            style,
            text,
            evidence: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.evidence.insert(key.to_owned(), value);
        self
    }
}

/// Half-up rounding of `sum / n` to tenths, in integers so 3.75 → 3.8 exactly.
fn mean_tenths(sum: u64, n: u64) -> u64 {
    (20 * sum + n) / (2 * n)
}

fn percent(hits: u64, n: u64) -> u64 {
    (200 * hits + n) / (2 * n)
}

fn one_decimal(tenths: u64) -> (String, f64) {
    (format!("{}.{}", tenths / 10, tenths % 10), tenths as f64 / 10.0)
}

fn movie_scores(ds: &Dataset, movie: &MovieId) -> Result<Vec<u8>> {
    let scores: Vec<u8> = ds.ratings_of_movie(movie).map(|r| r.score.get()).collect();
    if scores.is_empty() {
        return Err(Error::NoRatings(movie.clone()));
    }
    Ok(scores)
}

pub fn explain_avg(ds: &Dataset, movie: &MovieId) -> Result<Explanation> {
    let scores = movie_scores(ds, movie)?;
    let sum: u64 = scores.iter().map(|&s| u64::from(s)).sum();
    let (text, value) = one_decimal(mean_tenths(sum, scores.len() as u64));
    Ok(Explanation::new(
        ExplanationStyle::Avg,
        format!("The average rating of this movie is {text}"),
    )
    .with("avg_rating", json!(value))
    .with("n_ratings", json!(scores.len())))
}

/// Share of ratings at or above `threshold`. The sentence keeps the wording
/// "more than", matching how the statistic was presented to participants.
pub fn explain_per(ds: &Dataset, movie: &MovieId, threshold: u8) -> Result<Explanation> {
    let scores = movie_scores(ds, movie)?;
    let hits = scores.iter().filter(|&&s| s >= threshold).count() as u64;
    let pct = percent(hits, scores.len() as u64);
    Ok(Explanation::new(
        ExplanationStyle::Per,
        format!("{pct} percent of users rate this movie more than {threshold}"),
    )
    .with("pct_above", json!(pct))
    .with("threshold", json!(threshold))
    .with("n_ratings", json!(scores.len())))
}

/// Users most correlated with `user` (PCC over at least two co-rated items,
/// positive only), best first.
pub fn similar_users(ds: &Dataset, user: &UserId, k: usize) -> Vec<(UserId, f64)> {
    let mut by_user: BTreeMap<&UserId, BTreeMap<&MovieId, (u32, u32)>> = BTreeMap::new();
    for r in &ds.ratings {
        let e = by_user
            .entry(&r.user_id)
            .or_default()
            .entry(&r.movie_id)
            .or_insert((0, 0));
        e.0 += u32::from(r.score.get());
        e.1 += 1;
    }
    let Some(mine) = by_user.get(user) else {
        return Vec::new();
    };
    let mut sims: Vec<(UserId, f64)> = by_user
        .iter()
        .filter(|(u, _)| **u != user)
        .filter_map(|(u, theirs)| {
            let (x, y): (Vec<f64>, Vec<f64>) = mine
                .iter()
                .filter_map(|(m, a)| {
                    theirs
                        .get(m)
                        .map(|b| (f64::from(a.0) / f64::from(a.1), f64::from(b.0) / f64::from(b.1)))
                })
                .unzip();
            if x.len() < 2 {
                return None;
            }
            let s = pearson(&x, &y).ok().flatten()?;
            (s > 0.0).then(|| ((*u).clone(), s))
        })
        .collect();
    sims.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    sims.truncate(k);
    sims
}

/// Mean rating of `movie` among the given neighbours.
pub fn explain_simu_with(ds: &Dataset, movie: &MovieId, neighbours: &[(UserId, f64)]) -> Result<Explanation> {
    let set: BTreeSet<&UserId> = neighbours.iter().map(|(u, _)| u).collect();
    let mut per_user: BTreeMap<&UserId, (u64, u64)> = BTreeMap::new();
    for r in ds.ratings_of_movie(movie).filter(|r| set.contains(&r.user_id)) {
        let e = per_user.entry(&r.user_id).or_insert((0, 0));
        e.0 += u64::from(r.score.get());
        e.1 += 1;
    }
    if per_user.is_empty() {
        return Err(Error::NoNeighborRatings(movie.clone()));
    }
    // one vote per neighbour; a neighbour's repeated ratings are averaged
    // and the mean of means is rounded from the exact fraction
    let (num, den) = per_user
        .values()
        .fold((0u64, 1u64), |(n, d), &(s, c)| (n * c + s * d, d * c));
    let users = per_user.len() as u64;
    let (text, value) = one_decimal(mean_tenths(num, den * users));
    Ok(Explanation::new(
        ExplanationStyle::Simu,
        format!("The average rating of users whose preferences are similar to yours is {text}"),
    )
    .with("simu_avg", json!(value))
    .with("n_neighbours", json!(per_user.len())))
}

pub fn explain_simu(ds: &Dataset, movie: &MovieId, user: &UserId, k: usize) -> Result<Explanation> {
    explain_simu_with(ds, movie, &similar_users(ds, user, k))
}

fn jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

pub fn explain_simi(history: &[Movie], movie: &Movie) -> Result<Explanation> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut ranked: Vec<(f64, usize)> = history
        .iter()
        .enumerate()
        .map(|(i, h)| (jaccard(&h.genres, &movie.genres), i))
        .collect();
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let similar: Vec<Value> = ranked
        .iter()
        .take(3)
        .map(|&(score, i)| json!({ "movie_id": history[i].movie_id, "genre_overlap": score }))
        .collect();
    Ok(Explanation::new(ExplanationStyle::Simi, SIMI_TEXT.to_owned()).with("similar_movies", Value::Array(similar)))
}

fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn explain_content(movie: &Movie) -> Result<Explanation> {
    let director = movie.director.trim();
    let actors: Vec<String> = movie
        .actors
        .iter()
        .map(|a| a.trim())
        .filter(|a| !a.is_empty())
        .take(2)
        .map(str::to_owned)
        .collect();
    let text = match (director.is_empty(), actors.is_empty()) {
        (true, true) => return Err(Error::NoContentAttributes(movie.movie_id.clone())),
        (false, true) => format!("This is a movie directed by {director}"),
        (true, false) => format!("This is a movie acted by {}", join_names(&actors)),
        (false, false) => format!(
            "This is a movie directed by {director} and acted by {}",
            join_names(&actors)
        ),
    };
    Ok(Explanation::new(ExplanationStyle::Content, text)
        .with("director", json!(director))
        .with("actors", json!(actors)))
}

/// (factor, condition) → phrase for context-aware explanations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseTable {
    phrases: BTreeMap<FactorId, BTreeMap<String, String>>,
}

impl PhraseTable {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, BTreeMap<String, String>> = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<phrase table>".into(),
            reason: e.to_string(),
        })?;
        let phrases = raw
            .into_iter()
            .map(|(f, m)| Ok((f.parse()?, m)))
            .collect::<Result<_>>()?;
        Ok(PhraseTable { phrases })
    }

    /// Phrase for a condition; unmapped conditions render as their id.
    pub fn phrase(&self, factor: &FactorId, condition: &str) -> String {
        self.phrases
            .get(factor)
            .and_then(|m| m.get(condition))
            .cloned()
            .unwrap_or_else(|| condition.replace('_', " "))
    }
}

impl Default for PhraseTable {
    fn default() -> Self {
        PhraseTable::from_toml(DEFAULT_PHRASES).expect("bundled phrase table parses")
    }
}

pub fn explain_context_aware(situation: &ContextualSituation, phrases: &PhraseTable) -> Result<Explanation> {
    situation.require_study_factors()?;
    let p = |f: FactorId| {
        let c = situation.get(&f).expect("checked above");
        phrases.phrase(&f, c.as_str())
    };
    let text = format!(
        "{CONTEXT_PREFIX} {}, {} {} and {}",
        p(FactorId::Weather),
        p(FactorId::PhysicalWellness),
        p(FactorId::Location),
        p(FactorId::Mood)
    );
    Ok(Explanation::new(ExplanationStyle::ContextAware, text).with(
        "situation",
        serde_json::to_value(situation.study_only()).expect("situation serializes"),
    ))
}

/// Inputs needed to render any style for one (user, movie) pair.
pub struct ExplainContext<'a> {
    pub dataset: &'a Dataset,
    pub user: &'a UserId,
    pub history: &'a [Movie],
    pub situation: &'a ContextualSituation,
    pub phrases: &'a PhraseTable,
    /// Precomputed neighbours for Simu.
    pub neighbours: &'a [(UserId, f64)],
    pub per_threshold: u8,
}

pub fn explain(style: ExplanationStyle, movie: &Movie, ctx: &ExplainContext<'_>) -> Result<Explanation> {
    let id = &movie.movie_id;
    match style {
        ExplanationStyle::Avg => explain_avg(ctx.dataset, id),
        ExplanationStyle::Per => explain_per(ctx.dataset, id, ctx.per_threshold),
        ExplanationStyle::Simu => explain_simu_with(ctx.dataset, id, ctx.neighbours),
        ExplanationStyle::Simi => explain_simi(ctx.history, movie),
        ExplanationStyle::Content => explain_content(movie),
        ExplanationStyle::ContextAware => explain_context_aware(ctx.situation, ctx.phrases),
    }
}

/// Renders `style`, or the average-rating sentence under `style` with a
/// `fallback_from` diagnostic when the style cannot be rendered.
pub fn explain_or_fallback(style: ExplanationStyle, movie: &Movie, ctx: &ExplainContext<'_>) -> Result<Explanation> {
    match explain(style, movie, ctx) {
        Ok(e) => Ok(e),
        Err(err) => {
            tracing::warn!(%style, movie = %movie.movie_id, error = %err, "explanation fell back to average rating");
            let mut e = explain_avg(ctx.dataset, &movie.movie_id)?;
            e.style = style;
            e.evidence.insert("fallback_from".into(), json!(err.to_string()));
            Ok(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{default_study_factors, ContextualRating, Score};

    fn ds_with(movie: &str, scores: &[i64]) -> Dataset {
        let mut ds = Dataset::new(default_study_factors());
        ds.add_movie(Movie::new(movie, "T").unwrap());
        for (i, &s) in scores.iter().enumerate() {
            ds.add_rating(ContextualRating {
                user_id: UserId::new(format!("u{i}")),
                movie_id: MovieId::new(movie),
                score: Score::new(s).unwrap(),
                situation: ContextualSituation::new(),
                timestamp: None,
            })
            .unwrap();
        }
        ds
    }

    fn avg(scores: &[i64]) -> Explanation {
        explain_avg(&ds_with("m", scores), &MovieId::new("m")).unwrap()
    }

    #[test]
    fn avg_rounds_half_up() {
        let e = avg(&[4, 4, 4]);
        assert_eq!(e.text, "The average rating of this movie is 4.0");
        assert_eq!(e.evidence["avg_rating"], json!(4.0));
        assert_eq!(avg(&[3, 4, 4, 4]).text, "The average rating of this movie is 3.8");
        assert_eq!(avg(&[5]).text, "The average rating of this movie is 5.0");
        // 3.85 is not representable in binary; integer rounding still goes up
        assert!(avg(&[3, 4, 4, 4, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 3])
            .text
            .ends_with("3.9"));
        assert!(matches!(
            explain_avg(&ds_with("m", &[]), &MovieId::new("m")),
            Err(Error::NoRatings(_))
        ));
    }

    #[test]
    fn per_counts_at_or_above_threshold() {
        let per = |s: &[i64]| explain_per(&ds_with("m", s), &MovieId::new("m"), 4).unwrap().text;
        assert_eq!(per(&[4, 5, 4, 5, 3]), "80 percent of users rate this movie more than 4");
        assert_eq!(per(&[1, 2]), "0 percent of users rate this movie more than 4");
        assert_eq!(per(&[5]), "100 percent of users rate this movie more than 4");
        assert!(explain_per(&ds_with("m", &[]), &MovieId::new("m"), 4).is_err());
    }

    #[test]
    fn simu_mean_over_neighbours() {
        let ds = ds_with("m", &[4, 4, 5, 4, 4, 4, 4, 4, 4, 4]);
        let all: Vec<(UserId, f64)> = (0..10).map(|i| (UserId::new(format!("u{i}")), 1.0)).collect();
        let e = explain_simu_with(&ds, &MovieId::new("m"), &all).unwrap();
        assert_eq!(
            e.text,
            "The average rating of users whose preferences are similar to yours is 4.1"
        );
        let e = explain_simu_with(&ds, &MovieId::new("m"), &all[..2]).unwrap();
        assert!(e.text.ends_with("4.0"));
        assert!(matches!(
            explain_simu_with(&ds, &MovieId::new("m"), &[]),
            Err(Error::NoNeighborRatings(_))
        ));
    }

    fn movie(id: &str, genres: &[&str]) -> Movie {
        let mut m = Movie::new(id, id).unwrap();
        m.genres = genres.iter().map(|g| g.to_string()).collect();
        m
    }

    #[test]
    fn simi_orders_history_by_genre_overlap() {
        let history = vec![movie("a", &["A"]), movie("ab", &["A", "B"]), movie("c", &["C"])];
        let e = explain_simi(&history, &movie("t", &["A", "B"])).unwrap();
        assert_eq!(e.text, "This movie is similar to movies you watched before");
        let order: Vec<&str> = e.evidence["similar_movies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["movie_id"].as_str().unwrap())
            .collect();
        assert_eq!(order, ["ab", "a", "c"]);
        assert!(matches!(explain_simi(&[], &movie("t", &[])), Err(Error::EmptyHistory)));
    }

    #[test]
    fn content_sentences() {
        let mut m = Movie::new("m", "M").unwrap();
        assert!(explain_content(&m).is_err());
        m.director = "X".into();
        assert_eq!(explain_content(&m).unwrap().text, "This is a movie directed by X");
        m.actors = vec!["Y".into(), "Z".into(), "W".into()];
        let t = explain_content(&m).unwrap().text;
        assert_eq!(t, "This is a movie directed by X and acted by Y and Z");
        assert!(!t.contains('W'));
        m.director.clear();
        m.actors = vec!["Y".into()];
        assert_eq!(explain_content(&m).unwrap().text, "This is a movie acted by Y");
    }

    fn situation(w: &str, p: &str, l: &str, m: &str) -> ContextualSituation {
        ContextualSituation::new()
            .with(FactorId::Weather, w)
            .with(FactorId::PhysicalWellness, p)
            .with(FactorId::Location, l)
            .with(FactorId::Mood, m)
    }

    #[test]
    fn context_sentences() {
        let t = PhraseTable::default();
        let e = explain_context_aware(&situation("sunny", "healthy", "home", "positive"), &t).unwrap();
        assert_eq!(
            e.text,
            "The system suppose that you would like to watch this movie when it shines, healthy you are at home and in good moods"
        );
        let e = explain_context_aware(&situation("rainy", "ill", "public", "negative"), &t).unwrap();
        assert_eq!(
            e.text,
            "The system suppose that you would like to watch this movie when it rains, ill you are in a public place and in bad moods"
        );
        let partial = ContextualSituation::new()
            .with(FactorId::Weather, "sunny")
            .with(FactorId::PhysicalWellness, "healthy")
            .with(FactorId::Location, "home");
        assert!(matches!(
            explain_context_aware(&partial, &t),
            Err(Error::MissingFactor(FactorId::Mood))
        ));
    }

    #[test]
    fn custom_phrase_table() {
        let t = PhraseTable::from_toml("[Weather]\nsunny = \"the sun is out\"\n").unwrap();
        let e = explain_context_aware(&situation("sunny", "healthy", "friends_house", "neutral"), &t).unwrap();
        assert!(e
            .text
            .ends_with("when the sun is out, healthy friends house and neutral"));
    }

    #[test]
    fn numbers_in_text_are_in_evidence() {
        let ds = ds_with("m", &[3, 4, 5]);
        for e in [
            explain_avg(&ds, &MovieId::new("m")).unwrap(),
            explain_per(&ds, &MovieId::new("m"), 4).unwrap(),
        ] {
            let numbers: Vec<f64> = e.text.split_whitespace().filter_map(|w| w.parse().ok()).collect();
            assert!(!numbers.is_empty());
            for n in numbers {
                assert!(
                    e.evidence.values().any(|v| v.as_f64() == Some(n)),
                    "{n} missing from evidence of {:?}",
                    e
                );
            }
            assert!(!e.text.contains('<'));
        }
    }
}
