//! Loading CoMoDa-style contextual rating files into a [`Dataset`].
//!
//! Ratings and catalog files are delimiter-separated text with a header row.
//! The delimiter is sniffed from the header (comma, semicolon or tab). Context
//! columns may hold condition names or 1-based codes into the factor's
//! vocabulary; `-1` marks an unknown condition and leaves the factor absent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{
    default_study_factors, ConditionId, ContextualFactor, ContextualRating, ContextualSituation, FactorId, Movie,
    MovieId, Score, UserId,
};
use crate::error::{Error, Result};

/// Sentinel for an unknown contextual condition.
pub const UNKNOWN_CONDITION: &str = "-1";

/// CoMoDa context columns beyond the four study factors. Kept verbatim.
const PASSTHROUGH_DEFAULTS: [&str; 8] = [
    "time",
    "daytype",
    "season",
    "social",
    "endEmo",
    "dominantEmo",
    "decision",
    "interaction",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub ratings: Vec<ContextualRating>,
    pub movies: BTreeMap<MovieId, Movie>,
    pub users: BTreeSet<UserId>,
    pub factors: Vec<ContextualFactor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_users: usize,
    pub n_movies: usize,
    pub n_ratings: usize,
    pub mean_ratings_per_user: f64,
    /// Distinct movies per user, averaged over users.
    pub mean_movies_per_user: f64,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} users / {} movies / {} ratings (mean {:.2} ratings, {:.2} distinct movies per user)",
            self.n_users, self.n_movies, self.n_ratings, self.mean_ratings_per_user, self.mean_movies_per_user
        )
    }
}

impl Dataset {
    pub fn new(factors: Vec<ContextualFactor>) -> Self {
        Dataset {
            ratings: Vec::new(),
            movies: BTreeMap::new(),
            users: BTreeSet::new(),
            factors,
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_movies(&self) -> usize {
        self.movies.len()
    }

    pub fn n_ratings(&self) -> usize {
        self.ratings.len()
    }

    pub fn add_movie(&mut self, movie: Movie) {
        self.movies.entry(movie.movie_id.clone()).or_insert(movie);
    }

    /// Adds a rating after checking it against the catalog and the schema.
    pub fn add_rating(&mut self, rating: ContextualRating) -> Result<()> {
        if !self.movies.contains_key(&rating.movie_id) {
            return Err(Error::UnknownMovie(rating.movie_id));
        }
        rating.situation.validate(&self.factors)?;
        self.users.insert(rating.user_id.clone());
        self.ratings.push(rating);
        Ok(())
    }

    pub fn factor(&self, id: &FactorId) -> Option<&ContextualFactor> {
        self.factors.iter().find(|f| &f.factor_id == id)
    }

    pub fn ratings_of_movie<'a>(&'a self, movie: &'a MovieId) -> impl Iterator<Item = &'a ContextualRating> + 'a {
        self.ratings.iter().filter(move |r| &r.movie_id == movie)
    }

    pub fn ratings_of_user<'a>(&'a self, user: &'a UserId) -> impl Iterator<Item = &'a ContextualRating> + 'a {
        self.ratings.iter().filter(move |r| &r.user_id == user)
    }

    /// Same catalog and schema, only the given ratings.
    pub fn with_ratings(&self, ratings: Vec<ContextualRating>) -> Dataset {
        let users = ratings.iter().map(|r| r.user_id.clone()).collect();
        Dataset {
            ratings,
            movies: self.movies.clone(),
            users,
            factors: self.factors.clone(),
        }
    }

    /// Distinct situations observed in the ratings, restricted to the study
    /// factors and keeping only those that assign all four.
    pub fn observed_study_situations(&self) -> Vec<ContextualSituation> {
        let set: BTreeSet<ContextualSituation> = self
            .ratings
            .iter()
            .map(|r| r.situation.study_only())
            .filter(ContextualSituation::has_all_study_factors)
            .collect();
        set.into_iter().collect()
    }

    pub fn stats(&self) -> DatasetStats {
        dataset_stats(self)
    }

    /// Canonical newline-delimited export: one schema record, then movies,
    /// then ratings in load order.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, rec: &ExportRecord| {
            out.push_str(&serde_json::to_string(rec).expect("export records serialize"));
            out.push('\n');
        };
        push(
            &mut out,
            &ExportRecord::Schema {
                factors: self.factors.clone(),
            },
        );
        for m in self.movies.values() {
            push(&mut out, &ExportRecord::Movie(m.clone()));
        }
        for r in &self.ratings {
            push(&mut out, &ExportRecord::Rating(r.clone()));
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Dataset> {
        let mut ds = Dataset::new(Vec::new());
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ExportRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: "<ndjson>".into(),
                reason: format!("line {}: {e}", i + 1),
            })?;
            match rec {
                ExportRecord::Schema { factors } => ds.factors = factors,
                ExportRecord::Movie(m) => ds.add_movie(m),
                ExportRecord::Rating(r) => ds.add_rating(r)?,
            }
        }
        Ok(ds)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ExportRecord {
    Schema { factors: Vec<ContextualFactor> },
    Movie(Movie),
    Rating(ContextualRating),
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let n_users = ds.n_users();
    let n_ratings = ds.n_ratings();
    let distinct_pairs: BTreeSet<(&UserId, &MovieId)> = ds.ratings.iter().map(|r| (&r.user_id, &r.movie_id)).collect();
    let per_user = |n: usize| if n_users == 0 { 0.0 } else { n as f64 / n_users as f64 };
    DatasetStats {
        n_users,
        n_movies: ds.n_movies(),
        n_ratings,
        mean_ratings_per_user: per_user(n_ratings),
        mean_movies_per_user: per_user(distinct_pairs.len()),
    }
}

/// Column names used to read the ratings and catalog files.
///
/// Single-valued attributes (`title`, `director`, `year`) take the first
/// listed column present in the header; list attributes (`actors`,
/// `genres`) collect every listed column, splitting cells on `|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub user: String,
    pub item: String,
    pub rating: String,
    pub timestamp: Option<String>,
    pub title: Vec<String>,
    pub director: Vec<String>,
    pub year: Vec<String>,
    pub actors: Vec<String>,
    pub genres: Vec<String>,
    /// Study factor name → column.
    pub factors: BTreeMap<String, String>,
    /// Other context columns stored as pass-through factors.
    pub passthrough: Vec<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        ColumnMapping {
            user: "userID".into(),
            item: "itemID".into(),
            rating: "rating".into(),
            timestamp: None,
            title: s(&["title"]),
            director: s(&["director"]),
            year: s(&["year", "movieYear"]),
            actors: s(&["actors", "actor1", "actor2", "actor3"]),
            genres: s(&["genres", "genre1", "genre2", "genre3"]),
            factors: [
                ("PhysicalWellness", "physical"),
                ("Mood", "mood"),
                ("Location", "location"),
                ("Weather", "weather"),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect(),
            passthrough: s(&PASSTHROUGH_DEFAULTS),
        }
    }
}

impl ColumnMapping {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: "<column mapping>".into(),
            reason: e.to_string(),
        })
    }
}

/// Parses a context schema document:
///
/// ```toml
/// [factors]
/// Weather = ["sunny", "rainy"]
/// Mood = ["positive", "negative"]
/// ```
pub fn parse_schema(text: &str) -> Result<Vec<ContextualFactor>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct SchemaDoc {
        factors: BTreeMap<String, Vec<String>>,
    }
    let doc: SchemaDoc = toml::from_str(text).map_err(|e| Error::Parse {
        path: "<schema>".into(),
        reason: e.to_string(),
    })?;
    let mut factors = doc
        .factors
        .into_iter()
        .map(|(name, vocab)| ContextualFactor::new(name.parse()?, vocab))
        .collect::<Result<Vec<_>>>()?;
    factors.sort_by(|a, b| a.factor_id.cmp(&b.factor_id));
    Ok(factors)
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub columns: ColumnMapping,
    pub max_rejected_fraction: f64,
    /// Files with fewer data rows than this only report diagnostics.
    pub min_rows_for_rejection_limit: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            columns: ColumnMapping::default(),
            max_rejected_fraction: 0.10,
            min_rows_for_rejection_limit: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    /// 1-based line number in the source file (header is line 1).
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub rejected: Vec<RowDiagnostic>,
}

pub fn load_dataset(ratings_path: &Path, catalog_path: Option<&Path>, schema_path: Option<&Path>) -> Result<Loaded> {
    load_dataset_with(ratings_path, catalog_path, schema_path, &IngestOptions::default())
}

pub fn load_dataset_with(
    ratings_path: &Path,
    catalog_path: Option<&Path>,
    schema_path: Option<&Path>,
    opts: &IngestOptions,
) -> Result<Loaded> {
    let ratings = read_text(ratings_path)?;
    let catalog = catalog_path.map(read_text).transpose()?;
    let factors = match schema_path {
        Some(p) => parse_schema(&read_text(p)?).map_err(|e| relabel(e, p))?,
        None => default_study_factors(),
    };
    parse_dataset(&ratings, catalog.as_deref(), factors, opts).map_err(|e| relabel(e, ratings_path))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { reason, .. } => Error::Parse {
            path: path.to_owned(),
            reason,
        },
        other => other,
    }
}

fn sniff_delimiter(header: &str) -> u8 {
    b",;\t"
        .iter()
        .max_by_key(|d| header.bytes().filter(|b| b == *d).count())
        .copied()
        .unwrap_or(b',')
}

struct Table {
    header: Vec<String>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn parse(text: &str) -> Result<Table> {
        let first = text.lines().next().unwrap_or("");
        if first.trim().is_empty() {
            return Err(Error::Parse {
                path: "<input>".into(),
                reason: "missing header row".into(),
            });
        }
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(sniff_delimiter(first))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Parse {
                path: "<input>".into(),
                reason: e.to_string(),
            })?
            .iter()
            .map(str::to_owned)
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse {
                path: "<input>".into(),
                reason: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.iter().all(str::is_empty) {
                continue;
            }
            rows.push((line, rec));
        }
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h.eq_ignore_ascii_case(name))
    }

    fn first_col(&self, names: &[String]) -> Option<usize> {
        names.iter().find_map(|n| self.col(n))
    }

    fn all_cols(&self, names: &[String]) -> Vec<usize> {
        names.iter().filter_map(|n| self.col(n)).collect()
    }
}

fn required_col(t: &Table, name: &str) -> Result<usize> {
    t.col(name).ok_or_else(|| Error::Parse {
        path: "<input>".into(),
        reason: format!("header has no `{name}` column (found: {})", t.header.join(", ")),
    })
}

fn cell(rec: &csv::StringRecord, i: usize) -> Option<&str> {
    rec.get(i).filter(|s| !s.is_empty() && *s != UNKNOWN_CONDITION)
}

fn split_cells(rec: &csv::StringRecord, cols: &[usize]) -> Vec<String> {
    cols.iter()
        .filter_map(|&i| cell(rec, i))
        .flat_map(|c| c.split('|'))
        .map(str::trim)
        .filter(|s| !s.is_empty() && *s != UNKNOWN_CONDITION)
        .map(str::to_owned)
        .collect()
}

struct MovieColumns {
    item: usize,
    title: Option<usize>,
    director: Option<usize>,
    year: Option<usize>,
    actors: Vec<usize>,
    genres: Vec<usize>,
}

impl MovieColumns {
    fn resolve(t: &Table, m: &ColumnMapping) -> Result<Self> {
        Ok(MovieColumns {
            item: required_col(t, &m.item)?,
            title: t.first_col(&m.title),
            director: t.first_col(&m.director),
            year: t.first_col(&m.year),
            actors: t.all_cols(&m.actors),
            genres: t.all_cols(&m.genres),
        })
    }

    fn movie(&self, rec: &csv::StringRecord) -> std::result::Result<Movie, String> {
        let id = cell(rec, self.item).ok_or("missing item id")?;
        let title = self.title.and_then(|i| cell(rec, i)).unwrap_or(id);
        let mut movie = Movie::new(id, title).map_err(|e| e.to_string())?;
        movie.director = self.director.and_then(|i| cell(rec, i)).unwrap_or_default().to_owned();
        movie.year = match self.year.and_then(|i| cell(rec, i)) {
            Some(y) => Some(y.parse().map_err(|_| format!("year `{y}` is not an integer"))?),
            None => None,
        };
        movie.actors = split_cells(rec, &self.actors);
        movie.genres = split_cells(rec, &self.genres);
        Ok(movie)
    }
}

/// Resolves a raw context cell against a factor's vocabulary: exact name
/// (case-insensitive), or a 1-based ordinal code.
fn resolve_condition(factor: &ContextualFactor, raw: &str) -> Option<ConditionId> {
    if let Some(c) = factor.vocabulary.iter().find(|c| c.as_str().eq_ignore_ascii_case(raw)) {
        return Some(c.clone());
    }
    let code: usize = raw.parse().ok()?;
    code.checked_sub(1).and_then(|i| factor.vocabulary.get(i)).cloned()
}

/// Parses ratings (and optionally a separate catalog) from text.
pub fn parse_dataset(
    ratings_text: &str,
    catalog_text: Option<&str>,
    factors: Vec<ContextualFactor>,
    opts: &IngestOptions,
) -> Result<Loaded> {
    let m = &opts.columns;
    let mut ds = Dataset::new(factors);
    let mut rejected = Vec::new();

    if let Some(text) = catalog_text {
        let t = Table::parse(text)?;
        let cols = MovieColumns::resolve(&t, m)?;
        for (line, rec) in &t.rows {
            match cols.movie(rec) {
                Ok(movie) => ds.add_movie(movie),
                Err(reason) => rejected.push(RowDiagnostic {
                    line: *line,
                    reason: format!("catalog: {reason}"),
                }),
            }
        }
    }

    let t = Table::parse(ratings_text)?;
    let user_col = required_col(&t, &m.user)?;
    let rating_col = required_col(&t, &m.rating)?;
    let movie_cols = MovieColumns::resolve(&t, m)?;
    let ts_col = m.timestamp.as_deref().and_then(|n| t.col(n));

    let mut factor_cols = Vec::new();
    for (name, col) in &m.factors {
        let id: FactorId = name.parse()?;
        match (t.col(col), ds.factor(&id)) {
            (Some(i), Some(f)) => factor_cols.push((i, f.clone())),
            (None, _) => tracing::warn!(factor = %id, column = %col, "context column not in header"),
            (Some(_), None) => tracing::warn!(factor = %id, "factor not in schema, column ignored"),
        }
    }
    let passthrough: Vec<(usize, FactorId)> = m
        .passthrough
        .iter()
        .filter_map(|n| t.col(n).map(|i| (i, FactorId::Other(n.clone()))))
        .collect();

    let total = t.rows.len();
    for (line, rec) in &t.rows {
        let parsed = (|| -> std::result::Result<(ContextualRating, Option<Movie>), String> {
            if rec.len() != t.header.len() {
                return Err(format!("expected {} fields, found {}", t.header.len(), rec.len()));
            }
            let user = cell(rec, user_col).ok_or("missing user id")?;
            let raw = rec.get(rating_col).unwrap_or("");
            let value: i64 = raw.parse().map_err(|_| format!("rating `{raw}` is not an integer"))?;
            let score = Score::new(value).map_err(|e| e.to_string())?;
            let mut situation = ContextualSituation::new();
            for (i, factor) in &factor_cols {
                if let Some(raw) = cell(rec, *i) {
                    let c = resolve_condition(factor, raw)
                        .ok_or_else(|| format!("`{raw}` is not a condition of {}", factor.factor_id))?;
                    situation.assignments.insert(factor.factor_id.clone(), c);
                }
            }
            for (i, id) in &passthrough {
                if let Some(raw) = cell(rec, *i) {
                    situation.assignments.insert(id.clone(), ConditionId::new(raw));
                }
            }
            let timestamp = match ts_col.and_then(|i| cell(rec, i)) {
                Some(v) => Some(v.parse().map_err(|_| format!("timestamp `{v}` is not an integer"))?),
                None => None,
            };
            let movie = if catalog_text.is_none() {
                Some(movie_cols.movie(rec)?)
            } else {
                None
            };
            let movie_id = MovieId::new(cell(rec, movie_cols.item).ok_or("missing item id")?);
            Ok((
                ContextualRating {
                    user_id: UserId::new(user),
                    movie_id,
                    score,
                    situation,
                    timestamp,
                },
                movie,
            ))
        })();
        let outcome = parsed.and_then(|(rating, movie)| {
            if let Some(movie) = movie {
                ds.add_movie(movie);
            }
            ds.add_rating(rating).map_err(|e| e.to_string())
        });
        if let Err(reason) = outcome {
            rejected.push(RowDiagnostic { line: *line, reason });
        }
    }

    let rating_rejections = rejected.iter().filter(|d| !d.reason.starts_with("catalog")).count();
    if total >= opts.min_rows_for_rejection_limit
        && rating_rejections as f64 > opts.max_rejected_fraction * total as f64
    {
        let sample = rejected
            .iter()
            .take(3)
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::TooManyRejected {
            rejected: rating_rejections,
            total,
            sample,
        });
    }
    for d in &rejected {
        tracing::warn!(line = d.line, reason = %d.reason, "row rejected");
    }
    Ok(Loaded { dataset: ds, rejected })
}
