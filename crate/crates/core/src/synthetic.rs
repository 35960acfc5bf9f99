//! Seeded synthetic catalogs and contextual ratings with planted structure.
//!
//! Movies fall into `n_blocks` blocks. Each user likes some blocks and
//! dislikes others, and each block rates higher under one weather condition,
//! so both the item clustering and the contextual profiles have something to
//! find.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{default_study_factors, ContextualRating, ContextualSituation, FactorId, Movie, Score, UserId};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

const GENRES: [&str; 8] = [
    "Drama",
    "Comedy",
    "Action",
    "Thriller",
    "Romance",
    "Animation",
    "Documentary",
    "Horror",
];
const DIRECTORS: [&str; 10] = [
    "Ana Novak",
    "Boris Kralj",
    "Cara Moss",
    "Dev Patel",
    "Eli Stone",
    "Fay Lund",
    "Gus Horvat",
    "Hana Ito",
    "Ivo Zupan",
    "Jun Park",
];
const ACTORS: [&str; 16] = [
    "Ada Ray",
    "Ben Kos",
    "Cleo Vidmar",
    "Dan Hill",
    "Eva Lis",
    "Filip Rus",
    "Gia Bell",
    "Hugo Lenz",
    "Iris Mali",
    "Jon Berk",
    "Kaja Smrk",
    "Leo Fann",
    "Mia Dorn",
    "Nik Oven",
    "Ola Pirc",
    "Pia Zorn",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_movies: usize,
    pub ratings_per_user: usize,
    pub n_blocks: usize,
    /// Rating shift for a block's favoured weather.
    pub context_effect: f64,
    /// Standard deviation of the per-rating noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_users: 40,
            n_movies: 50,
            ratings_per_user: 20,
            n_blocks: 5,
            context_effect: 1.0,
            noise: 0.5,
            seed: 7,
        }
    }
}

/// Block of movie `i` under the planted structure.
pub fn block_of(cfg: &SyntheticConfig, movie_index: usize) -> usize {
    movie_index % cfg.n_blocks
}

pub fn movie_id(i: usize) -> String {
    format!("m{i:04}")
}

fn normal(rng: &mut impl Rng) -> f64 {
    // Box–Muller; u1 in (0, 1] keeps the log finite
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn generate(cfg: &SyntheticConfig) -> Result<Dataset> {
    if cfg.n_blocks == 0 || cfg.n_movies < cfg.n_blocks {
        return Err(Error::invalid("synthetic config", "need at least one movie per block"));
    }
    if cfg.ratings_per_user > cfg.n_movies {
        return Err(Error::invalid("synthetic config", "ratings_per_user exceeds n_movies"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let factors = default_study_factors();
    let mut ds = Dataset::new(factors.clone());

    for i in 0..cfg.n_movies {
        let b = block_of(cfg, i);
        let mut m = Movie::new(movie_id(i), format!("Synthetic Movie {i}"))?;
        m.director = DIRECTORS[rng.gen_range(0..DIRECTORS.len())].to_owned();
        m.actors = ACTORS.choose_multiple(&mut rng, 3).map(|a| (*a).to_owned()).collect();
        m.genres = vec![GENRES[b % GENRES.len()].to_owned()];
        if rng.gen_bool(0.5) {
            m.genres.push(GENRES[rng.gen_range(0..GENRES.len())].to_owned());
            m.genres.dedup();
        }
        m.year = Some(1990 + rng.gen_range(0..35));
        ds.add_movie(m);
    }

    let weather = factors
        .iter()
        .find(|f| f.factor_id == FactorId::Weather)
        .expect("study factors include weather");
    let indices: Vec<usize> = (0..cfg.n_movies).collect();
    for u in 0..cfg.n_users {
        let user = UserId::new(format!("u{u:04}"));
        let bias = 0.3 * normal(&mut rng);
        let taste: Vec<f64> = (0..cfg.n_blocks)
            .map(|_| if rng.gen_bool(0.5) { 0.8 } else { -0.8 })
            .collect();
        for &i in indices.choose_multiple(&mut rng, cfg.ratings_per_user) {
            let b = block_of(cfg, i);
            let mut situation = ContextualSituation::new();
            for f in &factors {
                let c = f.vocabulary.choose(&mut rng).expect("non-empty vocabulary");
                situation = situation.with(f.factor_id.clone(), c.as_str());
            }
            let favoured = &weather.vocabulary[b % weather.vocabulary.len()];
            let ctx = if situation.get(&FactorId::Weather) == Some(favoured) {
                cfg.context_effect
            } else {
                0.0
            };
            let raw = 3.0 + bias + taste[b] + ctx + cfg.noise * normal(&mut rng);
            let score = raw.round().clamp(1.0, 5.0) as i64;
            ds.add_rating(ContextualRating {
                user_id: user.clone(),
                movie_id: movie_id(i).into(),
                score: Score::new(score)?,
                situation,
                timestamp: None,
            })?;
        }
    }
    Ok(ds)
}
