//! Acceptance criteria, one PASS/FAIL line each. Tolerances and time budgets
//! are pinned below.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use recexp_core::domain::{AppraisalGrade, ExplanationStyle, MetricId, Score};
use recexp_core::eventlog::{parse_log, replay_sessions};
use recexp_core::fuzzy::{
    build_mapping_matrix, classify, compose, implied_mean, AppraisalVector, FactorSet, FuzzyMappingMatrix, GradeSet,
    WeightVector,
};
use recexp_core::protocol::{StudyContext, COMPLETE_SESSION_EVENTS};
use recexp_core::recommender::{cluster_items, select_local_dataset, RecommenderConfig, RecommenderModel};
use recexp_core::report::{render, AnalysisOptions, Format, Table};
use recexp_core::simulate::{simulate, SimulationProfile};
use recexp_core::stats::{one_way_anova, pearson, ptukey, qtukey, spearman, tukey_hsd};
use recexp_core::synthetic::{generate, SyntheticConfig};
use recexp_core::Rational64;
use recexp_service::store::seeded_ids;
use recexp_service::{router, Store};
use recexp_validation::{ensure, CheckResult, Report};

#[path = "../../core/tests/fixtures/reference.rs"]
mod reference;

/// Published memberships carry four decimals.
const PUBLISHED_SUM_TOL: f64 = 0.002;
const ALGEBRA_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-12;

const FACTORS: usize = 6;
const GRADES: usize = 5;

fn main() -> ExitCode {
    let mut report = Report::default();
    report.check(
        "fuzzy golden classification",
        Duration::from_secs(1),
        golden_classification,
    );
    report.check("fuzzy algebra", Duration::from_secs(5), fuzzy_algebra);
    report.check(
        "equal-weights mean identity",
        Duration::from_secs(5),
        equal_weights_mean,
    );
    report.check("mapping matrix worked example", Duration::from_secs(1), worked_example);
    report.check("statistics oracles", Duration::from_secs(30), statistics_oracles);
    report.check(
        "recommender properties",
        Duration::from_secs(30),
        recommender_properties,
    );
    report.check(
        "end-to-end pipeline identity",
        Duration::from_secs(60),
        pipeline_identity,
    );
    report.check(
        "service durability and blinding",
        Duration::from_secs(60),
        service_durability,
    );
    println!("{}", report.summary());
    if report.failed().is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn golden_classification() -> CheckResult {
    use AppraisalGrade::*;
    let rows: [(&str, [f64; 5], AppraisalGrade, f64); 6] = [
        ("Avg", [0.1054, 0.1530, 0.3979, 0.2176, 0.1258], Medium, 0.3979),
        ("Content", [0.0544, 0.1632, 0.3197, 0.3367, 0.1258], Good, 0.3367),
        (
            "Context-aware",
            [0.1938, 0.1667, 0.1530, 0.2006, 0.2857],
            VeryGood,
            0.2857,
        ),
        ("Per", [0.0748, 0.1598, 0.3299, 0.3197, 0.1156], Good, 0.3197),
        ("Simi", [0.0442, 0.1292, 0.2142, 0.4217, 0.1904], Good, 0.4217),
        ("Simu", [0.0714, 0.1292, 0.3027, 0.3537, 0.1428], Good, 0.3537),
    ];
    let grades = GradeSet::default();
    let mut wrong = Vec::new();
    for (style, e, grade, membership) in rows {
        let sum: f64 = e.iter().sum();
        ensure!((sum - 1.0).abs() <= PUBLISHED_SUM_TOL, "{style} sums to {sum}");
        let c = classify(&AppraisalVector::from_memberships(e.to_vec()), &grades).map_err(|e| e.to_string())?;
        if c.grade != grade || c.membership != membership {
            wrong.push(format!(
                "{style}: argmax is {} {}, expected {} {}",
                c.grade, c.membership, grade, membership
            ));
        }
    }
    if wrong.is_empty() {
        Ok("6 rows classified, row sums within 0.002".into())
    } else {
        Err(wrong.join("; "))
    }
}

fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            return v.into_iter().map(|x| x / s).collect();
        }
    }
}

fn random_pair(rng: &mut impl Rng) -> (WeightVector<f64>, Vec<Vec<f64>>) {
    let w = WeightVector::new(random_distribution(rng, FACTORS)).unwrap();
    let r = (0..FACTORS).map(|_| random_distribution(rng, GRADES)).collect();
    (w, r)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fuzzy_algebra() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for n in 0..1000 {
        let (w, rows) = random_pair(&mut rng);
        let r = FuzzyMappingMatrix::new(rows.clone()).map_err(|e| e.to_string())?;
        let e = compose(&w, &r).map_err(|e| e.to_string())?;

        ensure!(
            e.memberships().iter().all(|v| (0.0..=1.0 + ALGEBRA_TOL).contains(v)),
            "pair {n}: membership outside [0, 1]"
        );
        worst = worst.max((e.sum() - 1.0).abs());

        for i in 0..FACTORS {
            let sel = compose(&WeightVector::one_hot(FACTORS, i), &r).unwrap();
            worst = worst.max(max_gap(sel.memberships(), r.row(i)));
        }

        let w2 = WeightVector::new(random_distribution(&mut rng, FACTORS)).unwrap();
        let alpha: f64 = rng.gen();
        let mixed: Vec<f64> = w
            .as_slice()
            .iter()
            .zip(w2.as_slice())
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        let em = compose(&WeightVector::new(mixed).unwrap(), &r).unwrap();
        let e2 = compose(&w2, &r).unwrap();
        let want: Vec<f64> = e
            .memberships()
            .iter()
            .zip(e2.memberships())
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        worst = worst.max(max_gap(em.memberships(), &want));

        let mut order: Vec<usize> = (0..FACTORS).collect();
        order.shuffle(&mut rng);
        let pw = WeightVector::new(order.iter().map(|&i| w.as_slice()[i]).collect()).unwrap();
        let pr = FuzzyMappingMatrix::new(order.iter().map(|&i| rows[i].clone()).collect()).unwrap();
        worst = worst.max(max_gap(compose(&pw, &pr).unwrap().memberships(), e.memberships()));

        ensure!(worst <= ALGEBRA_TOL, "pair {n}: deviation {worst:e}");
    }
    Ok(format!(
        "1000 pairs: convexity, selection, linearity, permutation; max deviation {worst:.1e}"
    ))
}

fn equal_weights_mean() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let grades = GradeSet::default();
    let factors = FactorSet::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=80);
        let responses: BTreeMap<MetricId, Vec<Score>> = MetricId::ALL
            .iter()
            .map(|&m| (m, (0..n).map(|_| Score::new(rng.gen_range(1..=5)).unwrap()).collect()))
            .collect();
        let total: u32 = responses.values().flatten().map(|s| u32::from(s.get())).sum();
        let mean = f64::from(total) / (n * FACTORS) as f64;
        let r = build_mapping_matrix(&factors, &responses, &grades).map_err(|e| e.to_string())?;
        let e = compose(&WeightVector::<f64>::equal(FACTORS), &r).unwrap();
        worst = worst.max((implied_mean(&e, &grades).unwrap() - mean).abs());
    }
    ensure!(worst <= ALGEBRA_TOL, "max deviation {worst:e}");
    Ok(format!("100 cohorts, max deviation {worst:.1e}"))
}

fn worked_example() -> CheckResult {
    let mut scores = vec![3; 7];
    scores.extend([4, 4, 5]);
    let responses: BTreeMap<MetricId, Vec<Score>> = [(
        MetricId::Trust,
        scores.into_iter().map(|s| Score::new(s).unwrap()).collect(),
    )]
    .into();
    let factors = FactorSet::new(vec![MetricId::Trust]).unwrap();
    let grades = GradeSet::default();
    let exact: FuzzyMappingMatrix<Rational64> = build_mapping_matrix(&factors, &responses, &grades).unwrap();
    let want = [(0, 1), (0, 1), (7, 10), (1, 5), (1, 10)].map(|(n, d)| Rational64::new(n, d));
    ensure!(exact.row(0) == want, "rational row {:?}", exact.row(0));
    let float: FuzzyMappingMatrix<f64> = build_mapping_matrix(&factors, &responses, &grades).unwrap();
    ensure!(
        float.row(0) == [0.0, 0.0, 0.7, 0.2, 0.1],
        "float row {:?}",
        float.row(0)
    );
    Ok("{3×7, 4×2, 5×1} → (0, 0, 0.7, 0.2, 0.1) exactly".into())
}

fn statistics_oracles() -> CheckResult {
    use reference::*;
    let mut worst = 0.0f64;
    let mut track = |got: f64, want: f64, what: &str| -> Result<(), String> {
        let d = (got - want).abs();
        worst = worst.max(d);
        ensure!(d <= ORACLE_TOL, "{what}: got {got}, want {want}");
        Ok(())
    };
    let (x, y, r) = PEARSON;
    track(pearson(&x, &y).unwrap().unwrap(), r, "pearson")?;
    for (i, c) in SPEARMAN.iter().enumerate() {
        let s = spearman(c.x, c.y).unwrap();
        track(s.rho.unwrap(), c.rho, &format!("spearman {i} rho"))?;
        track(s.p_value.unwrap(), c.p, &format!("spearman {i} p"))?;
    }
    for (i, c) in ANOVA.iter().enumerate() {
        let g: Vec<Vec<f64>> = c.groups.iter().map(|g| g.to_vec()).collect();
        let a = one_way_anova(&g).unwrap();
        track(a.f, c.f, &format!("anova {i} F"))?;
        track(a.p_value, c.p, &format!("anova {i} p"))?;
        let t = tukey_hsd(&g, 0.05).unwrap();
        ensure!(t.pairs.len() == c.pairs.len(), "tukey {i}: pair count");
        for (got, &(a, b, diff, p)) in t.pairs.iter().zip(c.pairs) {
            ensure!((got.i, got.j) == (a, b), "tukey {i}: pair order");
            track(got.mean_diff, diff, &format!("tukey {i} {a}-{b} diff"))?;
            track(got.p_value, p, &format!("tukey {i} {a}-{b} p"))?;
        }
    }
    for (q, k, df, want) in PTUKEY {
        track(ptukey(q, k, df), want, &format!("ptukey({q}, {k}, {df})"))?;
    }
    for (k, df, want) in QTUKEY_95 {
        track(qtukey(0.95, k, df), want, &format!("qtukey({k}, {df})"))?;
    }

    let x: Vec<f64> = (1..=12).map(f64::from).collect();
    let up: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let down: Vec<f64> = x.iter().map(|v| -v * v).collect();
    let rho_up = spearman(&x, &up).unwrap().rho.unwrap();
    let rho_down = spearman(&x, &down).unwrap().rho.unwrap();
    ensure!((rho_up - 1.0).abs() <= EXACT_TOL, "monotone increasing rho {rho_up}");
    ensure!(
        (rho_down + 1.0).abs() <= EXACT_TOL,
        "monotone decreasing rho {rho_down}"
    );
    Ok(format!(
        "1 pearson, {} spearman, {} anova/tukey, {} ptukey, {} qtukey fixtures; max error {worst:.1e}; monotone ±1 exact",
        SPEARMAN.len(),
        ANOVA.len(),
        PTUKEY.len(),
        QTUKEY_95.len()
    ))
}

fn profile_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../profiles").join(name)
}

fn load_profile(name: &str) -> recexp_core::simulate::ResolvedProfile {
    SimulationProfile::from_toml(&std::fs::read_to_string(profile_path(name)).unwrap()).unwrap()
}

fn study_context() -> StudyContext {
    let ds = generate(&SyntheticConfig::default()).unwrap();
    let model = RecommenderModel::fit(&ds, RecommenderConfig::default()).unwrap();
    StudyContext::new(ds, model)
}

fn recommender_properties() -> CheckResult {
    let ctx = study_context();
    let ds = &ctx.dataset;
    ensure!(ds.n_movies() == 50, "catalog has {} items", ds.n_movies());
    let mut rng = ChaCha8Rng::seed_from_u64(60);

    for n in 0..1000 {
        let len = rng.gen_range(2..40);
        let x: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(1..=5))).collect();
        let y: Vec<f64> = (0..len).map(|_| f64::from(rng.gen_range(1..=5))).collect();
        let (a, b) = (pearson(&x, &y).unwrap(), pearson(&y, &x).unwrap());
        ensure!(a == b, "pair {n}: asymmetric {a:?} {b:?}");
        ensure!(
            a.is_none_or(|r| (-1.0..=1.0).contains(&r)),
            "pair {n}: {a:?} out of bounds"
        );
    }

    let cfg = RecommenderConfig {
        min_local_ratings: 0,
        ..RecommenderConfig::default()
    };
    let targets = ds.observed_study_situations();
    ensure!(!targets.is_empty(), "no observed situations");
    for target in targets.iter().take(5) {
        let mut previous: Option<BTreeSet<usize>> = None;
        for k in 0..20 {
            let theta = -0.95 + 0.1 * f64::from(k);
            let cfg = RecommenderConfig {
                similarity_threshold: theta,
                ..cfg.clone()
            };
            let local = select_local_dataset(ds, target, &ctx.model.profiles, &cfg);
            let kept: BTreeSet<usize> = local.selection.indices.iter().copied().collect();
            if let Some(prev) = &previous {
                ensure!(
                    kept.is_subset(prev),
                    "θ = {theta:.2} kept a rating dropped at a lower θ"
                );
            }
            previous = Some(kept);
        }
    }

    let records = simulate(&ctx, &load_profile("cohort.toml"), 200, 61).map_err(|e| e.to_string())?;
    let sessions = replay_sessions(&records).map_err(|e| e.to_string())?;
    ensure!(sessions.len() == 200, "{} sessions", sessions.len());
    for s in &sessions {
        let seeds: BTreeSet<_> = s.seed_tasks.iter().map(|t| &t.movie_id).collect();
        let trials: BTreeSet<_> = s.trials.iter().map(|t| &t.movie_id).collect();
        ensure!(
            trials.len() == 6,
            "{}: {} distinct trial movies",
            s.session_id,
            trials.len()
        );
        ensure!(
            seeds.is_disjoint(&trials),
            "{}: a seed movie was recommended",
            s.session_id
        );
    }

    let base = cluster_items(ds, &RecommenderConfig::default()).unwrap().partition();
    for _ in 0..10 {
        let mut ratings = ds.ratings.clone();
        ratings.shuffle(&mut rng);
        let p = cluster_items(&ds.with_ratings(ratings), &RecommenderConfig::default())
            .unwrap()
            .partition();
        ensure!(p == base, "clustering changed under rating order");
    }
    Ok("1000 pearson pairs, 20 thresholds × 5 targets, 200 sessions, 10 shuffles".into())
}

fn pipeline_identity() -> CheckResult {
    let ctx = study_context();
    let records = simulate(&ctx, &load_profile("dirac4.toml"), 50, 70).map_err(|e| e.to_string())?;
    let text: String = records.iter().map(|r| r.to_line()).collect();
    let sessions = replay_sessions(&parse_log(&text).unwrap()).map_err(|e| e.to_string())?;
    ensure!(
        sessions.iter().filter(|s| s.is_complete()).count() == 50,
        "sessions incomplete"
    );
    let opts = AnalysisOptions::default();

    let table4 = render(Table::Subjective, &sessions, &opts, Format::Text).map_err(|e| e.to_string())?;
    let cells: Vec<&str> = table4
        .lines()
        .skip(2)
        .flat_map(|l| l.split_whitespace().skip(1))
        .collect();
    ensure!(
        cells.len() == 36 && cells.iter().all(|c| *c == "4.00"),
        "table 4:\n{table4}"
    );

    let table3: Value =
        serde_json::from_str(&render(Table::Objective, &sessions, &opts, Format::Json).unwrap()).unwrap();
    let rows = table3["rows"].as_array().unwrap();
    ensure!(
        rows.len() == ExplanationStyle::ALL.len(),
        "table 3 has {} rows",
        rows.len()
    );
    for row in rows {
        ensure!(
            row["mean_diff"] == 0.0 && row["mean_time_s"] == 5.0,
            "table 3 row {row}"
        );
    }
    let table3_text = render(Table::Objective, &sessions, &opts, Format::Text).unwrap();
    ensure!(
        table3_text
            .lines()
            .skip(2)
            .take(rows.len())
            .all(|l| l.contains("5.00") && l.contains("0.00")),
        "table 3:\n{table3_text}"
    );

    let table6: Value = serde_json::from_str(&render(Table::Fuzzy, &sessions, &opts, Format::Json).unwrap()).unwrap();
    for row in table6["rows"].as_array().unwrap() {
        ensure!(
            row["memberships"] == json!([0.0, 0.0, 0.0, 1.0, 0.0]) && row["grade"] == "Good",
            "table 6 row {row}"
        );
    }
    Ok("50 sessions: table 4 all 4.00, table 3 diff 0.00 / 5.00 s, table 6 one-hot Good".into())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&Value>, key: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(k) = key {
        req = req.header("idempotency-key", k);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value =
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn next_write(id: &str, task: &Value, step: usize) -> Option<(String, Value)> {
    let base = format!("/sessions/{id}");
    let score = (step % 5) + 1;
    Some(match task["kind"].as_str()? {
        "seed" => (
            format!("{base}/seed-ratings"),
            json!({ "task_index": task["task_index"], "score": score }),
        ),
        "explanation" => (
            format!("{base}/trials/{}/explanation-rating", task["trial_index"]),
            json!({ "r": score, "t_ms": 2000 + 37 * step }),
        ),
        "detail" => (
            format!("{base}/trials/{}/detail-rating", task["trial_index"]),
            json!({ "r_prime": 6 - score }),
        ),
        "likert" => (
            format!("{base}/likert"),
            json!({ "style": task["style"], "metric": task["metric"], "score": score }),
        ),
        _ => return None,
    })
}

struct Harness {
    ctx: Arc<StudyContext>,
    log: PathBuf,
}

impl Harness {
    fn open(&self) -> (Arc<Store>, Router) {
        let store = Arc::new(
            Store::open(
                &self.log,
                self.ctx.clone(),
                5,
                Arc::new(|| 1_750_000_000_000),
                seeded_ids(9),
            )
            .unwrap(),
        );
        (store.clone(), router(store))
    }

    /// Runs one session; with `restart` the store is dropped and reopened
    /// from the log after every acknowledged write. Returns the export and
    /// any blinding violations.
    async fn run(&self, restart: bool) -> Result<(String, Vec<String>), String> {
        let participant = json!({
            "age_band": "35-44", "gender": "male", "education": "bachelor",
            "occupation": "teacher", "watching_frequency": "daily"
        });
        let (mut store, mut app) = self.open();
        let (status, created) = call(&app, "POST", "/sessions", Some(&participant), Some("create")).await;
        ensure!(status == StatusCode::CREATED, "create: {status} {created}");
        let id = created["session_id"].as_str().unwrap().to_owned();
        let mut leaks = Vec::new();
        let mut acked = 1;
        for step in 0.. {
            if restart {
                drop((store, app));
                (store, app) = self.open();
            }
            let (_, next) = call(&app, "GET", &format!("/sessions/{id}/next"), None, None).await;
            let task = &next["task"];
            if task["kind"] == "explanation" {
                let keys: BTreeSet<&str> = task.as_object().unwrap().keys().map(String::as_str).collect();
                if keys != BTreeSet::from(["kind", "trial_index", "of", "text"]) {
                    leaks.push(format!("explanation view keys {keys:?}"));
                }
                let session = store.session(&id).unwrap();
                let k = task["trial_index"].as_u64().unwrap() as usize;
                let movie = &session.trials[k].movie_id;
                let title = &self.ctx.dataset.movies[movie].title;
                let shown = task.to_string();
                if shown.contains(movie.as_str()) || shown.contains(title.as_str()) {
                    leaks.push(format!("trial {k} reveals its movie"));
                }
            }
            let Some((uri, body)) = next_write(&id, task, step) else {
                break;
            };
            let (status, ack) = call(&app, "POST", &uri, Some(&body), Some(&format!("w{step}"))).await;
            ensure!(status == StatusCode::OK, "{uri}: {status} {ack}");
            acked += 1;
        }
        ensure!(acked == COMPLETE_SESSION_EVENTS, "{acked} acknowledged writes");
        let export = store.export().map_err(|e| e.to_string())?;
        Ok((export, leaks))
    }
}

fn service_durability() -> CheckResult {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ctx = Arc::new(study_context());
    let straight = Harness {
        ctx: ctx.clone(),
        log: dir.path().join("straight.ndjson"),
    };
    let restarted = Harness {
        ctx,
        log: dir.path().join("restarted.ndjson"),
    };
    let (expected, leaks_a) = runtime.block_on(straight.run(false))?;
    let (got, leaks_b) = runtime.block_on(restarted.run(true))?;
    ensure!(
        got == expected,
        "export after restarts differs from the uninterrupted run"
    );
    ensure!(
        leaks_a.is_empty() && leaks_b.is_empty(),
        "blinding: {:?}",
        [leaks_a, leaks_b].concat()
    );

    let reopened = restarted.open().0;
    ensure!(reopened.export().unwrap() == expected, "reopened export differs");
    Ok(format!(
        "{} events, reopened after each acknowledged write, export identical, explanation views blinded",
        expected.lines().count()
    ))
}
