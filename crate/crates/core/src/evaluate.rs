//! Scoring rules and the walk-forward backtest harness.
//!
//! Outcomes are ordered (home win, draw, away win) everywhere, which is the
//! order the ranked probability score accumulates over.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MatchRecord, Outcome};
use crate::error::{Error, Result};
use crate::forecast::{
    baseline_majority, baseline_odds, ologit_fit, poisson_outcome, OrderedLogitModel, ProbTriple,
    PROB_SUM_TOLERANCE,
};
use crate::ratings::{EngineSpec, RatingEngine};

/// Probabilities below this are clamped before taking logs in the ignorance score.
pub const IGN_FLOOR: f64 = 1e-15;

pub fn accuracy(predicted: &[Outcome], actual: &[Outcome]) -> Result<f64> {
    check_lengths(predicted.len(), actual.len())?;
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::Empty("scoring input"));
    }
    if a != b {
        return Err(Error::domain(format!("forecast and outcome counts differ: {a} vs {b}")));
    }
    Ok(())
}

fn checked(p: &ProbTriple) -> Result<[f64; 3]> {
    let v = p.as_array();
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::domain(format!("forecast {v:?} is not a probability distribution")));
    }
    Ok(v)
}

/// Summed squared error of one forecast against the one-hot outcome.
pub fn brier_single(forecast: &ProbTriple, outcome: Outcome) -> Result<f64> {
    let p = checked(forecast)?;
    Ok(p.iter()
        .zip(outcome.one_hot())
        .map(|(p, y)| (p - y).powi(2))
        .sum())
}

/// Multi-class Brier score averaged over matches (range [0, 2]).
pub fn brier(forecasts: &[ProbTriple], outcomes: &[Outcome]) -> Result<f64> {
    check_lengths(forecasts.len(), outcomes.len())?;
    let mut total = 0.0;
    for (f, &o) in forecasts.iter().zip(outcomes) {
        total += brier_single(f, o)?;
    }
    Ok(total / outcomes.len() as f64)
}

/// Ranked probability score for any number of ordered categories.
pub fn rps_ordered(probs: &[f64], observed: usize) -> Result<f64> {
    let r = probs.len();
    if r < 2 || observed >= r {
        return Err(Error::domain("need at least two categories and a valid observed index"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::domain(format!("forecast sums to {sum}, not 1")));
    }
    let mut cum = 0.0;
    let mut total = 0.0;
    for (i, p) in probs.iter().enumerate().take(r - 1) {
        cum += p - if i == observed { 1.0 } else { 0.0 };
        total += cum * cum;
    }
    Ok(total / (r - 1) as f64)
}

pub fn rps(forecast: &ProbTriple, outcome: Outcome) -> Result<f64> {
    rps_ordered(&checked(forecast)?, outcome.index())
}

pub fn rps_avg(forecasts: &[ProbTriple], outcomes: &[Outcome]) -> Result<f64> {
    check_lengths(forecasts.len(), outcomes.len())?;
    let mut total = 0.0;
    for (f, &o) in forecasts.iter().zip(outcomes) {
        total += rps(f, o)?;
    }
    Ok(total / outcomes.len() as f64)
}

/// `-log2 p_observed`, with `p` floored at [`IGN_FLOOR`]. The flag reports clamping.
pub fn ign_single(forecast: &ProbTriple, outcome: Outcome) -> Result<(f64, bool)> {
    let p = checked(forecast)?[outcome.index()];
    let clamped = p < IGN_FLOOR;
    Ok((-p.max(IGN_FLOOR).log2(), clamped))
}

pub fn ign(forecasts: &[ProbTriple], outcomes: &[Outcome]) -> Result<f64> {
    check_lengths(forecasts.len(), outcomes.len())?;
    let mut total = 0.0;
    for (f, &o) in forecasts.iter().zip(outcomes) {
        total += ign_single(f, o)?.0;
    }
    Ok(total / outcomes.len() as f64)
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted.len(), actual.len())?;
    let mse = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mse.sqrt())
}

/// Splits a canonical dataset into a leading train part and trailing test part.
/// The cut never separates two matches played on the same date; when the
/// nominal cut falls inside a date, that whole date goes to the test side.
pub fn temporal_split(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !dataset.is_canonical() {
        return Err(Error::Unsorted);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::domain(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let n = dataset.len();
    let mut cut = (train_fraction * n as f64).ceil() as usize;
    let m = &dataset.matches;
    while cut > 0 && cut < n && m[cut - 1].date == m[cut].date {
        cut -= 1;
    }
    if cut == 0 {
        return Err(Error::Empty("training split"));
    }
    if cut >= n {
        return Err(Error::Empty("test split"));
    }
    Ok((dataset.slice(0..cut), dataset.slice(cut..n)))
}

/// How a pipeline turns ratings into probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum ForecasterKind {
    Uniform,
    /// Training-set outcome frequencies.
    Majority,
    /// Normalized bookmaker odds.
    Odds,
    /// Ordered logit on the engine's rating difference.
    OrderedLogit,
    /// Independent Poisson on the engine's expected goals.
    Poisson { goal_cap: u32 },
}

impl ForecasterKind {
    pub fn name(&self) -> &'static str {
        match self {
            ForecasterKind::Uniform => "uniform",
            ForecasterKind::Majority => "majority",
            ForecasterKind::Odds => "odds",
            ForecasterKind::OrderedLogit => "ologit",
            ForecasterKind::Poisson { .. } => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub name: String,
    pub engine: EngineSpec,
    pub forecaster: ForecasterKind,
}

impl Pipeline {
    pub fn new(engine: EngineSpec, forecaster: ForecasterKind) -> Self {
        let name = match forecaster {
            ForecasterKind::Uniform | ForecasterKind::Majority | ForecasterKind::Odds => {
                forecaster.name().to_string()
            }
            _ => format!("{}+{}", engine.name(), forecaster.name()),
        };
        Self {
            name,
            engine,
            forecaster,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldBoundary {
    /// A new fold starts whenever the season label changes within a league.
    Seasons,
    /// A new fold every `n` matches of a league (rounded to whole dates).
    Blocks(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldSpec {
    pub boundary: FoldBoundary,
    /// Fit only on the trailing `n` earlier matches instead of all of them.
    pub train_window: Option<usize>,
}

impl Default for FoldSpec {
    fn default() -> Self {
        Self {
            boundary: FoldBoundary::Seasons,
            train_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRow {
    #[serde(rename = "match")]
    pub key: String,
    pub date: NaiveDate,
    pub league: String,
    pub season: String,
    pub fold: String,
    pub model: String,
    pub p_home: f64,
    pub p_draw: f64,
    pub p_away: f64,
    pub predicted_class: char,
    pub outcome: char,
    pub rps: f64,
    pub brier: f64,
    pub ign: f64,
    pub ign_clamped: bool,
    pub exp_home_goals: Option<f64>,
    pub exp_away_goals: Option<f64>,
    pub home_goals: u32,
    pub away_goals: u32,
}

impl BacktestRow {
    pub fn forecast(&self) -> ProbTriple {
        ProbTriple {
            home: self.p_home,
            draw: self.p_draw,
            away: self.p_away,
        }
    }

    pub fn outcome(&self) -> Outcome {
        outcome_from_letter(self.outcome)
    }

    pub fn predicted(&self) -> Outcome {
        outcome_from_letter(self.predicted_class)
    }
}

fn outcome_from_letter(c: char) -> Outcome {
    match c {
        'H' => Outcome::HomeWin,
        'D' => Outcome::Draw,
        _ => Outcome::AwayWin,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub model: String,
    /// `overall`, `league`, `season` or `fold`.
    pub scope: String,
    pub label: String,
    pub n: usize,
    pub accuracy: f64,
    pub brier: f64,
    pub rps_avg: f64,
    pub ign: f64,
    pub ign_clamped: usize,
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub pipeline: String,
    pub rows: Vec<BacktestRow>,
    pub aggregates: Vec<Aggregate>,
    /// `(league, fold label, first test date)` for every evaluated fold.
    pub folds: Vec<(String, String, NaiveDate)>,
    pub notes: Vec<String>,
}

impl BacktestReport {
    pub fn overall(&self) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.scope == "overall")
    }
}

/// Metrics over a set of rows; `None` for an empty set.
pub fn aggregate_rows<'a>(scope: &str, label: &str, rows: impl IntoIterator<Item = &'a BacktestRow>) -> Option<Aggregate> {
    let mut n = 0;
    let mut model = String::new();
    let (mut hits, mut brier, mut rps, mut ign, mut clamped) = (0usize, 0.0, 0.0, 0.0, 0usize);
    let (mut sq, mut goal_n) = (0.0, 0usize);
    for r in rows {
        if n == 0 {
            model.clone_from(&r.model);
        }
        n += 1;
        if r.predicted_class == r.outcome {
            hits += 1;
        }
        brier += r.brier;
        rps += r.rps;
        ign += r.ign;
        clamped += r.ign_clamped as usize;
        if let (Some(h), Some(a)) = (r.exp_home_goals, r.exp_away_goals) {
            sq += (h - r.home_goals as f64).powi(2) + (a - r.away_goals as f64).powi(2);
            goal_n += 2;
        }
    }
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    Some(Aggregate {
        model,
        scope: scope.to_string(),
        label: label.to_string(),
        n,
        accuracy: hits as f64 / nf,
        brier: brier / nf,
        rps_avg: rps / nf,
        ign: ign / nf,
        ign_clamped: clamped,
        rmse: (goal_n > 0).then(|| (sq / goal_n as f64).sqrt()),
    })
}

/// Overall, per-league, per-season and per-fold aggregates.
pub fn aggregate_report(rows: &[BacktestRow]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    out.extend(aggregate_rows("overall", "all", rows));
    type Keyer = fn(&BacktestRow) -> String;
    let scopes: [(&str, Keyer); 3] = [
        ("league", |r| r.league.clone()),
        ("season", |r| r.season.clone()),
        ("fold", |r| r.fold.clone()),
    ];
    for (scope, key) in scopes {
        let mut groups: BTreeMap<String, Vec<&BacktestRow>> = BTreeMap::new();
        for r in rows {
            groups.entry(key(r)).or_default().push(r);
        }
        for (label, group) in groups {
            out.extend(aggregate_rows(scope, &label, group));
        }
    }
    out
}

enum Fitted {
    Uniform,
    Majority(ProbTriple),
    Odds,
    OrderedLogit(OrderedLogitModel),
    Poisson(u32),
}

fn fit(kind: &ForecasterKind, train: &[(f64, Outcome)]) -> Result<Fitted> {
    Ok(match kind {
        ForecasterKind::Uniform => Fitted::Uniform,
        ForecasterKind::Majority => {
            let ys: Vec<Outcome> = train.iter().map(|(_, y)| *y).collect();
            Fitted::Majority(baseline_majority(&ys)?)
        }
        ForecasterKind::Odds => Fitted::Odds,
        ForecasterKind::OrderedLogit => Fitted::OrderedLogit(ologit_fit(train)?),
        ForecasterKind::Poisson { goal_cap } => Fitted::Poisson(*goal_cap),
    })
}

fn predict(fitted: &Fitted, engine: &dyn RatingEngine, m: &MatchRecord, covariate: f64) -> Result<ProbTriple> {
    match fitted {
        Fitted::Uniform => Ok(ProbTriple::uniform()),
        Fitted::Majority(p) => Ok(*p),
        Fitted::Odds => baseline_odds(m.odds.as_ref().ok_or_else(|| Error::MissingOdds(m.key()))?),
        Fitted::OrderedLogit(model) => Ok(model.predict(covariate)),
        Fitted::Poisson(cap) => {
            let (h, a) = engine
                .expected_goals(&m.home_team, &m.away_team)
                .ok_or_else(|| Error::Config(format!("engine `{}` does not predict goals", engine.name())))?;
            poisson_outcome(h, a, *cap)
        }
    }
}

/// Walk-forward backtest.
///
/// Per league, matches are processed one date at a time. Every match on a date
/// is forecast from the state left by strictly earlier dates; only then are the
/// date's results applied to the rating engine. At each fold boundary the
/// forecaster is refit on the samples of all strictly earlier matches (or the
/// trailing window). Folds with no earlier matches are skipped and noted.
/// Leagues run independently and in parallel.
pub fn walk_forward(dataset: &Dataset, pipeline: &Pipeline, folds: &FoldSpec) -> Result<BacktestReport> {
    if !dataset.is_canonical() {
        return Err(Error::Unsorted);
    }
    if let FoldBoundary::Blocks(0) = folds.boundary {
        return Err(Error::domain("fold block size must be at least 1"));
    }
    if pipeline.forecaster == ForecasterKind::Odds {
        if let Some(m) = dataset.iter().find(|m| m.odds.is_none()) {
            return Err(Error::MissingOdds(m.key()));
        }
    }
    // Fail fast on engine configuration problems.
    pipeline.engine.build()?;

    let leagues = dataset.leagues();
    let per_league: Vec<(Vec<(usize, BacktestRow)>, Vec<(String, String, NaiveDate)>, Vec<String>)> = leagues
        .par_iter()
        .map(|league| {
            let idx: Vec<usize> = (0..dataset.len())
                .filter(|&i| &dataset.matches[i].league == league)
                .collect();
            run_league(dataset, &idx, pipeline, folds)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut fold_list = Vec::new();
    let mut notes = Vec::new();
    for (r, f, n) in per_league {
        rows.extend(r);
        fold_list.extend(f);
        notes.extend(n);
    }
    // Dataset position is the canonical order.
    rows.sort_by_key(|(i, _)| *i);
    let rows: Vec<BacktestRow> = rows.into_iter().map(|(_, r)| r).collect();
    fold_list.sort_by(|a, b| (a.2, &a.0).cmp(&(b.2, &b.0)));
    let aggregates = aggregate_report(&rows);
    Ok(BacktestReport {
        pipeline: pipeline.name.clone(),
        rows,
        aggregates,
        folds: fold_list,
        notes,
    })
}

/// Runs independent pipelines over the same dataset in parallel; reports keep the input order.
pub fn walk_forward_many(dataset: &Dataset, pipelines: &[Pipeline], folds: &FoldSpec) -> Result<Vec<BacktestReport>> {
    pipelines
        .par_iter()
        .map(|p| walk_forward(dataset, p, folds))
        .collect()
}

type LeagueOutput = (Vec<(usize, BacktestRow)>, Vec<(String, String, NaiveDate)>, Vec<String>);

fn run_league(dataset: &Dataset, idx: &[usize], pipeline: &Pipeline, folds: &FoldSpec) -> Result<LeagueOutput> {
    let matches: Vec<&MatchRecord> = idx.iter().map(|&i| &dataset.matches[i]).collect();
    let league = matches.first().map(|m| m.league.clone()).unwrap_or_default();

    // Fold number of each date group, keyed by the group's first match.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut s = 0;
    while s < matches.len() {
        let e = s + matches[s..].iter().take_while(|m| m.date == matches[s].date).count();
        groups.push((s, e));
        s = e;
    }
    let mut fold_labels: Vec<String> = Vec::new();
    let mut group_fold: Vec<usize> = Vec::with_capacity(groups.len());
    for &(s, _) in &groups {
        let label = match folds.boundary {
            FoldBoundary::Seasons => matches[s].season.clone(),
            FoldBoundary::Blocks(n) => format!("block{}", s / n),
        };
        if fold_labels.last() != Some(&label) {
            fold_labels.push(label);
        }
        group_fold.push(fold_labels.len() - 1);
    }

    let mut engine = pipeline.engine.build()?;
    let mut history: Vec<(f64, Outcome)> = Vec::new();
    let mut fitted: Option<Fitted> = None;
    let mut current_fold = usize::MAX;
    let mut rows = Vec::new();
    let mut fold_list = Vec::new();
    let mut notes = Vec::new();

    for (g, &(s, e)) in groups.iter().enumerate() {
        let fold = group_fold[g];
        if fold != current_fold {
            current_fold = fold;
            let fold_name = format!("{league}:{}", fold_labels[fold]);
            fitted = None;
            if history.is_empty() {
                notes.push(format!("fold {fold_name} skipped: no prior training data"));
            } else {
                let train = match folds.train_window {
                    Some(w) => &history[history.len().saturating_sub(w)..],
                    None => &history[..],
                };
                match fit(&pipeline.forecaster, train) {
                    Ok(f) => {
                        fitted = Some(f);
                        fold_list.push((league.clone(), fold_name, matches[s].date));
                    }
                    Err(err @ (Error::Degenerate(_) | Error::Empty(_))) => {
                        notes.push(format!("fold {fold_name} skipped: {err}"));
                    }
                    Err(err) => return Err(err),
                }
            }
        }

        let covariates: Vec<f64> = matches[s..e]
            .iter()
            .map(|m| engine.rating_diff(&m.home_team, &m.away_team))
            .collect();
        if let Some(f) = &fitted {
            for (k, m) in matches[s..e].iter().enumerate() {
                let p = predict(f, engine.as_ref(), m, covariates[k])?;
                let goals = engine.expected_goals(&m.home_team, &m.away_team);
                let (ign, clamped) = ign_single(&p, m.result)?;
                rows.push((
                    idx[s + k],
                    BacktestRow {
                        key: m.key(),
                        date: m.date,
                        league: m.league.clone(),
                        season: m.season.clone(),
                        fold: format!("{league}:{}", fold_labels[fold]),
                        model: pipeline.name.clone(),
                        p_home: p.home,
                        p_draw: p.draw,
                        p_away: p.away,
                        predicted_class: p.predicted().letter(),
                        outcome: m.result.letter(),
                        rps: rps(&p, m.result)?,
                        brier: brier_single(&p, m.result)?,
                        ign,
                        ign_clamped: clamped,
                        exp_home_goals: goals.map(|g| g.0),
                        exp_away_goals: goals.map(|g| g.1),
                        home_goals: m.home_goals,
                        away_goals: m.away_goals,
                    },
                ));
            }
        }
        for (k, m) in matches[s..e].iter().enumerate() {
            history.push((covariates[k], m.result));
            engine.update(m)?;
        }
    }
    Ok((rows, fold_list, notes))
}

/// Per-match rows as CSV.
pub fn write_rows_csv(rows: &[BacktestRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r)?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn read_rows_csv(text: &str) -> Result<Vec<BacktestRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_aggregates_csv(aggregates: &[Aggregate]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for a in aggregates {
        wtr.serialize(a)?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

/// Headline metrics for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub n: usize,
    pub rps_avg: f64,
    pub accuracy: f64,
    pub brier: f64,
    pub ign: f64,
    pub rmse: Option<f64>,
}

impl ModelSummary {
    pub fn from_report(report: &BacktestReport) -> Option<Self> {
        report.overall().map(|a| Self {
            name: report.pipeline.clone(),
            n: a.n,
            rps_avg: a.rps_avg,
            accuracy: a.accuracy,
            brier: a.brier,
            ign: a.ign,
            rmse: a.rmse,
        })
    }
}

/// Content of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub models: Vec<ModelSummary>,
    pub notes: Vec<String>,
}

impl Summary {
    /// Fixed-width comparison table, one line per model.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<24} {:>6} {:>9} {:>9} {:>8} {:>8}\n", "Model", "N", "RPS_avg", "Accuracy", "Brier", "IGN");
        for m in &self.models {
            out.push_str(&format!(
                "{:<24} {:>6} {:>9.4} {:>9.4} {:>8.4} {:>8.4}\n",
                m.name, m.n, m.rps_avg, m.accuracy, m.brier, m.ign
            ));
        }
        out
    }
}
