//! Pre-match feature builders.

use std::collections::{HashMap, VecDeque};

use chrono::NaiveDate;

use crate::data::{Dataset, OddsTriple, Outcome};
use crate::error::{Error, Result};
use crate::forecast::ProbTriple;

/// Time-ordered values, oldest first, with the age in days of each entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryWindow {
    values: Vec<f64>,
    ages_days: Vec<f64>,
}

impl HistoryWindow {
    pub fn new(values: Vec<f64>, ages_days: Vec<f64>) -> Result<Self> {
        if values.len() != ages_days.len() {
            return Err(Error::domain("values and ages must have equal length"));
        }
        if ages_days.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("ages must not increase toward the most recent entry"));
        }
        Ok(Self { values, ages_days })
    }

    /// Window without ages (all zero).
    pub fn from_values(values: Vec<f64>) -> Self {
        let ages_days = vec![0.0; values.len()];
        Self { values, ages_days }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ages_days(&self) -> &[f64] {
        &self.ages_days
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecencyMean {
    pub value: f64,
    /// Fewer than `n` values were available.
    pub short_history: bool,
}

/// Mean of the most recent `min(n, len)` values.
pub fn recency_mean(window: &HistoryWindow, n: usize) -> Result<RecencyMean> {
    if n == 0 {
        return Err(Error::domain("recency window must be at least 1"));
    }
    if window.is_empty() {
        return Err(Error::Empty("history window"));
    }
    let take = n.min(window.len());
    let recent = &window.values[window.len() - take..];
    Ok(RecencyMean {
        value: recent.iter().sum::<f64>() / take as f64,
        short_history: take < n,
    })
}

/// Exponential time weights `exp(-xi * age)`.
pub fn exp_weights(ages_days: &[f64], xi: f64) -> Result<Vec<f64>> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::domain(format!("decay rate must be non-negative, got {xi}")));
    }
    ages_days
        .iter()
        .map(|&a| {
            if a >= 0.0 && a.is_finite() {
                Ok((-xi * a).exp())
            } else {
                Err(Error::domain(format!("age must be non-negative, got {a}")))
            }
        })
        .collect()
}

/// Exponentially weighted mean of a window.
pub fn weighted_mean(window: &HistoryWindow, xi: f64) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Empty("history window"));
    }
    let w = exp_weights(&window.ages_days, xi)?;
    let total: f64 = w.iter().sum();
    Ok(w.iter().zip(&window.values).map(|(w, v)| w * v).sum::<f64>() / total)
}

fn last_k(scores: &[u8], k: usize) -> Result<&[u8]> {
    if k == 0 {
        return Err(Error::domain("streak length must be at least 1"));
    }
    if scores.len() < k {
        return Err(Error::domain(format!("need {k} scores, have {}", scores.len())));
    }
    let tail = &scores[scores.len() - k..];
    if let Some(bad) = tail.iter().find(|s| !matches!(s, 0 | 1 | 3)) {
        return Err(Error::domain(format!("score must be 0, 1 or 3, got {bad}")));
    }
    Ok(tail)
}

/// Points from the last `k` games over the maximum `3k`. Scores are league points.
pub fn streak(scores: &[u8], k: usize) -> Result<f64> {
    let tail = last_k(scores, k)?;
    Ok(tail.iter().map(|&s| s as f64).sum::<f64>() / (3 * k) as f64)
}

/// Streak with linear recency weights: the i-th of the last k games (oldest
/// i = 1) counts `2i / (3k(k+1))` per point.
pub fn weighted_streak(scores: &[u8], k: usize) -> Result<f64> {
    let tail = last_k(scores, k)?;
    let denom = (3 * k * (k + 1)) as f64;
    Ok(tail
        .iter()
        .enumerate()
        .map(|(i, &s)| 2.0 * (i + 1) as f64 * s as f64)
        .sum::<f64>()
        / denom)
}

/// One form update for a meeting of A (home) and B (away); `outcome` is from A's side.
pub fn form_step(form_a: f64, form_b: f64, outcome: Outcome, alpha: f64) -> (f64, f64) {
    match outcome {
        Outcome::HomeWin => (form_a + alpha * form_b, form_b - alpha * form_a),
        Outcome::AwayWin => (form_a - alpha * form_b, form_b + alpha * form_a),
        Outcome::Draw => (
            form_a - alpha * (form_a - form_b),
            form_b - alpha * (form_b - form_a),
        ),
    }
}

/// Per-team form, every team starting at 1.
#[derive(Debug, Clone)]
pub struct FormState {
    alpha: f64,
    form: HashMap<String, f64>,
}

impl FormState {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("form alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self {
            alpha,
            form: HashMap::new(),
        })
    }

    pub fn form(&self, team: &str) -> f64 {
        self.form.get(team).copied().unwrap_or(1.0)
    }

    pub fn apply(&mut self, home: &str, away: &str, outcome: Outcome) {
        let (a, b) = form_step(self.form(home), self.form(away), outcome, self.alpha);
        self.form.insert(home.to_string(), a);
        self.form.insert(away.to_string(), b);
    }
}

/// Reciprocal odds normalized to sum to one, plus the overround
/// (sum of reciprocals minus one). Works for any number of outcomes.
pub fn implied_probabilities(odds: &[f64]) -> Result<(Vec<f64>, f64)> {
    if odds.is_empty() {
        return Err(Error::Empty("odds"));
    }
    if let Some(bad) = odds.iter().find(|o| !(o.is_finite() && **o > 1.0)) {
        return Err(Error::domain(format!("decimal odds must exceed 1.0, got {bad}")));
    }
    let raw: Vec<f64> = odds.iter().map(|o| 1.0 / o).collect();
    let total: f64 = raw.iter().sum();
    Ok((raw.iter().map(|r| r / total).collect(), total - 1.0))
}

pub fn odds_to_probs(odds: &OddsTriple) -> Result<(ProbTriple, f64)> {
    let (p, overround) = implied_probabilities(&odds.as_array())?;
    Ok((ProbTriple::new(p[0], p[1], p[2])?, overround))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub recency_n: usize,
    pub streak_k: usize,
    pub form_alpha: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            recency_n: 9,
            streak_k: 6,
            form_alpha: 0.33,
        }
    }
}

/// One row per match; `None` where a feature has too little history.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub keys: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Default)]
struct TeamHistory {
    points: Vec<u8>,
    goals_for: VecDeque<f64>,
    goals_against: VecDeque<f64>,
    last_date: Option<NaiveDate>,
}

const TEAM_FEATURES: [&str; 6] = [
    "goals_for_mean",
    "goals_against_mean",
    "streak",
    "weighted_streak",
    "form",
    "rest_days",
];

/// Builds pre-match features for every match, in dataset order. Each row only
/// sees matches strictly before it. Columns are `feature.team.side`, plus
/// `odds_prob.match.{home,draw,away}` when every match carries odds.
pub fn build_feature_matrix(dataset: &Dataset, config: &FeatureConfig) -> Result<FeatureMatrix> {
    if !dataset.is_canonical() {
        return Err(Error::Unsorted);
    }
    let with_odds = dataset.has_odds();
    let mut columns = Vec::new();
    for side in ["home", "away"] {
        for f in TEAM_FEATURES {
            columns.push(format!("{f}.team.{side}"));
        }
    }
    if with_odds {
        for o in ["home", "draw", "away"] {
            columns.push(format!("odds_prob.match.{o}"));
        }
    }

    let mut history: HashMap<String, TeamHistory> = HashMap::new();
    let mut form = FormState::new(config.form_alpha)?;
    let mut keys = Vec::with_capacity(dataset.len());
    let mut rows = Vec::with_capacity(dataset.len());

    let matches = &dataset.matches;
    let mut start = 0;
    while start < matches.len() {
        let date = matches[start].date;
        let end = start + matches[start..].iter().take_while(|m| m.date == date).count();
        for m in &matches[start..end] {
            let mut row = Vec::with_capacity(columns.len());
            for team in [&m.home_team, &m.away_team] {
                let h = history.get(team.as_str());
                let mean = |q: Option<&VecDeque<f64>>| -> Option<f64> {
                    let q = q?;
                    let w = HistoryWindow::from_values(q.iter().copied().collect());
                    recency_mean(&w, config.recency_n).ok().map(|r| r.value)
                };
                row.push(mean(h.map(|h| &h.goals_for)));
                row.push(mean(h.map(|h| &h.goals_against)));
                row.push(h.and_then(|h| streak(&h.points, config.streak_k).ok()));
                row.push(h.and_then(|h| weighted_streak(&h.points, config.streak_k).ok()));
                row.push(Some(form.form(team)));
                row.push(h.and_then(|h| h.last_date).map(|d| (date - d).num_days() as f64));
            }
            if with_odds {
                let (p, _) = odds_to_probs(m.odds.as_ref().expect("checked by has_odds"))?;
                row.extend(p.as_array().map(Some));
            }
            keys.push(m.key());
            rows.push(row);
        }
        for m in &matches[start..end] {
            for (team, home) in [(&m.home_team, true), (&m.away_team, false)] {
                let h = history.entry(team.clone()).or_default();
                let (gf, ga) = if home {
                    (m.home_goals, m.away_goals)
                } else {
                    (m.away_goals, m.home_goals)
                };
                h.points.push(m.result.points(home));
                h.goals_for.push_back(gf as f64);
                h.goals_against.push_back(ga as f64);
                if h.goals_for.len() > config.recency_n {
                    h.goals_for.pop_front();
                    h.goals_against.pop_front();
                }
                h.last_date = Some(m.date);
            }
            form.apply(&m.home_team, &m.away_team, m.result);
        }
        start = end;
    }
    Ok(FeatureMatrix { columns, keys, rows })
}

pub fn write_feature_csv(matrix: &FeatureMatrix) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["match".to_string()];
    header.extend(matrix.columns.iter().cloned());
    wtr.write_record(&header)?;
    for (key, row) in matrix.keys.iter().zip(&matrix.rows) {
        let mut rec = vec![key.clone()];
        rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        wtr.write_record(&rec)?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
