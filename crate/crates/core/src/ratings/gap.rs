//! GAP (generalized attacking performance) ratings.
//!
//! Each team carries home attack, home defense, away attack and away defense
//! ratings over any match statistic (goals, shots, corners, ...). All four are
//! clamped at zero after every update.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::data::{Dataset, MatchRecord};
use crate::error::{Error, Result};

use super::RatingEngine;

/// Games at each end of a team's season that are left out of the fitting cost.
pub const DEFAULT_EDGE_EXCLUSION: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct GapConfig {
    pub lambda: f64,
    /// Share of a home game's update applied to the home ratings.
    pub phi1: f64,
    /// Share of an away game's update applied to the away ratings.
    pub phi2: f64,
    /// Statistic being modeled; `goals` or a stat name with `_home`/`_away` columns.
    pub stat: String,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            phi1: 0.5,
            phi2: 0.5,
            stat: "goals".to_string(),
        }
    }
}

impl GapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("gap lambda must be positive, got {}", self.lambda)));
        }
        for (name, v) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("gap {name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GapRating {
    pub home_attack: f64,
    pub home_defense: f64,
    pub away_attack: f64,
    pub away_defense: f64,
}

impl GapRating {
    pub fn as_array(&self) -> [f64; 4] {
        [self.home_attack, self.home_defense, self.away_attack, self.away_defense]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            home_attack: v[0],
            home_defense: v[1],
            away_attack: v[2],
            away_defense: v[3],
        }
    }

    /// Mean attack minus mean defense.
    pub fn net(&self) -> f64 {
        (self.home_attack + self.away_attack) / 2.0 - (self.home_defense + self.away_defense) / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct GapRatings {
    config: GapConfig,
    ratings: HashMap<String, GapRating>,
}

impl GapRatings {
    pub fn new(config: GapConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ratings: HashMap::new(),
        })
    }

    pub fn config(&self) -> &GapConfig {
        &self.config
    }

    pub fn rating(&self, team: &str) -> GapRating {
        self.ratings.get(team).copied().unwrap_or_default()
    }

    pub fn set_rating(&mut self, team: &str, rating: GapRating) {
        self.ratings.insert(team.to_string(), rating);
    }

    /// Expected statistic `(Ŝ_H, Ŝ_A)` for `home` hosting `away`.
    pub fn expect(&self, home: &str, away: &str) -> (f64, f64) {
        let i = self.rating(home);
        let j = self.rating(away);
        (
            (i.home_attack + j.away_defense) / 2.0,
            (j.away_attack + i.home_defense) / 2.0,
        )
    }

    /// Applies the eight updates using expectations from the pre-match state.
    pub fn update_with_stats(&mut self, home: &str, away: &str, s_home: f64, s_away: f64) -> Result<()> {
        if !(s_home >= 0.0 && s_away >= 0.0 && s_home.is_finite() && s_away.is_finite()) {
            return Err(Error::domain(format!(
                "match statistics must be non-negative, got {s_home} and {s_away}"
            )));
        }
        let GapConfig { lambda, phi1, phi2, .. } = self.config;
        let (exp_h, exp_a) = self.expect(home, away);
        let err_h = s_home - exp_h;
        let err_a = s_away - exp_a;

        let mut i = self.rating(home);
        i.home_attack = (i.home_attack + lambda * phi1 * err_h).max(0.0);
        i.away_attack = (i.away_attack + lambda * (1.0 - phi1) * err_h).max(0.0);
        i.home_defense = (i.home_defense + lambda * phi1 * err_a).max(0.0);
        i.away_defense = (i.away_defense + lambda * (1.0 - phi1) * err_a).max(0.0);

        let mut j = self.rating(away);
        j.away_attack = (j.away_attack + lambda * phi2 * err_a).max(0.0);
        j.home_attack = (j.home_attack + lambda * (1.0 - phi2) * err_a).max(0.0);
        j.away_defense = (j.away_defense + lambda * phi2 * err_h).max(0.0);
        j.home_defense = (j.home_defense + lambda * (1.0 - phi2) * err_h).max(0.0);

        self.ratings.insert(home.to_string(), i);
        self.ratings.insert(away.to_string(), j);
        Ok(())
    }

    /// Promoted teams take the componentwise mean of the relegated teams' ratings.
    pub fn season_rollover(&mut self, promoted: &[String], relegated: &[String]) -> Result<()> {
        if promoted.is_empty() {
            return Ok(());
        }
        if relegated.is_empty() {
            return Err(Error::domain("promoted teams need at least one relegated team to inherit from"));
        }
        let mut mean = [0.0; 4];
        for team in relegated {
            for (acc, v) in mean.iter_mut().zip(self.rating(team).as_array()) {
                *acc += v;
            }
        }
        let n = relegated.len() as f64;
        let donor = GapRating::from_array(mean.map(|s| s / n));
        for team in promoted {
            self.ratings.insert(team.clone(), donor);
        }
        Ok(())
    }
}

impl RatingEngine for GapRatings {
    fn name(&self) -> &'static str {
        "gap"
    }

    fn update(&mut self, m: &MatchRecord) -> Result<()> {
        let (h, a) = m.stat_pair(&self.config.stat).ok_or_else(|| Error::MissingStat {
            key: m.key(),
            stat: self.config.stat.clone(),
        })?;
        self.update_with_stats(&m.home_team, &m.away_team, h, a)
    }

    fn rating_diff(&self, home: &str, away: &str) -> f64 {
        let (h, a) = self.expect(home, away);
        h - a
    }

    fn expected_goals(&self, home: &str, away: &str) -> Option<(f64, f64)> {
        (self.config.stat == "goals").then(|| self.expect(home, away))
    }

    fn strength(&self, team: &str) -> Option<f64> {
        self.ratings.get(team).map(GapRating::net)
    }

    fn components(&self, team: &str) -> Vec<(&'static str, f64)> {
        let r = self.rating(team);
        vec![
            ("home_attack", r.home_attack),
            ("home_defense", r.home_defense),
            ("away_attack", r.away_attack),
            ("away_defense", r.away_defense),
        ]
    }

    fn teams(&self) -> Vec<String> {
        let mut t: Vec<String> = self.ratings.keys().cloned().collect();
        t.sort();
        t
    }
}

/// Candidate values for [`gap_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapGrid {
    pub lambdas: Vec<f64>,
    pub phi1s: Vec<f64>,
    pub phi2s: Vec<f64>,
}

impl GapGrid {
    /// All `(λ, ϕ1, ϕ2)` triples in lexicographic order.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut v = Vec::with_capacity(self.lambdas.len() * self.phi1s.len() * self.phi2s.len());
        let mut lambdas = self.lambdas.clone();
        let mut phi1s = self.phi1s.clone();
        let mut phi2s = self.phi2s.clone();
        for xs in [&mut lambdas, &mut phi1s, &mut phi2s] {
            xs.sort_by(f64::total_cmp);
            xs.dedup();
        }
        for &l in &lambdas {
            for &p1 in &phi1s {
                for &p2 in &phi2s {
                    v.push((l, p1, p2));
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapFit {
    pub lambda: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub cost: f64,
}

/// Marks matches that fall in the home team's first or last `edge` games of
/// its season (counting home and away games within one league).
pub fn edge_exclusions(dataset: &Dataset, edge: usize) -> Vec<bool> {
    let mut totals: HashMap<(&str, &str, &str), usize> = HashMap::new();
    for m in dataset.iter() {
        for team in [&m.home_team, &m.away_team] {
            *totals.entry((&m.league, &m.season, team)).or_default() += 1;
        }
    }
    let mut seen: HashMap<(&str, &str, &str), usize> = HashMap::new();
    dataset
        .iter()
        .map(|m| {
            let mut home_pos = 0;
            for team in [&m.home_team, &m.away_team] {
                let c = seen.entry((&m.league, &m.season, team)).or_default();
                if team == &m.home_team {
                    home_pos = *c;
                }
                *c += 1;
            }
            let total = totals[&(m.league.as_str(), m.season.as_str(), m.home_team.as_str())];
            home_pos < edge || home_pos + edge >= total
        })
        .collect()
}

/// Absolute-error cost of replaying `stats` from zero ratings, skipping `excluded` matches.
pub fn replay_cost(
    dataset: &Dataset,
    stats: &[(f64, f64)],
    excluded: &[bool],
    config: &GapConfig,
) -> Result<f64> {
    let mut engine = GapRatings::new(config.clone())?;
    let mut cost = 0.0;
    for ((m, &(s_h, s_a)), &skip) in dataset.iter().zip(stats).zip(excluded) {
        if !skip {
            let (e_h, e_a) = engine.expect(&m.home_team, &m.away_team);
            cost += (s_h - e_h).abs() + (s_a - e_a).abs();
        }
        engine.update_with_stats(&m.home_team, &m.away_team, s_h, s_a)?;
    }
    Ok(cost)
}

/// Exhaustive grid search for `(λ, ϕ1, ϕ2)`. Ratings still update on excluded
/// matches; only the cost skips them. Ties go to the lexicographically
/// smallest triple.
pub fn gap_fit(dataset: &Dataset, grid: &GapGrid, stat: &str, edge: usize) -> Result<GapFit> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Empty("GAP parameter grid"));
    }
    if !dataset.is_canonical() {
        return Err(Error::Unsorted);
    }
    let stats: Vec<(f64, f64)> = dataset
        .iter()
        .map(|m| {
            m.stat_pair(stat).ok_or_else(|| Error::MissingStat {
                key: m.key(),
                stat: stat.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let excluded = edge_exclusions(dataset, edge);

    let costs: Vec<f64> = points
        .par_iter()
        .map(|&(lambda, phi1, phi2)| {
            let cfg = GapConfig {
                lambda,
                phi1,
                phi2,
                stat: stat.to_string(),
            };
            replay_cost(dataset, &stats, &excluded, &cfg)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, c) in costs.iter().enumerate() {
        if *c < costs[best] {
            best = i;
        }
    }
    let (lambda, phi1, phi2) = points[best];
    Ok(GapFit {
        lambda,
        phi1,
        phi2,
        cost: costs[best],
    })
}

/// Teams present in `next` but not `prev` (promoted) and vice versa (relegated), sorted.
pub fn membership_changes<'a>(
    prev: impl IntoIterator<Item = &'a str>,
    next: impl IntoIterator<Item = &'a str>,
) -> (Vec<String>, Vec<String>) {
    let prev: BTreeSet<&str> = prev.into_iter().collect();
    let next: BTreeSet<&str> = next.into_iter().collect();
    let promoted = next.difference(&prev).map(|s| s.to_string()).collect();
    let relegated = prev.difference(&next).map(|s| s.to_string()).collect();
    (promoted, relegated)
}
