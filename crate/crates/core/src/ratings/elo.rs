//! Elo ratings with configurable K-factor schedules and home advantage,
//! plus the Bradley–Terry strength conversions.

use std::collections::{BTreeMap, HashMap};

use crate::data::{MatchRecord, Outcome};
use crate::error::{Error, Result};

use super::RatingEngine;

/// Rating points per factor of ten in Bradley–Terry strength.
pub const BT_SCALE: f64 = 400.0;

/// How the K-factor is chosen for a match.
#[derive(Debug, Clone, PartialEq)]
pub enum KMode {
    Fixed(f64),
    /// `k0 * (1 + margin)^lambda`.
    GoalBased { k0: f64, lambda: f64 },
    /// Base K looked up by match importance, bumped for wins by two or more goals.
    InternationalSchedule,
    /// `k_base` times a goal-margin multiplier.
    ClubMultiplier(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloConfig {
    pub initial_rating: f64,
    pub scale: f64,
    pub base: f64,
    pub k_mode: KMode,
    /// Rating points added to the home side's difference.
    pub home_advantage: f64,
    /// Base K per importance label, used by [`KMode::InternationalSchedule`].
    pub importance_schedule: BTreeMap<String, f64>,
    /// Importance applied to every match when the schedule mode is active.
    pub importance: Option<String>,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            initial_rating: 1500.0,
            scale: 400.0,
            base: 10.0,
            k_mode: KMode::Fixed(20.0),
            home_advantage: 0.0,
            importance_schedule: default_importance_schedule(),
            importance: None,
        }
    }
}

/// Built-in anchors: World Cup finals 60, friendlies 20.
pub fn default_importance_schedule() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("world_cup_final".to_string(), 60.0),
        ("friendly".to_string(), 20.0),
    ])
}

impl EloConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("elo {name} must be positive, got {v}")))
            }
        };
        positive("scale", self.scale)?;
        if !(self.base.is_finite() && self.base > 1.0) {
            return Err(Error::Config(format!("elo base must exceed 1, got {}", self.base)));
        }
        if !self.initial_rating.is_finite() {
            return Err(Error::Config("elo initial_rating must be finite".into()));
        }
        if !(self.home_advantage.is_finite() && self.home_advantage >= 0.0) {
            return Err(Error::Config("elo home_advantage must be non-negative".into()));
        }
        match self.k_mode {
            KMode::Fixed(k) => positive("k", k)?,
            KMode::GoalBased { k0, lambda } => {
                positive("k0", k0)?;
                positive("lambda", lambda)?;
            }
            KMode::ClubMultiplier(k) => positive("k_base", k)?,
            KMode::InternationalSchedule => {
                for (label, k) in &self.importance_schedule {
                    positive(&format!("importance `{label}`"), *k)?;
                }
            }
        }
        Ok(())
    }
}

/// Win probabilities `(p_home, p_away)` for the given ratings.
pub fn elo_expect(r_home: f64, r_away: f64, config: &EloConfig) -> (f64, f64) {
    let diff = r_home - r_away + config.home_advantage;
    // Both sides from the same curve, so swapping teams mirrors the pair exactly.
    let p_home = 1.0 / (1.0 + config.base.powf(-diff / config.scale));
    let p_away = 1.0 / (1.0 + config.base.powf(diff / config.scale));
    (p_home, p_away)
}

/// Margin bump of the international schedule: +1/2 for two goals, +3/4 for
/// three, +3/4 + (M-3)/8 beyond.
fn international_bump(margin: u32) -> f64 {
    match margin {
        0 | 1 => 0.0,
        2 => 0.5,
        3 => 0.75,
        m => 0.75 + (m as f64 - 3.0) / 8.0,
    }
}

/// Club goal-margin multiplier: 1 for a draw, 1.5 for one or two goals, (11+M)/8 beyond.
fn club_multiplier(margin: u32) -> f64 {
    match margin {
        0 => 1.0,
        1 | 2 => 1.5,
        m => (11.0 + m as f64) / 8.0,
    }
}

pub fn effective_k(config: &EloConfig, goal_margin: u32, importance: Option<&str>) -> Result<f64> {
    Ok(match &config.k_mode {
        KMode::Fixed(k) => *k,
        KMode::GoalBased { k0, lambda } => k0 * (1.0 + goal_margin as f64).powf(*lambda),
        KMode::InternationalSchedule => {
            let label = importance.ok_or_else(|| {
                Error::Config("international K schedule needs a match importance".into())
            })?;
            let base = config
                .importance_schedule
                .get(label)
                .ok_or_else(|| Error::Config(format!("unknown match importance `{label}`")))?;
            base * (1.0 + international_bump(goal_margin))
        }
        KMode::ClubMultiplier(k) => k * club_multiplier(goal_margin),
    })
}

/// Bradley–Terry strength of an Elo rating: `10^(R/400)`.
pub fn elo_to_bt(rating: f64) -> f64 {
    10f64.powf(rating / BT_SCALE)
}

pub fn bt_to_elo(strength: f64) -> Result<f64> {
    if !(strength > 0.0) {
        return Err(Error::domain(format!("strength must be positive, got {strength}")));
    }
    Ok(BT_SCALE * strength.log10())
}

/// Probability that the side with strength `s_i` beats `s_j`.
pub fn bt_prob(s_i: f64, s_j: f64) -> Result<f64> {
    if !(s_i > 0.0 && s_j > 0.0) {
        return Err(Error::domain(format!("strengths must be positive, got {s_i} and {s_j}")));
    }
    Ok(s_i / (s_i + s_j))
}

#[derive(Debug, Clone)]
pub struct EloRatings {
    config: EloConfig,
    ratings: HashMap<String, f64>,
}

impl EloRatings {
    pub fn new(config: EloConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ratings: HashMap::new(),
        })
    }

    pub fn config(&self) -> &EloConfig {
        &self.config
    }

    /// Current rating; unseen teams report the initial rating.
    pub fn rating(&self, team: &str) -> f64 {
        self.ratings
            .get(team)
            .copied()
            .unwrap_or(self.config.initial_rating)
    }

    pub fn set_rating(&mut self, team: &str, rating: f64) {
        self.ratings.insert(team.to_string(), rating);
    }

    pub fn expect(&self, home: &str, away: &str) -> (f64, f64) {
        elo_expect(self.rating(home), self.rating(away), &self.config)
    }

    /// Applies the U-step to both teams with one shared K. Returns the home rating change.
    pub fn elo_update(&mut self, m: &MatchRecord) -> Result<f64> {
        let k = effective_k(&self.config, m.goal_margin(), self.config.importance.as_deref())?;
        let r_home = self.rating(&m.home_team);
        let r_away = self.rating(&m.away_team);
        let (p_home, _) = elo_expect(r_home, r_away, &self.config);
        let actual = match m.result {
            Outcome::HomeWin => 1.0,
            Outcome::Draw => 0.5,
            Outcome::AwayWin => 0.0,
        };
        let delta = k * (actual - p_home);
        self.ratings.insert(m.home_team.clone(), r_home + delta);
        self.ratings.insert(m.away_team.clone(), r_away - delta);
        Ok(delta)
    }
}

impl RatingEngine for EloRatings {
    fn name(&self) -> &'static str {
        "elo"
    }

    fn update(&mut self, m: &MatchRecord) -> Result<()> {
        self.elo_update(m).map(|_| ())
    }

    fn rating_diff(&self, home: &str, away: &str) -> f64 {
        self.rating(home) - self.rating(away)
    }

    fn strength(&self, team: &str) -> Option<f64> {
        self.ratings.get(team).copied()
    }

    fn components(&self, team: &str) -> Vec<(&'static str, f64)> {
        vec![("rating", self.rating(team))]
    }

    fn teams(&self) -> Vec<String> {
        let mut t: Vec<String> = self.ratings.keys().cloned().collect();
        t.sort();
        t
    }
}
