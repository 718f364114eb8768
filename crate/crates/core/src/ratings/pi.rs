//! pi-ratings: separate home and away ratings per team, driven by the error
//! between actual and expected goal difference.
//!
//! Update convention, with signed error `s = g_D - ĝ_D`:
//! the home team's home rating moves by `λ·ψ(|s|)·sign(s)` and the away team's
//! away rating by the negation; each team's other-ground rating then moves by
//! `γ` times its own primary change.

use std::collections::HashMap;

use crate::data::MatchRecord;
use crate::error::{Error, Result};

use super::RatingEngine;

#[derive(Debug, Clone, PartialEq)]
pub struct PiConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for PiConfig {
    fn default() -> Self {
        Self {
            lambda: 0.035,
            gamma: 0.7,
            b: 10.0,
            c: 3.0,
        }
    }
}

impl PiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("pi lambda must be positive, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("pi gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !(self.b.is_finite() && self.b > 1.0) {
            return Err(Error::Config(format!("pi b must exceed 1, got {}", self.b)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("pi c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PiRating {
    pub home: f64,
    pub away: f64,
}

impl PiRating {
    pub fn overall(&self) -> f64 {
        (self.home + self.away) / 2.0
    }
}

/// Damping of goal-difference errors: `c·log10(1 + e)`.
pub fn psi(error: f64, c: f64) -> f64 {
    c * (1.0 + error).log10()
}

/// Expected goal difference against an average opponent for one ground rating.
/// Negative ratings mirror the positive branch.
pub fn expected_gd_term(rating: f64, b: f64, c: f64) -> f64 {
    let magnitude = b.powf(rating.abs() / c) - 1.0;
    if rating < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

#[derive(Debug, Clone)]
pub struct PiRatings {
    config: PiConfig,
    ratings: HashMap<String, PiRating>,
}

impl PiRatings {
    pub fn new(config: PiConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ratings: HashMap::new(),
        })
    }

    pub fn rating(&self, team: &str) -> PiRating {
        self.ratings.get(team).copied().unwrap_or_default()
    }

    pub fn set_rating(&mut self, team: &str, rating: PiRating) {
        self.ratings.insert(team.to_string(), rating);
    }

    /// Expected goal difference `ĝ_D` for `home` hosting `away`.
    pub fn expected_gd(&self, home: &str, away: &str) -> f64 {
        let PiConfig { b, c, .. } = self.config;
        expected_gd_term(self.rating(home).home, b, c) - expected_gd_term(self.rating(away).away, b, c)
    }

    pub fn pi_update(&mut self, m: &MatchRecord) {
        let PiConfig { lambda, gamma, c, .. } = self.config;
        let signed = m.goal_diff as f64 - self.expected_gd(&m.home_team, &m.away_team);
        let step = lambda * psi(signed.abs(), c) * signed.signum();

        let mut home = self.rating(&m.home_team);
        home.home += step;
        home.away += gamma * step;

        let mut away = self.rating(&m.away_team);
        away.away -= step;
        away.home -= gamma * step;

        self.ratings.insert(m.home_team.clone(), home);
        self.ratings.insert(m.away_team.clone(), away);
    }
}

impl RatingEngine for PiRatings {
    fn name(&self) -> &'static str {
        "pi"
    }

    fn update(&mut self, m: &MatchRecord) -> Result<()> {
        self.pi_update(m);
        Ok(())
    }

    fn rating_diff(&self, home: &str, away: &str) -> f64 {
        self.expected_gd(home, away)
    }

    fn strength(&self, team: &str) -> Option<f64> {
        self.ratings.get(team).map(PiRating::overall)
    }

    fn components(&self, team: &str) -> Vec<(&'static str, f64)> {
        let r = self.rating(team);
        vec![("home", r.home), ("away", r.away), ("overall", r.overall())]
    }

    fn teams(&self) -> Vec<String> {
        let mut t: Vec<String> = self.ratings.keys().cloned().collect();
        t.sort();
        t
    }
}
