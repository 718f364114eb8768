//! Berrar ratings: offensive and defensive strengths feeding a bounded
//! logistic expected-goals curve.

use std::collections::HashMap;

use crate::data::{Dataset, MatchRecord};
use crate::error::{Error, Result};

use super::RatingEngine;

#[derive(Debug, Clone, PartialEq)]
pub struct BerrarConfig {
    /// Maximum expected goals for the home side.
    pub alpha_h: f64,
    pub alpha_a: f64,
    pub beta_h: f64,
    pub beta_a: f64,
    pub gamma_h: f64,
    pub gamma_a: f64,
    /// Learning rates: home offense, home defense, away offense, away defense.
    pub omega_oh: f64,
    pub omega_dh: f64,
    pub omega_oa: f64,
    pub omega_da: f64,
}

impl Default for BerrarConfig {
    fn default() -> Self {
        // Biases put the zero-rating expectation near typical league scoring
        // (about 1.5 home and 1.1 away goals).
        Self {
            alpha_h: 5.0,
            alpha_a: 5.0,
            beta_h: 1.0,
            beta_a: 1.0,
            gamma_h: -0.85,
            gamma_a: -1.27,
            omega_oh: 0.1,
            omega_dh: 0.1,
            omega_oa: 0.1,
            omega_da: 0.1,
        }
    }
}

impl BerrarConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha_h", self.alpha_h), ("alpha_a", self.alpha_a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("berrar {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta_h", self.beta_h), ("beta_a", self.beta_a)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("berrar {name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("omega_oh", self.omega_oh),
            ("omega_dh", self.omega_dh),
            ("omega_oa", self.omega_oa),
            ("omega_da", self.omega_da),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("berrar {name} must be positive, got {v}")));
            }
        }
        if !(self.gamma_h.is_finite() && self.gamma_a.is_finite()) {
            return Err(Error::Config("berrar gammas must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BerrarRating {
    pub offense: f64,
    pub defense: f64,
}

fn bounded_logistic(alpha: f64, beta: f64, gamma: f64, x: f64) -> f64 {
    alpha / (1.0 + (-beta * x - gamma).exp())
}

#[derive(Debug, Clone)]
pub struct BerrarRatings {
    config: BerrarConfig,
    ratings: HashMap<String, BerrarRating>,
}

impl BerrarRatings {
    pub fn new(config: BerrarConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ratings: HashMap::new(),
        })
    }

    pub fn config(&self) -> &BerrarConfig {
        &self.config
    }

    pub fn rating(&self, team: &str) -> BerrarRating {
        self.ratings.get(team).copied().unwrap_or_default()
    }

    pub fn set_rating(&mut self, team: &str, rating: BerrarRating) {
        self.ratings.insert(team.to_string(), rating);
    }

    /// Expected goals `(Ĝ_H, Ĝ_A)`.
    pub fn expect(&self, home: &str, away: &str) -> (f64, f64) {
        let c = &self.config;
        let h = self.rating(home);
        let a = self.rating(away);
        (
            bounded_logistic(c.alpha_h, c.beta_h, c.gamma_h, h.offense - a.defense),
            bounded_logistic(c.alpha_a, c.beta_a, c.gamma_a, a.offense - h.defense),
        )
    }

    pub fn berrar_update(&mut self, m: &MatchRecord) {
        let (exp_h, exp_a) = self.expect(&m.home_team, &m.away_team);
        let err_h = m.home_goals as f64 - exp_h;
        let err_a = m.away_goals as f64 - exp_a;
        let c = &self.config;

        let mut home = self.rating(&m.home_team);
        home.offense += c.omega_oh * err_h;
        home.defense += c.omega_dh * err_a;

        let mut away = self.rating(&m.away_team);
        away.offense += c.omega_oa * err_a;
        away.defense += c.omega_da * err_h;

        self.ratings.insert(m.home_team.clone(), home);
        self.ratings.insert(m.away_team.clone(), away);
    }
}

impl RatingEngine for BerrarRatings {
    fn name(&self) -> &'static str {
        "berrar"
    }

    fn update(&mut self, m: &MatchRecord) -> Result<()> {
        self.berrar_update(m);
        Ok(())
    }

    fn rating_diff(&self, home: &str, away: &str) -> f64 {
        let (h, a) = self.expect(home, away);
        h - a
    }

    fn expected_goals(&self, home: &str, away: &str) -> Option<(f64, f64)> {
        Some(self.expect(home, away))
    }

    fn strength(&self, team: &str) -> Option<f64> {
        self.ratings.get(team).map(|r| r.offense - r.defense)
    }

    fn components(&self, team: &str) -> Vec<(&'static str, f64)> {
        let r = self.rating(team);
        vec![("offense", r.offense), ("defense", r.defense)]
    }

    fn teams(&self) -> Vec<String> {
        let mut t: Vec<String> = self.ratings.keys().cloned().collect();
        t.sort();
        t
    }
}

/// Summed squared goal error of a full replay, expectations taken before each update.
pub fn replay_squared_error(dataset: &Dataset, config: &BerrarConfig) -> Result<f64> {
    let mut engine = BerrarRatings::new(config.clone())?;
    let mut sse = 0.0;
    for m in dataset.iter() {
        let (h, a) = engine.expect(&m.home_team, &m.away_team);
        sse += (m.home_goals as f64 - h).powi(2) + (m.away_goals as f64 - a).powi(2);
        engine.berrar_update(m);
    }
    Ok(sse)
}

/// Grid search over the four learning rates (each drawn from `omega_values`),
/// holding α, β, γ at their values in `base`. Ties keep the earliest candidate
/// in lexicographic (oh, dh, oa, da) order.
pub fn tune_learning_rates(
    train: &Dataset,
    base: &BerrarConfig,
    omega_values: &[f64],
) -> Result<(BerrarConfig, f64)> {
    use rayon::prelude::*;

    if omega_values.is_empty() {
        return Err(Error::Empty("learning-rate grid"));
    }
    let mut candidates = Vec::new();
    for &oh in omega_values {
        for &dh in omega_values {
            for &oa in omega_values {
                for &da in omega_values {
                    candidates.push(BerrarConfig {
                        omega_oh: oh,
                        omega_dh: dh,
                        omega_oa: oa,
                        omega_da: da,
                        ..base.clone()
                    });
                }
            }
        }
    }
    let costs: Vec<f64> = candidates
        .par_iter()
        .map(|c| replay_squared_error(train, c))
        .collect::<Result<_>>()?;
    let (best, cost) = costs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bc), (i, &c)| if c < bc { (i, c) } else { (bi, bc) });
    Ok((candidates.swap_remove(best), cost))
}
