//! Flat `key = value` run configuration.
//!
//! Every hyperparameter has a documented key and a default. Files use one
//! `key = value` per line with `#` comments; later assignments win, so
//! command-line overrides are applied after the file. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::evaluate::{FoldBoundary, FoldSpec, ForecasterKind, Pipeline};
use crate::ratings::berrar::BerrarConfig;
use crate::ratings::elo::{default_importance_schedule, EloConfig, KMode};
use crate::ratings::gap::GapConfig;
use crate::ratings::pi::PiConfig;
use crate::ratings::EngineSpec;
use crate::simulate::{GoalModel, SimLeague};

/// Importance schedule entries are written `elo.importance.<label> = <base K>`.
const SCHEDULE_PREFIX: &str = "elo.importance.";

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("engine", "elo", "rating engine: elo, pi, berrar, gap"),
    ("forecaster", "ologit", "ologit, poisson, uniform, majority, odds"),
    ("seed", "42", "random seed"),
    ("elo.initial_rating", "1500", "rating of an unseen team"),
    ("elo.scale", "400", "logistic scale"),
    ("elo.base", "10", "logistic base"),
    ("elo.home_advantage", "0", "rating points added to the home side"),
    ("elo.k_mode", "fixed", "fixed, goal, international, club"),
    ("elo.k", "20", "K for k_mode=fixed"),
    ("elo.k0", "20", "K0 for k_mode=goal"),
    ("elo.lambda", "1", "exponent for k_mode=goal"),
    ("elo.k_base", "20", "base K for k_mode=club"),
    ("elo.importance", "", "importance label for k_mode=international"),
    ("pi.lambda", "0.035", "learning rate"),
    ("pi.gamma", "0.7", "cross-ground rate"),
    ("pi.b", "10", "expected-difference base"),
    ("pi.c", "3", "expected-difference scale"),
    ("berrar.alpha_h", "5", "maximum home expected goals"),
    ("berrar.alpha_a", "5", "maximum away expected goals"),
    ("berrar.beta_h", "1", "home slope"),
    ("berrar.beta_a", "1", "away slope"),
    ("berrar.gamma_h", "-0.85", "home bias"),
    ("berrar.gamma_a", "-1.27", "away bias"),
    ("berrar.omega_oh", "0.1", "home offense learning rate"),
    ("berrar.omega_dh", "0.1", "home defense learning rate"),
    ("berrar.omega_oa", "0.1", "away offense learning rate"),
    ("berrar.omega_da", "0.1", "away defense learning rate"),
    ("gap.lambda", "0.1", "learning rate"),
    ("gap.phi1", "0.5", "home-game share"),
    ("gap.phi2", "0.5", "away-game share"),
    ("gap.stat", "goals", "modeled statistic"),
    ("poisson.goal_cap", "15", "largest goal count on the score grid"),
    ("backtest.folds", "seasons", "seasons or blocks"),
    ("backtest.block_size", "100", "matches per fold when folds=blocks"),
    ("backtest.train_window", "0", "trailing training matches per fold, 0 for all"),
    ("sim.league", "SIM", "league code"),
    ("sim.teams", "20", "number of teams"),
    ("sim.seasons", "4", "number of seasons"),
    ("sim.strength_ratio", "4", "strongest over weakest true strength"),
    ("sim.home_factor", "1.3", "multiplicative home advantage"),
    ("sim.base_rate", "1.35", "goal rate between equal teams"),
    ("sim.kappa", "0.5", "strength exponent"),
    ("sim.odds_margin", "0", "bookmaker margin for synthetic odds, 0 for none"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.to_string()))
            .collect();
        Self { values }
    }
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let known = KEYS.iter().any(|(k, _, _)| *k == key)
            || (key.len() > SCHEDULE_PREFIX.len() && key.starts_with(SCHEDULE_PREFIX));
        if !known {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Parses a `key=value` assignment as given to `--set`.
    pub fn set_pair(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(k, v)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn str(&self, key: &str) -> &str {
        self.get(key).unwrap_or("")
    }

    fn num(&self, key: &str) -> Result<f64> {
        let raw = self.str(key);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Config(format!("`{key}` must be a number, got `{raw}`")))
    }

    fn int(&self, key: &str) -> Result<u64> {
        let raw = self.str(key);
        raw.parse::<u64>()
            .map_err(|_| Error::Config(format!("`{key}` must be a non-negative integer, got `{raw}`")))
    }

    pub fn seed(&self) -> Result<u64> {
        self.int("seed")
    }

    pub fn elo(&self) -> Result<EloConfig> {
        let k_mode = match self.str("elo.k_mode") {
            "fixed" => KMode::Fixed(self.num("elo.k")?),
            "goal" => KMode::GoalBased {
                k0: self.num("elo.k0")?,
                lambda: self.num("elo.lambda")?,
            },
            "international" => KMode::InternationalSchedule,
            "club" => KMode::ClubMultiplier(self.num("elo.k_base")?),
            other => return Err(Error::Config(format!("unknown elo.k_mode `{other}`"))),
        };
        let mut schedule = default_importance_schedule();
        for (k, _) in self.values.range(SCHEDULE_PREFIX.to_string()..) {
            let Some(label) = k.strip_prefix(SCHEDULE_PREFIX) else { break };
            schedule.insert(label.to_string(), self.num(k)?);
        }
        let importance = Some(self.str("elo.importance").to_string()).filter(|s| !s.is_empty());
        let cfg = EloConfig {
            initial_rating: self.num("elo.initial_rating")?,
            scale: self.num("elo.scale")?,
            base: self.num("elo.base")?,
            k_mode,
            home_advantage: self.num("elo.home_advantage")?,
            importance_schedule: schedule,
            importance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pi(&self) -> Result<PiConfig> {
        let cfg = PiConfig {
            lambda: self.num("pi.lambda")?,
            gamma: self.num("pi.gamma")?,
            b: self.num("pi.b")?,
            c: self.num("pi.c")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn berrar(&self) -> Result<BerrarConfig> {
        let cfg = BerrarConfig {
            alpha_h: self.num("berrar.alpha_h")?,
            alpha_a: self.num("berrar.alpha_a")?,
            beta_h: self.num("berrar.beta_h")?,
            beta_a: self.num("berrar.beta_a")?,
            gamma_h: self.num("berrar.gamma_h")?,
            gamma_a: self.num("berrar.gamma_a")?,
            omega_oh: self.num("berrar.omega_oh")?,
            omega_dh: self.num("berrar.omega_dh")?,
            omega_oa: self.num("berrar.omega_oa")?,
            omega_da: self.num("berrar.omega_da")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn gap(&self) -> Result<GapConfig> {
        let cfg = GapConfig {
            lambda: self.num("gap.lambda")?,
            phi1: self.num("gap.phi1")?,
            phi2: self.num("gap.phi2")?,
            stat: self.str("gap.stat").to_string(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn engine_named(&self, name: &str) -> Result<EngineSpec> {
        Ok(match name {
            "elo" => EngineSpec::Elo(self.elo()?),
            "pi" => EngineSpec::Pi(self.pi()?),
            "berrar" => EngineSpec::Berrar(self.berrar()?),
            "gap" => EngineSpec::Gap(self.gap()?),
            other => return Err(Error::Config(format!("unknown engine `{other}`"))),
        })
    }

    pub fn engine(&self) -> Result<EngineSpec> {
        self.engine_named(self.str("engine"))
    }

    pub fn forecaster_named(&self, name: &str) -> Result<ForecasterKind> {
        Ok(match name {
            "ologit" => ForecasterKind::OrderedLogit,
            "poisson" => {
                let cap = self.int("poisson.goal_cap")?;
                let goal_cap = u32::try_from(cap)
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| Error::Config(format!("poisson.goal_cap out of range: {cap}")))?;
                ForecasterKind::Poisson { goal_cap }
            }
            "uniform" => ForecasterKind::Uniform,
            "majority" => ForecasterKind::Majority,
            "odds" => ForecasterKind::Odds,
            other => return Err(Error::Config(format!("unknown forecaster `{other}`"))),
        })
    }

    pub fn pipeline(&self) -> Result<Pipeline> {
        Ok(Pipeline::new(self.engine()?, self.forecaster_named(self.str("forecaster"))?))
    }

    pub fn folds(&self) -> Result<FoldSpec> {
        let boundary = match self.str("backtest.folds") {
            "seasons" => FoldBoundary::Seasons,
            "blocks" => {
                let n = self.int("backtest.block_size")? as usize;
                if n == 0 {
                    return Err(Error::Config("backtest.block_size must be at least 1".into()));
                }
                FoldBoundary::Blocks(n)
            }
            other => return Err(Error::Config(format!("unknown backtest.folds `{other}`"))),
        };
        let w = self.int("backtest.train_window")? as usize;
        Ok(FoldSpec {
            boundary,
            train_window: (w > 0).then_some(w),
        })
    }

    pub fn sim_league(&self) -> Result<SimLeague> {
        let teams = self.int("sim.teams")? as usize;
        let seasons = self.int("sim.seasons")? as usize;
        let ratio = self.num("sim.strength_ratio")?;
        let mut sim = SimLeague::log_spaced(teams, ratio, seasons, self.seed()?)?;
        sim.league = self.str("sim.league").to_string();
        sim.home_factor = self.num("sim.home_factor")?;
        sim.goal_model = GoalModel {
            base_rate: self.num("sim.base_rate")?,
            kappa: self.num("sim.kappa")?,
        };
        let margin = self.num("sim.odds_margin")?;
        sim.odds_margin = (margin > 0.0).then_some(margin);
        sim.validate()?;
        Ok(sim)
    }
}

impl fmt::Display for Settings {
    /// The effective configuration in the same format [`Settings::apply_text`] reads.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
