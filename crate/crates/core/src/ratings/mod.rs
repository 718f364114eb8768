//! Sequential rating engines.
//!
//! Every engine is a single-writer state machine: feed it matches in canonical
//! temporal order through [`RatingEngine::update`]. Teams are initialized on
//! first sight (Elo at the configured initial rating, everything else at zero).

use serde::Serialize;

use crate::data::{Dataset, MatchRecord};
use crate::error::Result;

pub mod berrar;
pub mod elo;
pub mod gap;
pub mod pi;

pub use berrar::{BerrarConfig, BerrarRating, BerrarRatings};
pub use elo::{EloConfig, EloRatings, KMode};
pub use gap::{GapConfig, GapFit, GapGrid, GapRating, GapRatings};
pub use pi::{PiConfig, PiRating, PiRatings};

pub trait RatingEngine: Send {
    fn name(&self) -> &'static str;

    /// Applies one completed match.
    fn update(&mut self, m: &MatchRecord) -> Result<()>;

    /// Pre-match covariate on the engine's own scale, home minus away.
    fn rating_diff(&self, home: &str, away: &str) -> f64;

    /// Expected goals (home, away) for engines that model scoring directly.
    fn expected_goals(&self, _home: &str, _away: &str) -> Option<(f64, f64)> {
        None
    }

    /// Single overall strength used for ranking teams. `None` for unseen teams.
    fn strength(&self, team: &str) -> Option<f64>;

    /// Named state components of a team, e.g. `("home", 0.4), ("away", 0.1)`.
    fn components(&self, team: &str) -> Vec<(&'static str, f64)>;

    /// Rated teams, sorted.
    fn teams(&self) -> Vec<String>;
}

/// Engine choice plus its configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineSpec {
    Elo(EloConfig),
    Pi(PiConfig),
    Berrar(BerrarConfig),
    Gap(GapConfig),
}

impl EngineSpec {
    pub fn build(&self) -> Result<Box<dyn RatingEngine>> {
        Ok(match self {
            EngineSpec::Elo(c) => Box::new(EloRatings::new(c.clone())?),
            EngineSpec::Pi(c) => Box::new(PiRatings::new(c.clone())?),
            EngineSpec::Berrar(c) => Box::new(BerrarRatings::new(c.clone())?),
            EngineSpec::Gap(c) => Box::new(GapRatings::new(c.clone())?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EngineSpec::Elo(_) => "elo",
            EngineSpec::Pi(_) => "pi",
            EngineSpec::Berrar(_) => "berrar",
            EngineSpec::Gap(_) => "gap",
        }
    }
}

/// One line of a rating timeline export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineRow {
    pub date: String,
    pub league: String,
    pub team: String,
    pub engine: String,
    pub component_name: String,
    pub value: f64,
}

/// Replays `dataset` through `engine`, recording both teams' post-match state after every match.
pub fn rating_timeline(dataset: &Dataset, engine: &mut dyn RatingEngine) -> Result<Vec<TimelineRow>> {
    let mut rows = Vec::with_capacity(dataset.len() * 4);
    for m in dataset.iter() {
        engine.update(m)?;
        for team in [&m.home_team, &m.away_team] {
            for (name, value) in engine.components(team) {
                rows.push(TimelineRow {
                    date: m.date.to_string(),
                    league: m.league.clone(),
                    team: team.clone(),
                    engine: engine.name().to_string(),
                    component_name: name.to_string(),
                    value,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_timeline_csv(rows: &[TimelineRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r)?;
    }
    if rows.is_empty() {
        wtr.write_record(["date", "league", "team", "engine", "component_name", "value"])?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
