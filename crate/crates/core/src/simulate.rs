//! Synthetic leagues with known team strengths.
//!
//! Goals are independent Poisson draws. The random stream is ChaCha8 seeded
//! through `seed_from_u64`, so a seed fixes every generated byte.

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::data::{canonical_sort, Dataset, MatchRecord, OddsTriple};
use crate::error::{Error, Result};
use crate::forecast::{poisson_outcome, DEFAULT_GOAL_CAP};

/// First match day of the first simulated season.
const SEASON_START: (i32, u32, u32) = (2001, 8, 4);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalModel {
    /// Expected goals between equal teams without home advantage.
    pub base_rate: f64,
    /// Exponent on the strength ratio.
    pub kappa: f64,
}

impl Default for GoalModel {
    fn default() -> Self {
        Self {
            base_rate: 1.35,
            kappa: 0.5,
        }
    }
}

impl GoalModel {
    /// `(μ_H, μ_A)` for a fixture.
    pub fn means(&self, strength_home: f64, strength_away: f64, home_factor: f64) -> (f64, f64) {
        let ratio = strength_home / strength_away;
        (
            self.base_rate * home_factor * ratio.powf(self.kappa),
            self.base_rate * ratio.powf(-self.kappa),
        )
    }
}

pub fn sample_match(
    strength_home: f64,
    strength_away: f64,
    home_factor: f64,
    model: &GoalModel,
    rng: &mut ChaCha8Rng,
) -> (u32, u32) {
    let (mh, ma) = model.means(strength_home, strength_away, home_factor);
    (draw_poisson(mh, rng), draw_poisson(ma, rng))
}

fn draw_poisson(mean: f64, rng: &mut ChaCha8Rng) -> u32 {
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as u32,
        Err(_) => 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLeague {
    pub league: String,
    /// `(team, true strength)`.
    pub teams: Vec<(String, f64)>,
    pub home_factor: f64,
    pub seasons: usize,
    pub seed: u64,
    pub goal_model: GoalModel,
    /// Bookmaker margin for synthetic odds; `None` leaves odds out.
    pub odds_margin: Option<f64>,
}

impl SimLeague {
    /// `n` teams with strengths evenly spaced in log space from 1 to `ratio`.
    pub fn log_spaced(n: usize, ratio: f64, seasons: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("a league needs at least two teams"));
        }
        if !(ratio.is_finite() && ratio >= 1.0) {
            return Err(Error::domain(format!("strength ratio must be at least 1, got {ratio}")));
        }
        let teams = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (format!("team{:02}", i + 1), ratio.powf(t))
            })
            .collect();
        Ok(Self {
            league: "SIM".into(),
            teams,
            home_factor: 1.3,
            seasons,
            seed,
            goal_model: GoalModel::default(),
            odds_margin: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.teams.len() < 2 {
            return Err(Error::domain("a league needs at least two teams"));
        }
        if let Some((t, s)) = self.teams.iter().find(|(_, s)| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::domain(format!("strength of {t} must be positive, got {s}")));
        }
        let mut names: Vec<_> = self.teams.iter().map(|(t, _)| t.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.teams.len() {
            return Err(Error::domain("team names must be unique"));
        }
        if !(self.home_factor.is_finite() && self.home_factor >= 1.0) {
            return Err(Error::domain(format!("home factor must be at least 1, got {}", self.home_factor)));
        }
        let g = &self.goal_model;
        if !(g.base_rate.is_finite() && g.base_rate > 0.0 && g.kappa.is_finite()) {
            return Err(Error::domain("goal model needs a positive base rate and finite kappa"));
        }
        if let Some(m) = self.odds_margin {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::domain(format!("odds margin must be non-negative, got {m}")));
            }
        }
        Ok(())
    }
}

/// Rounds of a double round robin: the circle method for the first half, then
/// the same rounds with venues swapped. Every ordered pair appears exactly once.
pub fn double_round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut slots: Vec<Option<usize>> = (0..n).map(Some).collect();
    if n % 2 == 1 {
        slots.push(None);
    }
    let m = slots.len();
    let mut first = Vec::with_capacity(m - 1);
    for round in 0..m - 1 {
        let mut pairs = Vec::with_capacity(m / 2);
        for i in 0..m / 2 {
            if let (Some(a), Some(b)) = (slots[i], slots[m - 1 - i]) {
                // Alternate venues so nobody hosts every first-half game.
                pairs.push(if (round + i) % 2 == 0 { (a, b) } else { (b, a) });
            }
        }
        first.push(pairs);
        slots[1..].rotate_right(1);
    }
    let second: Vec<_> = first
        .iter()
        .map(|r| r.iter().map(|&(h, a)| (a, h)).collect())
        .collect();
    first.into_iter().chain(second).collect()
}

fn season_name(year: i32) -> String {
    format!("{}-{:02}", year, (year + 1) % 100)
}

/// Generates `sim.seasons` double round robins, one round per week, each season
/// starting a year after the previous one. Returns the canonical dataset and
/// the truth table `(team, true strength)`.
pub fn gen_league(sim: &SimLeague) -> Result<(Dataset, Vec<(String, f64)>)> {
    sim.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let rounds = double_round_robin(sim.teams.len());
    let (y, mo, d) = SEASON_START;
    let mut matches = Vec::with_capacity(sim.seasons * sim.teams.len() * (sim.teams.len() - 1));
    for season in 0..sim.seasons {
        let year = y + season as i32;
        let start = NaiveDate::from_ymd_opt(year, mo, d).expect("valid start date");
        let label = season_name(year);
        for (r, round) in rounds.iter().enumerate() {
            let date = start + Days::new(7 * r as u64);
            for &(h, a) in round {
                let (ht, hs) = &sim.teams[h];
                let (at, as_) = &sim.teams[a];
                let (hg, ag) = sample_match(*hs, *as_, sim.home_factor, &sim.goal_model, &mut rng);
                let mut m = MatchRecord::new(&label, &sim.league, date, ht, at, hg, ag);
                m.source_index = matches.len();
                if let Some(margin) = sim.odds_margin {
                    let (mh, ma) = sim.goal_model.means(*hs, *as_, sim.home_factor);
                    let p = poisson_outcome(mh.min(8.0), ma.min(8.0), DEFAULT_GOAL_CAP)?;
                    let odd = |q: f64| (1.0 / (q * (1.0 + margin))).max(1.01);
                    m.odds = Some(OddsTriple::new(odd(p.home), odd(p.draw), odd(p.away))?);
                }
                matches.push(m);
            }
        }
    }
    let truth = sim
        .teams
        .iter()
        .map(|(t, s)| (crate::data::normalize_team(t), *s))
        .collect();
    Ok((canonical_sort(Dataset::new(matches)), truth))
}

pub fn write_truth_csv(truth: &[(String, f64)]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["team", "true_strength"])?;
    for (t, s) in truth {
        wtr.write_record([t.as_str(), &s.to_string()])?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation, ties receiving average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("spearman needs two equal-length series of at least two values"));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("spearman of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
