//! Match records, source parsers and the canonical dataset file.
//!
//! Two vendor formats are understood: the Open International Soccer Database
//! export (`Sea,Lge,Date,HT,AT,HS,AS,GD,WDL`) and football-data.co.uk season
//! files. Both are parsed into [`MatchRecord`]s, which can then be persisted in
//! the versioned canonical format so downstream tools never touch vendor CSVs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every canonical dataset file.
pub const CANONICAL_HEADER: &str = "pitchrater-dataset v1";

/// Consecutive matches of one league season further apart than this are reported as a date gap.
pub const DATE_GAP_DAYS: i64 = 180;

const OISDB_COLUMNS: [&str; 9] = ["Sea", "Lge", "Date", "HT", "AT", "HS", "AS", "GD", "WDL"];

/// Match result from the home team's point of view. Ordered `AwayWin < Draw < HomeWin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    AwayWin,
    Draw,
    HomeWin,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin];

    pub fn from_goal_diff(goal_diff: i32) -> Self {
        match goal_diff.signum() {
            1 => Outcome::HomeWin,
            0 => Outcome::Draw,
            _ => Outcome::AwayWin,
        }
    }

    /// Position in a `(home, draw, away)` probability vector.
    pub fn index(self) -> usize {
        match self {
            Outcome::HomeWin => 0,
            Outcome::Draw => 1,
            Outcome::AwayWin => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Outcome::ALL.get(index).copied()
    }

    pub fn one_hot(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    pub fn letter(self) -> char {
        match self {
            Outcome::HomeWin => 'H',
            Outcome::Draw => 'D',
            Outcome::AwayWin => 'A',
        }
    }

    /// League points earned by the home (`true`) or away side.
    pub fn points(self, home: bool) -> u8 {
        match (self, home) {
            (Outcome::Draw, _) => 1,
            (Outcome::HomeWin, true) | (Outcome::AwayWin, false) => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::HomeWin => "HomeWin",
            Outcome::Draw => "Draw",
            Outcome::AwayWin => "AwayWin",
        };
        f.write_str(s)
    }
}

/// Decimal odds for the three outcomes; every price is strictly above 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsTriple {
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

impl OddsTriple {
    pub fn new(home: f64, draw: f64, away: f64) -> Result<Self> {
        for (name, v) in [("home", home), ("draw", draw), ("away", away)] {
            if !v.is_finite() || v <= 1.0 {
                return Err(Error::domain(format!(
                    "{name} odds must be a finite decimal price above 1.0, got {v}"
                )));
            }
        }
        Ok(Self { home, draw, away })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.home, self.draw, self.away]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub season: String,
    pub league: String,
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
    pub goal_diff: i32,
    pub result: Outcome,
    pub odds: Option<OddsTriple>,
    /// Named match statistics, e.g. `shots_on_target_home`.
    pub stats: BTreeMap<String, f64>,
    /// Row position in the source file; breaks ties between same-date matches.
    pub source_index: usize,
}

impl MatchRecord {
    /// Builds a record with `goal_diff` and `result` derived from the score.
    /// Team names are normalized.
    pub fn new(
        season: impl Into<String>,
        league: impl Into<String>,
        date: NaiveDate,
        home_team: &str,
        away_team: &str,
        home_goals: u32,
        away_goals: u32,
    ) -> Self {
        let goal_diff = home_goals as i32 - away_goals as i32;
        Self {
            season: season.into(),
            league: league.into(),
            date,
            home_team: normalize_team(home_team),
            away_team: normalize_team(away_team),
            home_goals,
            away_goals,
            goal_diff,
            result: Outcome::from_goal_diff(goal_diff),
            odds: None,
            stats: BTreeMap::new(),
            source_index: 0,
        }
    }

    /// Stable identifier used in reports: `date|league|home|away`.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.date, self.league, self.home_team, self.away_team
        )
    }

    pub fn goal_margin(&self) -> u32 {
        self.goal_diff.unsigned_abs()
    }

    /// Home/away values of a statistic. `goals` maps to the final score;
    /// any other name `x` reads `x_home` and `x_away` from [`MatchRecord::stats`].
    pub fn stat_pair(&self, name: &str) -> Option<(f64, f64)> {
        if name == "goals" {
            return Some((self.home_goals as f64, self.away_goals as f64));
        }
        let h = self.stats.get(&format!("{name}_home"))?;
        let a = self.stats.get(&format!("{name}_away"))?;
        Some((*h, *a))
    }

    /// Checks the record invariants, returning a description of the first violation.
    pub fn check(&self) -> Option<String> {
        if self.goal_diff != self.home_goals as i32 - self.away_goals as i32 {
            return Some(format!(
                "goal difference {} does not match score {}-{}",
                self.goal_diff, self.home_goals, self.away_goals
            ));
        }
        if self.result != Outcome::from_goal_diff(self.goal_diff) {
            return Some(format!(
                "result {} does not match goal difference {}",
                self.result, self.goal_diff
            ));
        }
        if self.home_team == self.away_team {
            return Some(format!("team `{}` plays itself", self.home_team));
        }
        None
    }
}

/// Trims whitespace and case-folds a team name.
pub fn normalize_team(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub matches: Vec<MatchRecord>,
    sorted: bool,
}

impl Dataset {
    pub fn new(matches: Vec<MatchRecord>) -> Self {
        Self {
            matches,
            sorted: false,
        }
    }

    /// True once [`canonical_sort`] has been applied.
    pub fn is_canonical(&self) -> bool {
        self.sorted
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MatchRecord> {
        self.matches.iter()
    }

    pub fn has_odds(&self) -> bool {
        !self.matches.is_empty() && self.matches.iter().all(|m| m.odds.is_some())
    }

    /// League labels in order of first appearance.
    pub fn leagues(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for m in &self.matches {
            if seen.insert(m.league.as_str()) {
                out.push(m.league.clone());
            }
        }
        out
    }

    /// A canonical sub-dataset of contiguous matches. Used by splitters, which
    /// only ever take order-preserving slices of a sorted dataset.
    pub(crate) fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset {
            matches: self.matches[range].to_vec(),
            sorted: self.sorted,
        }
    }

    fn in_canonical_order(&self) -> bool {
        self.matches
            .windows(2)
            .all(|w| sort_key(&w[0]) <= sort_key(&w[1]))
    }
}

fn sort_key(m: &MatchRecord) -> (NaiveDate, &str, usize) {
    (m.date, m.league.as_str(), m.source_index)
}

/// Stable sort by `(date, league, source_index)`.
pub fn canonical_sort(mut dataset: Dataset) -> Dataset {
    dataset
        .matches
        .sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    dataset.sorted = true;
    dataset
}

/// A row-level problem found while parsing. The offending row is not in the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Result of a lenient parse: the clean records plus everything that was rejected.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub dataset: Dataset,
    pub findings: Vec<Finding>,
    pub unmapped_columns: Vec<String>,
}

impl Parsed {
    fn into_strict(self) -> Result<Dataset> {
        match self.findings.into_iter().next() {
            Some(f) => Err(Error::Validation {
                line: f.line,
                message: f.message,
            }),
            None => Ok(self.dataset),
        }
    }
}

/// Accepts ISO-8601 (`2000-08-19`) and `DD/MM/YY` / `DD/MM/YYYY`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| {
            // %Y would happily read "00" as year 0, so pick by length.
            let year_part = s.rsplit('/').next().unwrap_or("");
            if year_part.len() == 2 {
                NaiveDate::parse_from_str(s, "%d/%m/%y")
            } else {
                NaiveDate::parse_from_str(s, "%d/%m/%Y")
            }
        })
        .ok()
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        Self { index }
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn field(rec: &csv::StringRecord, idx: usize) -> &str {
    rec.get(idx).unwrap_or("").trim()
}

fn parse_err(line: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_goals(rec: &csv::StringRecord, idx: usize, line: usize, column: &str) -> Result<u32> {
    let raw = field(rec, idx);
    // Some exports write goals as floats ("2.0").
    raw.parse::<u32>()
        .ok()
        .or_else(|| {
            raw.parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0 && v.fract() == 0.0 && *v < u32::MAX as f64)
                .map(|v| v as u32)
        })
        .ok_or_else(|| parse_err(line, column, format!("`{raw}` is not a non-negative integer")))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes())
}

/// Strict OISDB parse: any inconsistent row is an error.
pub fn parse_oisdb(text: &str) -> Result<Dataset> {
    parse_oisdb_lenient(text)?.into_strict()
}

/// OISDB parse that drops rows violating record invariants and reports them.
/// Malformed fields (unparseable dates or numbers) are still fatal.
pub fn parse_oisdb_lenient(text: &str) -> Result<Parsed> {
    let mut rdr = reader(text);
    let cols = Columns::new(rdr.headers()?);
    let idx: Vec<usize> = OISDB_COLUMNS
        .iter()
        .map(|c| cols.require(c))
        .collect::<Result<_>>()?;
    let [sea, lge, date, ht, at, hs, as_, gd, wdl] = idx[..] else {
        unreachable!()
    };

    let mut matches = Vec::new();
    let mut findings = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let d = parse_date(field(&rec, date))
            .ok_or_else(|| parse_err(line, "Date", format!("unparseable date `{}`", field(&rec, date))))?;
        let hg = parse_goals(&rec, hs, line, "HS")?;
        let ag = parse_goals(&rec, as_, line, "AS")?;
        let gd_raw = field(&rec, gd);
        let gd_val: i32 = gd_raw
            .parse()
            .map_err(|_| parse_err(line, "GD", format!("`{gd_raw}` is not an integer")))?;
        let wdl_raw = field(&rec, wdl);
        let stated = match wdl_raw {
            "W" => Outcome::HomeWin,
            "D" => Outcome::Draw,
            "L" => Outcome::AwayWin,
            other => return Err(parse_err(line, "WDL", format!("expected W, D or L, got `{other}`"))),
        };

        let mut m = MatchRecord::new(
            field(&rec, sea),
            field(&rec, lge),
            d,
            field(&rec, ht),
            field(&rec, at),
            hg,
            ag,
        );
        m.source_index = row;
        if gd_val != m.goal_diff {
            findings.push(Finding {
                line,
                message: format!("GD {gd_val} contradicts score {hg}-{ag}"),
            });
            continue;
        }
        if stated != m.result {
            findings.push(Finding {
                line,
                message: format!("WDL `{wdl_raw}` contradicts score {hg}-{ag}"),
            });
            continue;
        }
        if let Some(msg) = m.check() {
            findings.push(Finding { line, message: msg });
            continue;
        }
        matches.push(m);
    }
    Ok(Parsed {
        dataset: Dataset::new(matches),
        findings,
        unmapped_columns: Vec::new(),
    })
}

/// Odds providers tried in order; the first with all three prices present wins.
const ODDS_PROVIDERS: [&str; 9] = ["B365", "Avg", "PS", "BW", "IW", "WH", "VC", "LB", "BbAv"];

const FD_STATS: [(&str, &str); 14] = [
    ("HS", "shots_home"),
    ("AS", "shots_away"),
    ("HST", "shots_on_target_home"),
    ("AST", "shots_on_target_away"),
    ("HF", "fouls_home"),
    ("AF", "fouls_away"),
    ("HC", "corners_home"),
    ("AC", "corners_away"),
    ("HY", "yellow_cards_home"),
    ("AY", "yellow_cards_away"),
    ("HR", "red_cards_home"),
    ("AR", "red_cards_away"),
    ("HTHG", "half_time_goals_home"),
    ("HTAG", "half_time_goals_away"),
];

const FD_KNOWN: [&str; 11] = [
    "Div", "Date", "Time", "HomeTeam", "AwayTeam", "FTHG", "FTAG", "FTR", "HTR", "Referee",
    "Season",
];

/// Season label for a date, assuming seasons run July to June: `2022-23`.
pub fn season_label(date: NaiveDate) -> String {
    use chrono::Datelike;
    let start = if date.month() >= 7 {
        date.year()
    } else {
        date.year() - 1
    };
    format!("{}-{:02}", start, (start + 1).rem_euclid(100))
}

/// Strict football-data.co.uk parse.
pub fn parse_footballdata(text: &str) -> Result<Dataset> {
    parse_footballdata_lenient(text)?.into_strict()
}

pub fn parse_footballdata_lenient(text: &str) -> Result<Parsed> {
    let mut rdr = reader(text);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(&headers);
    let date = cols.require("Date")?;
    let home = cols.require("HomeTeam")?;
    let away = cols.require("AwayTeam")?;
    let fthg = cols.require("FTHG")?;
    let ftag = cols.require("FTAG")?;
    let ftr = cols.require("FTR")?;
    let div = cols.get("Div");
    let season = cols.get("Season");

    let providers: Vec<(&str, [usize; 3])> = ODDS_PROVIDERS
        .iter()
        .filter_map(|p| {
            let h = cols.get(&format!("{p}H"))?;
            let d = cols.get(&format!("{p}D"))?;
            let a = cols.get(&format!("{p}A"))?;
            Some((*p, [h, d, a]))
        })
        .collect();
    let stat_cols: Vec<(usize, &str)> = FD_STATS
        .iter()
        .filter_map(|(c, name)| cols.get(c).map(|i| (i, *name)))
        .collect();

    let mut unmapped: Vec<String> = headers
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .filter(|h| {
            !h.is_empty()
                && !FD_KNOWN.contains(&h.as_str())
                && !FD_STATS.iter().any(|(c, _)| c == h)
                && !ODDS_PROVIDERS.iter().any(|p| {
                    h.strip_prefix(p)
                        .is_some_and(|rest| matches!(rest, "H" | "D" | "A"))
                })
        })
        .collect();
    unmapped.sort();

    let mut matches = Vec::new();
    let mut findings = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let d = parse_date(field(&rec, date))
            .ok_or_else(|| parse_err(line, "Date", format!("unparseable date `{}`", field(&rec, date))))?;
        let hg = parse_goals(&rec, fthg, line, "FTHG")?;
        let ag = parse_goals(&rec, ftag, line, "FTAG")?;
        let stated = match field(&rec, ftr) {
            "H" => Outcome::HomeWin,
            "D" => Outcome::Draw,
            "A" => Outcome::AwayWin,
            other => return Err(parse_err(line, "FTR", format!("expected H, D or A, got `{other}`"))),
        };
        let season_txt = season
            .map(|i| field(&rec, i).to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| season_label(d));
        let league = div.map(|i| field(&rec, i)).unwrap_or("").to_string();

        let mut m = MatchRecord::new(season_txt, league, d, field(&rec, home), field(&rec, away), hg, ag);
        m.source_index = row;
        if stated != m.result {
            findings.push(Finding {
                line,
                message: format!("FTR `{}` contradicts score {hg}-{ag}", stated.letter()),
            });
            continue;
        }
        if let Some(msg) = m.check() {
            findings.push(Finding { line, message: msg });
            continue;
        }

        let mut odds_problem = None;
        for (name, [hi, di, ai]) in &providers {
            let raw = [field(&rec, *hi), field(&rec, *di), field(&rec, *ai)];
            if raw.iter().any(|s| s.is_empty()) {
                continue;
            }
            let mut prices = [0.0; 3];
            for (k, s) in raw.iter().enumerate() {
                match s.parse::<f64>() {
                    Ok(v) => prices[k] = v,
                    Err(_) => {
                        let col = format!("{name}{}", ['H', 'D', 'A'][k]);
                        return Err(parse_err(line, &col, format!("`{s}` is not a number")));
                    }
                }
            }
            match OddsTriple::new(prices[0], prices[1], prices[2]) {
                Ok(o) => m.odds = Some(o),
                Err(e) => odds_problem = Some(format!("{name} odds: {e}")),
            }
            break;
        }
        if let Some(message) = odds_problem {
            findings.push(Finding { line, message });
            continue;
        }

        for (i, name) in &stat_cols {
            let s = field(&rec, *i);
            if s.is_empty() {
                continue;
            }
            match s.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => {
                    m.stats.insert((*name).to_string(), v);
                }
                _ => {
                    let col = FD_STATS.iter().find(|(_, n)| n == name).map(|(c, _)| *c).unwrap_or(name);
                    return Err(parse_err(line, col, format!("`{s}` is not a non-negative number")));
                }
            }
        }
        matches.push(m);
    }
    Ok(Parsed {
        dataset: Dataset::new(matches),
        findings,
        unmapped_columns: unmapped,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes a dataset to the canonical text format.
pub fn write_canonical(dataset: &Dataset) -> Result<String> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for m in &dataset.matches {
        let stats = m
            .stats
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        wtr.write_record([
            m.season.as_str(),
            m.league.as_str(),
            &m.date.format("%Y-%m-%d").to_string(),
            m.home_team.as_str(),
            m.away_team.as_str(),
            &m.home_goals.to_string(),
            &m.away_goals.to_string(),
            &fmt_opt(m.odds.map(|o| o.home)),
            &fmt_opt(m.odds.map(|o| o.draw)),
            &fmt_opt(m.odds.map(|o| o.away)),
            &stats,
        ])?;
    }
    let body = String::from_utf8(wtr.into_inner().map_err(|e| e.into_error())?)
        .expect("csv writer emits utf-8 for utf-8 input");
    Ok(format!("{CANONICAL_HEADER}\n{body}"))
}

/// Reads a canonical dataset file. The result is flagged canonical when its
/// records are already in canonical order.
pub fn read_canonical(text: &str) -> Result<Dataset> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end_matches('\r') != CANONICAL_HEADER {
        return Err(parse_err(
            1,
            "header",
            format!("expected `{CANONICAL_HEADER}`, found `{first}`"),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let mut matches = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != 11 {
            return Err(parse_err(line, "record", format!("expected 11 fields, found {}", rec.len())));
        }
        let date = parse_date(&rec[2]).ok_or_else(|| parse_err(line, "date", "unparseable date"))?;
        let hg = parse_goals(&rec, 5, line, "hg")?;
        let ag = parse_goals(&rec, 6, line, "ag")?;
        let mut m = MatchRecord::new(&rec[0], &rec[1], date, &rec[3], &rec[4], hg, ag);
        m.source_index = row;
        let odds_raw = [&rec[7], &rec[8], &rec[9]];
        if odds_raw.iter().all(|s| !s.is_empty()) {
            let mut p = [0.0; 3];
            for (k, s) in odds_raw.iter().enumerate() {
                p[k] = s
                    .parse()
                    .map_err(|_| parse_err(line, ["odds_h", "odds_d", "odds_a"][k], "not a number"))?;
            }
            m.odds = Some(OddsTriple::new(p[0], p[1], p[2]).map_err(|e| Error::Validation {
                line,
                message: e.to_string(),
            })?);
        } else if odds_raw.iter().any(|s| !s.is_empty()) {
            return Err(parse_err(line, "odds_h", "partial odds triple"));
        }
        for pair in rec[10].split(';').filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| parse_err(line, "stats", format!("`{pair}` is not name=value")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(line, "stats", format!("`{v}` is not a number")))?;
            m.stats.insert(k.to_string(), v);
        }
        if let Some(msg) = m.check() {
            return Err(Error::Validation { line, message: msg });
        }
        matches.push(m);
    }
    let mut ds = Dataset::new(matches);
    ds.sorted = ds.in_canonical_order();
    Ok(ds)
}

/// Per-rule violation counts from [`validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub result_goal_mismatch: usize,
    pub duplicate_fixtures: usize,
    pub date_gaps: usize,
    pub self_play: usize,
    pub invalid_odds: usize,
    pub details: Vec<String>,
}

impl ValidationReport {
    pub fn total(&self) -> usize {
        self.result_goal_mismatch
            + self.duplicate_fixtures
            + self.date_gaps
            + self.self_play
            + self.invalid_odds
    }

    pub fn is_clean(&self) -> bool {
        self.total() == 0
    }
}

pub fn validate(dataset: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for m in &dataset.matches {
        if m.goal_diff != m.home_goals as i32 - m.away_goals as i32
            || m.result != Outcome::from_goal_diff(m.goal_diff)
        {
            report.result_goal_mismatch += 1;
            report.details.push(format!("{}: result/goal mismatch", m.key()));
        }
        if m.home_team == m.away_team {
            report.self_play += 1;
            report.details.push(format!("{}: self-play", m.key()));
        }
        if let Some(o) = m.odds {
            if OddsTriple::new(o.home, o.draw, o.away).is_err() {
                report.invalid_odds += 1;
                report.details.push(format!("{}: invalid odds", m.key()));
            }
        }
        if !seen.insert((m.date, m.league.as_str(), m.home_team.as_str(), m.away_team.as_str())) {
            report.duplicate_fixtures += 1;
            report.details.push(format!("{}: duplicate fixture", m.key()));
        }
    }

    // Off-season breaks are expected, so gaps are measured within a season.
    let mut by_season: BTreeMap<(&str, &str), Vec<NaiveDate>> = BTreeMap::new();
    for m in &dataset.matches {
        by_season.entry((&m.league, &m.season)).or_default().push(m.date);
    }
    for ((league, season), mut dates) in by_season {
        dates.sort();
        for w in dates.windows(2) {
            let gap = (w[1] - w[0]).num_days();
            if gap > DATE_GAP_DAYS {
                report.date_gaps += 1;
                report
                    .details
                    .push(format!("{league} {season}: {gap}-day gap between {} and {}", w[0], w[1]));
            }
        }
    }
    report
}
