//! Independent reference computations checked against the library.

use std::collections::HashMap;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pitchrater::data::{canonical_sort, parse_footballdata_lenient, parse_oisdb, parse_oisdb_lenient};
use pitchrater::evaluate::{
    aggregate_report, read_rows_csv, walk_forward, write_rows_csv, FoldBoundary, FoldSpec, ForecasterKind, Pipeline,
};
use pitchrater::forecast::{ologit_fit, poisson_outcome, OrderedLogitModel};
use pitchrater::ratings::elo::EloConfig;
use pitchrater::ratings::gap::{gap_fit, GapGrid};
use pitchrater::ratings::EngineSpec;
use pitchrater::simulate::{gen_league, sample_match, GoalModel, SimLeague};
use pitchrater::{Dataset, MatchRecord, Outcome};

fn day(n: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 8, 1).unwrap() + Days::new(n)
}

// ---------- GAP ----------

/// Straight transcription of the eight clamped updates and the absolute cost.
fn reference_gap_cost(matches: &[(String, String, f64, f64, bool)], lambda: f64, phi1: f64, phi2: f64) -> f64 {
    // [home attack, home defense, away attack, away defense]
    let mut r: HashMap<String, [f64; 4]> = HashMap::new();
    let mut cost = 0.0;
    for (h, a, sh, sa, skip) in matches {
        let hi = r.get(h).copied().unwrap_or([0.0; 4]);
        let aj = r.get(a).copied().unwrap_or([0.0; 4]);
        let eh = (hi[0] + aj[3]) / 2.0;
        let ea = (aj[2] + hi[1]) / 2.0;
        if !skip {
            cost += (sh - eh).abs() + (sa - ea).abs();
        }
        let clamp = |v: f64| v.max(0.0);
        let ni = [
            clamp(hi[0] + lambda * phi1 * (sh - eh)),
            clamp(hi[1] + lambda * phi1 * (sa - ea)),
            clamp(hi[2] + lambda * (1.0 - phi1) * (sh - eh)),
            clamp(hi[3] + lambda * (1.0 - phi1) * (sa - ea)),
        ];
        let nj = [
            clamp(aj[0] + lambda * (1.0 - phi2) * (sa - ea)),
            clamp(aj[1] + lambda * (1.0 - phi2) * (sh - eh)),
            clamp(aj[2] + lambda * phi2 * (sa - ea)),
            clamp(aj[3] + lambda * phi2 * (sh - eh)),
        ];
        r.insert(h.clone(), ni);
        r.insert(a.clone(), nj);
    }
    cost
}

fn round_robin_dataset(teams: usize, seasons: usize, stat: impl Fn(usize, usize, usize) -> (u32, u32)) -> Dataset {
    let mut matches = Vec::new();
    let mut d = 0;
    for s in 0..seasons {
        for h in 0..teams {
            for a in 0..teams {
                if h == a {
                    continue;
                }
                let (hg, ag) = stat(s, h, a);
                let mut m = MatchRecord::new(format!("S{s}"), "L", day(d), &format!("t{h}"), &format!("t{a}"), hg, ag);
                m.source_index = matches.len();
                matches.push(m);
                d += 1;
            }
        }
    }
    canonical_sort(Dataset::new(matches))
}

fn reference_exclusions(ds: &Dataset, edge: usize) -> Vec<bool> {
    let mut per_team: HashMap<(String, String), Vec<usize>> = HashMap::new();
    for (i, m) in ds.iter().enumerate() {
        per_team.entry((m.season.clone(), m.home_team.clone())).or_default().push(i);
        per_team.entry((m.season.clone(), m.away_team.clone())).or_default().push(i);
    }
    ds.iter()
        .enumerate()
        .map(|(i, m)| {
            let games = &per_team[&(m.season.clone(), m.home_team.clone())];
            let pos = games.iter().position(|&g| g == i).unwrap();
            pos < edge || pos >= games.len() - edge
        })
        .collect()
}

fn gap_rows(ds: &Dataset, edge: usize) -> Vec<(String, String, f64, f64, bool)> {
    ds.iter()
        .zip(reference_exclusions(ds, edge))
        .map(|(m, skip)| (m.home_team.clone(), m.away_team.clone(), m.home_goals as f64, m.away_goals as f64, skip))
        .collect()
}

#[test]
fn gap_fit_matches_brute_force_on_constant_league() {
    let ds = round_robin_dataset(6, 2, |_, _, _| (2, 2));
    let grid = GapGrid {
        lambdas: vec![0.05, 0.1, 0.3, 0.6],
        phi1s: vec![0.25, 0.5, 1.0],
        phi2s: vec![0.25, 0.75],
    };
    let fit = gap_fit(&ds, &grid, "goals", 2).unwrap();
    let rows = gap_rows(&ds, 2);
    let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
    for &l in &grid.lambdas {
        for &p1 in &grid.phi1s {
            for &p2 in &grid.phi2s {
                let c = reference_gap_cost(&rows, l, p1, p2);
                if c < best.0 {
                    best = (c, (l, p1, p2));
                }
            }
        }
    }
    assert!((fit.cost - best.0).abs() < 1e-9, "{} vs {}", fit.cost, best.0);
    assert_eq!((fit.lambda, fit.phi1, fit.phi2), best.1);
    // A constant statistic is learned fastest by the largest step.
    assert_eq!(fit.lambda, 0.6);
}

#[test]
fn gap_fit_two_candidates_and_single_point() {
    let ds = round_robin_dataset(5, 2, |s, h, a| (((s + 2 * h + a) % 4) as u32, ((h * a + s) % 3) as u32));
    let rows = gap_rows(&ds, 1);
    let a = (0.05, 0.5, 0.5);
    let b = (0.9, 0.1, 0.9);
    let ca = reference_gap_cost(&rows, a.0, a.1, a.2);
    let cb = reference_gap_cost(&rows, b.0, b.1, b.2);
    let fit_a = gap_fit(&ds, &GapGrid { lambdas: vec![a.0], phi1s: vec![a.1], phi2s: vec![a.2] }, "goals", 1).unwrap();
    assert!((fit_a.cost - ca).abs() < 1e-9);
    let fit_b = gap_fit(&ds, &GapGrid { lambdas: vec![b.0], phi1s: vec![b.1], phi2s: vec![b.2] }, "goals", 1).unwrap();
    assert!((fit_b.cost - cb).abs() < 1e-9);
    assert_ne!(ca, cb);
    // Two candidates differing only in lambda: the cheaper one must come back.
    let (l1, l2) = (0.05, 0.9);
    let c1 = reference_gap_cost(&rows, l1, 0.5, 0.5);
    let c2 = reference_gap_cost(&rows, l2, 0.5, 0.5);
    let fit = gap_fit(&ds, &GapGrid { lambdas: vec![l2, l1], phi1s: vec![0.5], phi2s: vec![0.5] }, "goals", 1).unwrap();
    assert_eq!(fit.lambda, if c1 < c2 { l1 } else { l2 });
    assert!((fit.cost - c1.min(c2)).abs() < 1e-9);
}

#[test]
fn gap_fit_errors_name_missing_stat() {
    let ds = round_robin_dataset(3, 1, |_, _, _| (1, 0));
    let grid = GapGrid { lambdas: vec![0.1], phi1s: vec![0.5], phi2s: vec![0.5] };
    let err = gap_fit(&ds, &grid, "corners", 6).unwrap_err().to_string();
    assert!(err.contains("corners") && err.contains("t0"), "{err}");
}

// ---------- ordered logit ----------

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn reference_ll(samples: &[(f64, Outcome)], beta: f64, c1: f64, c2: f64) -> f64 {
    if c2 <= c1 {
        return f64::NEG_INFINITY;
    }
    samples
        .iter()
        .map(|&(x, y)| {
            let a = sigmoid(c1 - beta * x);
            let b = sigmoid(c2 - beta * x);
            match y {
                Outcome::AwayWin => a.ln(),
                Outcome::Draw => (b - a).ln(),
                Outcome::HomeWin => (1.0 - b).ln(),
            }
        })
        .sum()
}

/// Exhaustive grid followed by successively finer grids around the incumbent.
fn grid_optimum(samples: &[(f64, Outcome)]) -> (f64, [f64; 3]) {
    let mut center = [0.0, -0.5, 0.5];
    let mut half = 4.0;
    let mut best = (f64::NEG_INFINITY, center);
    for _ in 0..40 {
        let steps = 12;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let p = [
                        center[0] - half + 2.0 * half * i as f64 / steps as f64,
                        center[1] - half + 2.0 * half * j as f64 / steps as f64,
                        center[2] - half + 2.0 * half * k as f64 / steps as f64,
                    ];
                    let ll = reference_ll(samples, p[0], p[1], p[2]);
                    if ll > best.0 {
                        best = (ll, p);
                    }
                }
            }
        }
        center = best.1;
        half *= 0.5;
    }
    best
}

fn fixture_samples() -> Vec<(f64, Outcome)> {
    use Outcome::*;
    let xs = [-2.1, -1.4, -1.0, -0.7, -0.3, 0.0, 0.2, 0.5, 0.9, 1.3, 1.8, 2.4, -0.5, 0.1, 0.7, 1.1];
    let ys = [AwayWin, AwayWin, Draw, AwayWin, HomeWin, Draw, AwayWin, HomeWin, Draw, HomeWin, HomeWin, HomeWin, Draw, Draw, HomeWin, AwayWin];
    xs.iter().copied().zip(ys).collect()
}

#[test]
fn ologit_reaches_grid_optimum() {
    let s = fixture_samples();
    let m = ologit_fit(&s).unwrap();
    let fitted = reference_ll(&s, m.beta, m.cut1, m.cut2);
    let (oracle, p) = grid_optimum(&s);
    assert!(fitted >= oracle - 1e-6, "fit {fitted} below grid {oracle} at {p:?}");
    assert!((fitted - oracle).abs() <= 1e-6);
    assert!((m.log_likelihood(&s) - fitted).abs() < 1e-9);
}

#[test]
fn ologit_gradient_matches_finite_differences() {
    let s = fixture_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let beta = rng.random_range(-2.0..2.0);
        let c1 = rng.random_range(-2.0..1.0);
        let c2 = c1 + rng.random_range(0.1..2.0);
        let g = OrderedLogitModel::new(beta, c1, c2).unwrap().gradient(&s);
        let h = 1e-6;
        let p = [beta, c1, c2];
        for i in 0..3 {
            let (mut up, mut dn) = (p, p);
            up[i] += h;
            dn[i] -= h;
            let fd = (reference_ll(&s, up[0], up[1], up[2]) - reference_ll(&s, dn[0], dn[1], dn[2])) / (2.0 * h);
            let rel = (g[i] - fd).abs() / fd.abs().max(1.0);
            assert!(rel < 1e-5, "component {i}: {} vs {fd}", g[i]);
        }
    }
}

#[test]
fn ologit_recovers_generating_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (beta, c1, c2) = (1.0, -0.5, 0.5);
    let samples: Vec<(f64, Outcome)> = (0..10_000)
        .map(|_| {
            let x: f64 = rng.random_range(-3.0..3.0);
            let u: f64 = rng.random();
            let y = if u < sigmoid(c1 - beta * x) {
                Outcome::AwayWin
            } else if u < sigmoid(c2 - beta * x) {
                Outcome::Draw
            } else {
                Outcome::HomeWin
            };
            (x, y)
        })
        .collect();
    let m = ologit_fit(&samples).unwrap();
    assert!((m.beta - beta).abs() < 0.1, "{m:?}");
    assert!((m.cut1 - c1).abs() < 0.1, "{m:?}");
    assert!((m.cut2 - c2).abs() < 0.1, "{m:?}");
}

#[test]
fn ologit_constant_covariate_reproduces_frequencies() {
    use Outcome::*;
    let ys = [HomeWin, HomeWin, HomeWin, HomeWin, Draw, Draw, Draw, AwayWin, AwayWin, AwayWin];
    let s: Vec<_> = ys.iter().map(|&y| (0.0, y)).collect();
    let m = ologit_fit(&s).unwrap();
    assert_eq!(m.beta, 0.0);
    let p = m.predict(5.0);
    assert!((p.home - 0.4).abs() < 1e-9 && (p.draw - 0.3).abs() < 1e-9 && (p.away - 0.3).abs() < 1e-9);
    assert!(ologit_fit(&[(0.1, Draw), (0.4, Draw)]).is_err());
    assert!(ologit_fit(&[(f64::NAN, Draw), (0.4, HomeWin)]).is_err());
}

// ---------- Poisson ----------

fn pmf(mu: f64, k: u32) -> f64 {
    let mut p = (-mu).exp();
    for i in 1..=k {
        p *= mu / i as f64;
    }
    p
}

#[test]
fn poisson_matches_double_sum() {
    for &(mh, ma) in &[(1.0, 1.0), (1.6, 1.1), (0.3, 2.9), (7.9, 0.5), (0.0, 1.0), (4.0, 4.0)] {
        let (mut h, mut d, mut a) = (0.0, 0.0, 0.0);
        for i in 0..=15u32 {
            for j in 0..=15u32 {
                let p = pmf(mh, i) * pmf(ma, j);
                if i > j {
                    h += p;
                } else if i == j {
                    d += p;
                } else {
                    a += p;
                }
            }
        }
        let t = h + d + a;
        let got = poisson_outcome(mh, ma, 15).unwrap();
        assert!((got.home - h / t).abs() < 1e-12);
        assert!((got.draw - d / t).abs() < 1e-12);
        assert!((got.away - a / t).abs() < 1e-12);
    }
    let p = poisson_outcome(1.0, 1.0, 15).unwrap();
    let series: f64 = (0..40).map(|k| pmf(1.0, k).powi(2)).sum();
    assert!((p.draw - series).abs() < 1e-9);
    assert!((p.draw - 0.30851).abs() < 5e-6);
}

// ---------- simulation ----------

#[test]
fn equal_strength_matches_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let model = GoalModel::default();
    let n = 100_000;
    let (mut h, mut d, mut a) = (0usize, 0usize, 0usize);
    for _ in 0..n {
        let (x, y) = sample_match(1.0, 1.0, 1.0, &model, &mut rng);
        match x.cmp(&y) {
            std::cmp::Ordering::Greater => h += 1,
            std::cmp::Ordering::Equal => d += 1,
            std::cmp::Ordering::Less => a += 1,
        }
    }
    let nf = n as f64;
    assert!(((h as f64 - a as f64) / nf).abs() < 0.01);
    let expected = poisson_outcome(model.base_rate, model.base_rate, 15).unwrap().draw;
    assert!((d as f64 / nf - expected).abs() < 0.01);

    let mut r1 = ChaCha8Rng::seed_from_u64(5);
    let mut r2 = ChaCha8Rng::seed_from_u64(5);
    assert_eq!(sample_match(2.0, 1.0, 1.2, &model, &mut r1), sample_match(2.0, 1.0, 1.2, &model, &mut r2));
}

// ---------- walk-forward ----------

fn sim_dataset(seasons: usize, seed: u64) -> Dataset {
    gen_league(&SimLeague::log_spaced(8, 4.0, seasons, seed).unwrap()).unwrap().0
}

#[test]
fn two_seasons_give_one_fold() {
    let ds = sim_dataset(2, 1);
    let p = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let rep = walk_forward(&ds, &p, &FoldSpec::default()).unwrap();
    assert_eq!(rep.folds.len(), 1);
    assert_eq!(rep.rows.len(), 56);
    assert!(rep.rows.iter().all(|r| r.season == "2002-03"));
    assert!(rep.notes.iter().any(|n| n.contains("2001-02") && n.contains("skipped")));
}

#[test]
fn uniform_baseline_rps_fixture() {
    let mk = |d: u64, season: &str, h: &str, a: &str, hg: u32, ag: u32, i: usize| {
        let mut m = MatchRecord::new(season, "L", day(d), h, a, hg, ag);
        m.source_index = i;
        m
    };
    let ds = canonical_sort(Dataset::new(vec![
        mk(0, "A", "x", "y", 1, 0, 0),
        mk(7, "A", "y", "z", 0, 0, 1),
        mk(200, "B", "x", "z", 2, 0, 2),
        mk(207, "B", "y", "x", 1, 1, 3),
        mk(214, "B", "z", "y", 0, 3, 4),
    ]));
    let p = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::Uniform);
    let rep = walk_forward(&ds, &p, &FoldSpec::default()).unwrap();
    let overall = rep.overall().unwrap();
    assert_eq!(overall.n, 3);
    assert!((overall.rps_avg - 2.0 / 9.0).abs() < 1e-12);
}

#[test]
fn aggregates_recompute_from_rows() {
    let ds = sim_dataset(3, 4);
    let p = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let rep = walk_forward(&ds, &p, &FoldSpec { boundary: FoldBoundary::Blocks(40), train_window: Some(100) }).unwrap();
    let rows = read_rows_csv(&write_rows_csv(&rep.rows).unwrap()).unwrap();
    assert_eq!(rows, rep.rows);
    assert_eq!(aggregate_report(&rows), rep.aggregates);
    let overall = rep.overall().unwrap();
    let mean_rps = rows.iter().map(|r| r.rps).sum::<f64>() / rows.len() as f64;
    assert!((overall.rps_avg - mean_rps).abs() < 1e-12);
}

#[test]
fn walk_forward_is_deterministic_and_rejects_missing_odds() {
    let ds = sim_dataset(2, 8);
    let p = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let a = walk_forward(&ds, &p, &FoldSpec::default()).unwrap();
    let b = walk_forward(&ds, &p, &FoldSpec::default()).unwrap();
    assert_eq!(a, b);
    let odds = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::Odds);
    assert!(walk_forward(&ds, &odds, &FoldSpec::default()).is_err());
    let unsorted = Dataset::new(ds.matches.clone());
    assert!(walk_forward(&unsorted, &p, &FoldSpec::default()).is_err());
}

#[test]
fn same_date_matches_share_a_snapshot() {
    // Both matches on the second date involve team x; the second forecast must
    // not see the first one's result.
    let mk = |d: u64, s: &str, h: &str, a: &str, hg: u32, ag: u32, i: usize| {
        let mut m = MatchRecord::new(s, "L", day(d), h, a, hg, ag);
        m.source_index = i;
        m
    };
    let base = vec![
        mk(0, "A", "x", "y", 1, 0, 0),
        mk(1, "A", "y", "x", 0, 2, 1),
        mk(2, "A", "z", "w", 2, 2, 2),
        mk(300, "B", "x", "z", 0, 0, 3),
        mk(300, "B", "w", "x", 0, 0, 4),
    ];
    let mut alt = base.clone();
    alt[3] = mk(300, "B", "x", "z", 9, 0, 3);
    let p = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let r1 = walk_forward(&canonical_sort(Dataset::new(base)), &p, &FoldSpec::default()).unwrap();
    let r2 = walk_forward(&canonical_sort(Dataset::new(alt)), &p, &FoldSpec::default()).unwrap();
    assert_eq!(r1.rows.len(), 2);
    assert_eq!(r1.rows[1].p_home.to_bits(), r2.rows[1].p_home.to_bits());
    assert_eq!(r1.rows[1].p_away.to_bits(), r2.rows[1].p_away.to_bits());
}

// ---------- ingestion examples ----------

#[test]
fn oisdb_examples() {
    let text = "Sea,Lge,Date,HT,AT,HS,AS,GD,WDL\n00-01,ENG1,2000-08-19,Charlton,Man City,4,0,4,W\n00-01,ENG1,2000-08-19,Chelsea,West Ham,2,2,0,D\n";
    let ds = parse_oisdb(text).unwrap();
    assert_eq!(ds.matches[0].goal_diff, 4);
    assert_eq!(ds.matches[0].result, Outcome::HomeWin);
    assert_eq!(ds.matches[0].home_team, "charlton");
    assert_eq!(ds.matches[1].result, Outcome::Draw);
    assert!(ds.matches[0].odds.is_none());

    let bad = "Sea,Lge,Date,HT,AT,HS,AS,GD,WDL\n00-01,ENG1,2000-08-19,Charlton,Man City,4,0,3,W\n";
    assert!(parse_oisdb(bad).is_err());
    let lenient = parse_oisdb_lenient(bad).unwrap();
    assert_eq!(lenient.findings.len(), 1);
    assert_eq!(lenient.findings[0].line, 2);

    let malformed = "Sea,Lge,Date,HT,AT,HS,AS,GD,WDL\n00-01,ENG1,2000-08-19,A,B,x,0,0,D\n";
    let err = parse_oisdb(malformed).unwrap_err().to_string();
    assert!(err.contains('2') && err.contains("HS"), "{err}");
}

#[test]
fn footballdata_examples() {
    let text = "Div,Date,HomeTeam,AwayTeam,FTHG,FTAG,FTR,B365H,B365D,B365A,Attendance\n\
                E0,12/08/23,Arsenal,Forest,1,1,D,2.5,3.4,2.9,60000\n\
                E0,13/08/23,Spurs,Brentford,2,0,H,,,,30000\n\
                E0,14/08/23,Wolves,Luton,1,0,H,0.9,3.4,2.9,20000\n";
    let parsed = parse_footballdata_lenient(text).unwrap();
    let m = &parsed.dataset.matches;
    assert_eq!(m.len(), 2);
    assert_eq!(m[0].result, Outcome::Draw);
    assert_eq!(m[0].odds.unwrap().home, 2.5);
    assert!(m[1].odds.is_none());
    assert_eq!(parsed.findings.len(), 1);
    assert!(parsed.unmapped_columns.contains(&"Attendance".to_string()));

    let missing = "Date,HomeTeam,AwayTeam,FTHG,FTAG\n12/08/23,A,B,1,0\n";
    assert!(parse_footballdata_lenient(missing).unwrap_err().to_string().contains("FTR"));
}
