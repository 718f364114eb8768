//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! Criterion 10 needs a real league season in football-data.co.uk CSV form; point
//! `PITCHRATER_FD_CSV` at such a file to evaluate it. Without it the criterion is
//! reported as NOT EVALUATED, alongside an informational run on simulated data.

use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pitchrater::data::canonical_sort;
use pitchrater::evaluate::{
    brier, brier_single, ign, ign_single, rps, temporal_split, walk_forward, FoldBoundary, FoldSpec,
    ForecasterKind, Pipeline,
};
use pitchrater::features::implied_probabilities;
use pitchrater::ratings::elo::{bt_prob, bt_to_elo, effective_k, elo_expect, elo_to_bt, EloConfig, EloRatings, KMode};
use pitchrater::ratings::gap::{GapConfig, GapRating, GapRatings};
use pitchrater::ratings::pi::{psi, PiConfig, PiRatings};
use pitchrater::ratings::{EngineSpec, RatingEngine};
use pitchrater::simulate::{gen_league, spearman, SimLeague};
use pitchrater::{Dataset, MatchRecord, Outcome, ProbTriple};

enum Verdict {
    Pass(String),
    Fail(String),
    NotEvaluated(String),
}

use Verdict::*;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn c1_odds_example() -> Verdict {
    let (p, overround) = implied_probabilities(&[1.34, 3.02]).unwrap();
    let factor = 1.0 + overround;
    let ok = round3(p[0]) == 0.693 && round3(p[1]) == 0.307 && round3(factor) == 1.077;
    check(ok, format!("probs ({:.3}, {:.3}), factor {:.3}", p[0], p[1], factor))
}

fn c2_elo_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let ra = rng.random_range(500.0..2500.0);
        let rb = rng.random_range(500.0..2500.0);
        let h = rng.random_range(0.0..150.0);
        let cfg = EloConfig { home_advantage: h, ..EloConfig::default() };
        let (p, q) = elo_expect(ra, rb, &cfg);
        worst = worst.max((p + q - 1.0).abs());
        let plain = EloConfig::default();
        worst = worst.max((elo_expect(ra, rb, &plain).0 - elo_expect(rb, ra, &plain).1).abs());
        let mut e = EloRatings::new(cfg).unwrap();
        e.set_rating("h", ra);
        e.set_rating("a", rb);
        let m = MatchRecord::new("s", "L", NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), "h", "a", rng.random_range(0..6), rng.random_range(0..6));
        e.elo_update(&m).unwrap();
        worst = worst.max(((e.rating("h") - ra) + (e.rating("a") - rb)).abs());
    }
    let mut cfg = EloConfig::default();
    let k_fixed = effective_k(&cfg, 3, None).unwrap();
    cfg.k_mode = KMode::GoalBased { k0: 10.0, lambda: 1.0 };
    let k_goal = effective_k(&cfg, 2, None).unwrap();
    cfg.k_mode = KMode::InternationalSchedule;
    let k_int = effective_k(&cfg, 3, Some("world_cup_final")).unwrap();
    cfg.k_mode = KMode::ClubMultiplier(20.0);
    let k_club = effective_k(&cfg, 4, None).unwrap();
    let ks = [k_fixed, k_goal, k_int, k_club];
    check(
        worst <= 1e-12 && ks == [20.0, 30.0, 105.0, 37.5],
        format!("max invariant error {worst:.1e}; K fixtures {ks:?}"),
    )
}

fn c3_bradley_terry() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut trip, mut prob): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let r = rng.random_range(-4000.0..4000.0);
        let rj = rng.random_range(-4000.0..4000.0);
        trip = trip.max((bt_to_elo(elo_to_bt(r)).unwrap() - r).abs());
        let p = bt_prob(elo_to_bt(r), elo_to_bt(rj)).unwrap();
        prob = prob.max((p - elo_expect(r, rj, &EloConfig::default()).0).abs());
    }
    check(trip <= 1e-9 && prob <= 1e-12, format!("round trip {trip:.1e}, bt vs elo {prob:.1e}"))
}

fn c4_scoring_rules() -> Verdict {
    let pt = |h, d, a| ProbTriple::new(h, d, a).unwrap();
    let u = ProbTriple::uniform();
    use Outcome::*;
    let rps_vals = [
        (rps(&pt(1.0, 0.0, 0.0), HomeWin).unwrap(), 0.0),
        (rps(&pt(0.5, 0.3, 0.2), HomeWin).unwrap(), 0.145),
        (rps(&u, HomeWin).unwrap(), 5.0 / 18.0),
        (rps(&u, Draw).unwrap(), 1.0 / 9.0),
        (rps(&pt(1.0, 0.0, 0.0), AwayWin).unwrap(), 1.0),
        (rps(&pt(0.0, 1.0, 0.0), AwayWin).unwrap(), 0.5),
    ];
    let brier_vals = [
        (brier(&[pt(1.0, 0.0, 0.0)], &[HomeWin]).unwrap(), 0.0),
        (brier(&[u], &[HomeWin]).unwrap(), 2.0 / 3.0),
        (brier(&[pt(0.0, 0.0, 1.0)], &[HomeWin]).unwrap(), 2.0),
    ];
    let ign_vals = [
        (ign(&[pt(1.0, 0.0, 0.0)], &[HomeWin]).unwrap(), 0.0),
        (ign(&[pt(0.5, 0.2, 0.3)], &[HomeWin]).unwrap(), 1.0),
    ];
    let fixtures_ok = rps_vals
        .iter()
        .chain(&brier_vals)
        .chain(&ign_vals)
        .all(|(got, want)| (got - want).abs() <= 1e-12);

    let far = pt(1.0, 0.0, 0.0);
    let near = pt(0.0, 1.0, 0.0);
    let distance = rps(&far, AwayWin).unwrap() > rps(&near, AwayWin).unwrap()
        && brier_single(&far, AwayWin).unwrap() == 2.0
        && brier_single(&near, AwayWin).unwrap() == 2.0;
    let a = pt(0.5, 0.5, 0.0);
    let b = pt(0.5, 0.25, 0.25);
    let locality = ign_single(&a, HomeWin).unwrap().0 == ign_single(&b, HomeWin).unwrap().0
        && brier_single(&a, HomeWin).unwrap() != brier_single(&b, HomeWin).unwrap()
        && rps(&a, HomeWin).unwrap() != rps(&b, HomeWin).unwrap();
    check(
        fixtures_ok && distance && locality,
        format!("fixtures {fixtures_ok}, distance sensitivity {distance}, locality {locality}"),
    )
}

fn simplex_grid() -> Vec<[u32; 3]> {
    let mut g = Vec::new();
    for i in 0..=20 {
        for j in 0..=20 - i {
            g.push([i, j, 20 - i - j]);
        }
    }
    g
}

fn c5_properness() -> Verdict {
    let grid = simplex_grid();
    let forecasts: Vec<ProbTriple> = grid
        .iter()
        .map(|g| ProbTriple::new(g[0] as f64 / 20.0, g[1] as f64 / 20.0, g[2] as f64 / 20.0).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for _ in 0..20 {
        let t = rng.random_range(0..grid.len());
        let q = forecasts[t].as_array();
        type Rule = fn(&ProbTriple, Outcome) -> f64;
        let rules: [(&str, Rule); 3] = [
            ("brier", |p, o| brier_single(p, o).unwrap()),
            ("rps", |p, o| rps(p, o).unwrap()),
            ("ign", |p, o| ign_single(p, o).unwrap().0),
        ];
        for (name, rule) in rules {
            let expected = |p: &ProbTriple| -> f64 { Outcome::ALL.iter().map(|&o| q[o.index()] * rule(p, o)).sum() };
            let at_truth = expected(&forecasts[t]);
            for (i, f) in forecasts.iter().enumerate() {
                if i != t && expected(f) <= at_truth {
                    failures.push(format!("{name}: {:?} ties or beats truth {:?}", f.as_array(), q));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{} forecasts x 20 truths x 3 rules; {} violations{}", grid.len(), failures.len(), failures.first().map(|f| format!(" (e.g. {f})")).unwrap_or_default()),
    )
}

fn c6_gap() -> Verdict {
    let cfg = GapConfig { lambda: 0.1, phi1: 0.5, phi2: 0.5, stat: "goals".into() };
    let mut g = GapRatings::new(cfg).unwrap();
    g.update_with_stats("i", "j", 2.0, 0.0).unwrap();
    let home = g.rating("i");
    let away = g.rating("j");
    let want_home = GapRating { home_attack: 0.1, home_defense: 0.0, away_attack: 0.1, away_defense: 0.0 };
    let want_away = GapRating { home_attack: 0.0, home_defense: 0.1, away_attack: 0.0, away_defense: 0.1 };
    let fixture = home == want_home && away == want_away;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let teams = ["a", "b", "c", "d"];
    let mut negatives = 0usize;
    for _ in 0..100_000 {
        let cfg = GapConfig {
            lambda: rng.random_range(0.01..3.0),
            phi1: rng.random_range(0.0..=1.0),
            phi2: rng.random_range(0.0..=1.0),
            stat: "goals".into(),
        };
        let mut g = GapRatings::new(cfg).unwrap();
        for _ in 0..6 {
            let h = rng.random_range(0..4);
            let a = (h + rng.random_range(1..4)) % 4;
            g.update_with_stats(teams[h], teams[a], rng.random_range(0.0..8.0), rng.random_range(0.0..8.0)).unwrap();
        }
        for t in teams {
            if g.rating(t).as_array().iter().any(|&v| v < 0.0) {
                negatives += 1;
            }
        }
    }
    check(
        fixture && negatives == 0,
        format!("hand fixture {}; home {:?} away {:?}; negative components in 0 of 100000 sequences: {}", fixture, home.as_array(), away.as_array(), negatives == 0),
    )
}

fn c7_pi() -> Verdict {
    let psi_ok = psi(0.0, 3.0) == 0.0 && psi(9.0, 3.0) == 3.0;
    let mut pi = PiRatings::new(PiConfig { lambda: 0.1, gamma: 0.5, b: 10.0, c: 3.0 }).unwrap();
    pi.pi_update(&MatchRecord::new("s", "L", NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), "h", "a", 2, 0));
    let step = 0.1 * 3.0 * 3f64.log10();
    let h = pi.rating("h");
    let a = pi.rating("a");
    let errs = [h.home - step, h.away - 0.5 * step, a.away + step, a.home + 0.5 * step];
    let worst = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    check(
        psi_ok && worst <= 1e-12,
        format!("psi(0)=0, psi(9)=3: {psi_ok}; 2-0 update home.H {:.6} home.A {:.6} away.A {:.6} away.H {:.6}, max error {worst:.1e}", h.home, h.away, a.away, a.home),
    )
}

fn c8_oracle_recovery() -> Verdict {
    let sim = SimLeague::log_spaced(20, 4.0, 4, 2017).unwrap();
    let (ds, truth) = gen_league(&sim).unwrap();
    let true_strength: Vec<f64> = truth.iter().map(|(_, s)| *s).collect();
    let mut rhos = Vec::new();
    for spec in [
        EngineSpec::Elo(EloConfig::default()),
        EngineSpec::Pi(PiConfig::default()),
        EngineSpec::Gap(GapConfig::default()),
    ] {
        let mut e: Box<dyn RatingEngine> = spec.build().unwrap();
        for m in ds.iter() {
            e.update(m).unwrap();
        }
        let est: Vec<f64> = truth.iter().map(|(t, _)| e.strength(t).unwrap()).collect();
        rhos.push((spec.name(), spearman(&true_strength, &est).unwrap()));
    }
    let folds = FoldSpec::default();
    let model = walk_forward(&ds, &Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit), &folds).unwrap();
    let uniform = walk_forward(&ds, &Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::Uniform), &folds).unwrap();
    let (m, u) = (model.overall().unwrap().rps_avg, uniform.overall().unwrap().rps_avg);
    let ok = rhos.iter().all(|(_, r)| *r >= 0.7) && m < u;
    let rho_text: Vec<String> = rhos.iter().map(|(n, r)| format!("{n} {r:.3}")).collect();
    check(ok, format!("spearman {}; RPS_avg elo+ologit {m:.4} vs uniform {u:.4}", rho_text.join(", ")))
}

fn c9_no_leakage() -> Verdict {
    let sim = SimLeague::log_spaced(8, 3.0, 3, 9).unwrap();
    let (ds, _) = gen_league(&sim).unwrap();
    let pipeline = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let folds = FoldSpec { boundary: FoldBoundary::Blocks(24), train_window: None };
    let base = walk_forward(&ds, &pipeline, &folds).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut leaks = 0;
    let mut compared = 0usize;
    for _ in 0..200 {
        let i = rng.random_range(0..ds.len());
        let mut alt = ds.clone();
        let m = &ds.matches[i];
        let (hg, ag) = (rng.random_range(0..9), rng.random_range(0..9));
        let mut changed = MatchRecord::new(&m.season, &m.league, m.date, &m.home_team, &m.away_team, hg, ag);
        changed.source_index = m.source_index;
        alt.matches[i] = changed;
        let rep = walk_forward(&alt, &pipeline, &folds).unwrap();
        for (a, b) in base.rows.iter().zip(&rep.rows).filter(|(a, _)| a.date <= m.date) {
            compared += 1;
            let same = a.key == b.key
                && a.p_home.to_bits() == b.p_home.to_bits()
                && a.p_draw.to_bits() == b.p_draw.to_bits()
                && a.p_away.to_bits() == b.p_away.to_bits();
            if !same {
                leaks += 1;
            }
        }
    }

    // Split check on datasets with heavy same-date clustering.
    let mut split_violations = 0;
    for _ in 0..200 {
        let n = rng.random_range(4..60);
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let matches: Vec<MatchRecord> = (0..n)
            .map(|i| {
                let mut m = MatchRecord::new("s", "L", start + Days::new(rng.random_range(0..6)), &format!("h{i}"), &format!("a{i}"), 1, 1);
                m.source_index = i;
                m
            })
            .collect();
        let ds = canonical_sort(Dataset::new(matches));
        let f = rng.random_range(0.05..0.95);
        if let Ok((tr, te)) = temporal_split(&ds, f) {
            if tr.matches.last().unwrap().date >= te.matches[0].date || tr.len() + te.len() != ds.len() {
                split_violations += 1;
            }
        }
    }
    check(
        leaks == 0 && split_violations == 0,
        format!("200 mutations, {compared} same-or-earlier-date rows compared, {leaks} changed; split violations {split_violations}"),
    )
}

fn c10_realism_band() -> Verdict {
    let Ok(path) = std::env::var("PITCHRATER_FD_CSV") else {
        return NotEvaluated("set PITCHRATER_FD_CSV to a football-data.co.uk season CSV".into());
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Fail(format!("cannot read {path}: {e}")),
    };
    let parsed = match pitchrater::data::parse_footballdata_lenient(&text) {
        Ok(p) => p,
        Err(e) => return Fail(format!("cannot parse {path}: {e}")),
    };
    let ds = canonical_sort(parsed.dataset);
    let (rps_v, acc, n) = band_run(&ds);
    check(
        (0.18..=0.24).contains(&rps_v) && (0.40..=0.60).contains(&acc),
        format!("{path}: {n} forecasts, RPS_avg {rps_v:.4}, accuracy {acc:.4}"),
    )
}

/// Elo + ordered logit within one season: folds of 40 matches, the first used only for training.
fn band_run(ds: &Dataset) -> (f64, f64, usize) {
    let pipeline = Pipeline::new(EngineSpec::Elo(EloConfig::default()), ForecasterKind::OrderedLogit);
    let folds = FoldSpec { boundary: FoldBoundary::Blocks(40), train_window: None };
    let rep = walk_forward(ds, &pipeline, &folds).unwrap();
    let o = rep.overall().unwrap();
    (o.rps_avg, o.accuracy, o.n)
}

fn c11_throughput() -> Verdict {
    const N: usize = 216_743;
    // 20 teams give 380 matches per season; 571 seasons cover N.
    let sim = SimLeague::log_spaced(20, 4.0, N.div_ceil(380), 11).unwrap();
    let (mut ds, _) = gen_league(&sim).unwrap();
    ds.matches.truncate(N);
    let mut e = EloRatings::new(EloConfig::default()).unwrap();
    let t = Instant::now();
    for m in ds.iter() {
        e.update(m).unwrap();
    }
    let took = t.elapsed();
    check(
        ds.len() == N && took < Duration::from_secs(10),
        format!("{} matches rated in {:.3} s", ds.len(), took.as_secs_f64()),
    )
}

fn main() {
    let criteria = [
        Criterion { id: "1", name: "odds worked example", budget: Duration::from_secs(1), run: c1_odds_example },
        Criterion { id: "2", name: "elo fixture suite", budget: Duration::from_secs(5), run: c2_elo_suite },
        Criterion { id: "3", name: "bradley-terry interop", budget: Duration::from_secs(5), run: c3_bradley_terry },
        Criterion { id: "4", name: "scoring-rule fixtures", budget: Duration::from_secs(1), run: c4_scoring_rules },
        Criterion { id: "5", name: "properness grid", budget: Duration::from_secs(30), run: c5_properness },
        Criterion { id: "6", name: "gap fixture and non-negativity", budget: Duration::from_secs(10), run: c6_gap },
        Criterion { id: "7", name: "pi-rating fixtures", budget: Duration::from_secs(1), run: c7_pi },
        Criterion { id: "8", name: "oracle recovery", budget: Duration::from_secs(60), run: c8_oracle_recovery },
        Criterion { id: "9", name: "no leakage", budget: Duration::from_secs(30), run: c9_no_leakage },
        Criterion { id: "10", name: "realism band on a real season", budget: Duration::from_secs(60), run: c10_realism_band },
        Criterion { id: "11", name: "throughput", budget: Duration::from_secs(60), run: c11_throughput },
    ];
    let mut failed = 0;
    for c in &criteria {
        let t = Instant::now();
        let verdict = (c.run)();
        let took = t.elapsed();
        let over = took > c.budget;
        let (tag, detail) = match verdict {
            Pass(d) if over => {
                failed += 1;
                ("FAIL", format!("{d}; over time budget {:?}", c.budget))
            }
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            NotEvaluated(d) => ("NOT EVALUATED", d),
        };
        println!("criterion {:>2} {:<34} {:<13} [{:.2}s] {}", c.id, c.name, tag, took.as_secs_f64(), detail);
    }

    // Simulated stand-in for criterion 10; informational only.
    let mut sim = SimLeague::log_spaced(20, 4.0, 1, 10).unwrap();
    sim.home_factor = 1.3;
    let (ds, _) = gen_league(&sim).unwrap();
    let (r, a, n) = band_run(&ds);
    println!("info         simulated season in place of criterion 10: {n} forecasts, RPS_avg {r:.4}, accuracy {a:.4}");

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
