//! Win/draw/loss probability models and baselines.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::data::{OddsTriple, Outcome};
use crate::error::{Error, Result};
use crate::features::odds_to_probs;

/// Probabilities sum to one within this tolerance.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Default per-side goal cap for [`poisson_outcome`].
pub const DEFAULT_GOAL_CAP: u32 = 15;

/// Largest scoring rate accepted with the default goal cap.
pub const MAX_MEAN_AT_DEFAULT_CAP: f64 = 8.0;

/// Distribution over (home win, draw, away win).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbTriple {
    pub home: f64,
    pub draw: f64,
    pub away: f64,
}

impl ProbTriple {
    pub fn new(home: f64, draw: f64, away: f64) -> Result<Self> {
        let p = [home, draw, away];
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain(format!("probabilities must lie in [0, 1], got {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { home, draw, away })
    }

    pub fn uniform() -> Self {
        Self {
            home: 1.0 / 3.0,
            draw: 1.0 / 3.0,
            away: 1.0 / 3.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.home, self.draw, self.away]
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        self.as_array()[outcome.index()]
    }

    /// Most probable outcome; ties go to the home win, then the draw.
    pub fn predicted(&self) -> Outcome {
        let p = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if p[i] > p[best] {
                best = i;
            }
        }
        Outcome::from_index(best).expect("index < 3")
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Proportional-odds model on a single covariate:
/// `P(AwayWin) = σ(cut1 - βx)`, `P(AwayWin or Draw) = σ(cut2 - βx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderedLogitModel {
    pub beta: f64,
    pub cut1: f64,
    pub cut2: f64,
}

/// Cutpoint offset used for an outcome that never occurs in training data.
const ABSENT_CLASS_OFFSET: f64 = 1e3;
/// Cutpoint gap used when draws never occur in training data.
const ABSENT_DRAW_GAP: f64 = 1e-9;

impl OrderedLogitModel {
    pub fn new(beta: f64, cut1: f64, cut2: f64) -> Result<Self> {
        if !(cut1 < cut2) || !beta.is_finite() || !cut1.is_finite() || !cut2.is_finite() {
            return Err(Error::domain(format!("need finite beta and cut1 < cut2, got {cut1} and {cut2}")));
        }
        Ok(Self { beta, cut1, cut2 })
    }

    pub fn predict(&self, x: f64) -> ProbTriple {
        let lo = sigmoid(self.cut1 - self.beta * x);
        let hi = sigmoid(self.cut2 - self.beta * x);
        let away = lo;
        let draw = (hi - lo).max(0.0);
        let home = 1.0 - hi;
        ProbTriple {
            home,
            draw,
            away,
        }
    }

    /// Log-likelihood of `samples` under the model.
    pub fn log_likelihood(&self, samples: &[(f64, Outcome)]) -> f64 {
        samples
            .iter()
            .map(|&(x, y)| {
                let p = self.predict(x).get(y);
                p.max(f64::MIN_POSITIVE).ln()
            })
            .sum()
    }

    /// Analytic gradient of the log-likelihood in `(beta, cut1, cut2)`.
    pub fn gradient(&self, samples: &[(f64, Outcome)]) -> [f64; 3] {
        let (g, _) = self.grad_hess(samples);
        [g[0], g[1], g[2]]
    }

    fn grad_hess(&self, samples: &[(f64, Outcome)]) -> (Vector3<f64>, Matrix3<f64>) {
        let mut g = Vector3::zeros();
        let mut h = Matrix3::zeros();
        for &(x, y) in samples {
            // Interval (lower, upper] on the latent scale, as functions of θ = (β, c1, c2).
            let (lower, upper): (Option<(f64, Vector3<f64>)>, Option<(f64, Vector3<f64>)>) = match y {
                Outcome::AwayWin => (None, Some((self.cut1 - self.beta * x, Vector3::new(-x, 1.0, 0.0)))),
                Outcome::Draw => (
                    Some((self.cut1 - self.beta * x, Vector3::new(-x, 1.0, 0.0))),
                    Some((self.cut2 - self.beta * x, Vector3::new(-x, 0.0, 1.0))),
                ),
                Outcome::HomeWin => (Some((self.cut2 - self.beta * x, Vector3::new(-x, 0.0, 1.0))), None),
            };
            let f_up = upper.map_or(1.0, |(b, _)| sigmoid(b));
            let f_lo = lower.map_or(0.0, |(a, _)| sigmoid(a));
            let p = (f_up - f_lo).max(1e-300);
            let mut gi = Vector3::zeros();
            let mut hi = Matrix3::zeros();
            if let Some((b, u)) = upper {
                let s = sigmoid(b);
                let d = s * (1.0 - s);
                gi += u * d;
                hi += u * u.transpose() * (d * (1.0 - 2.0 * s));
            }
            if let Some((a, v)) = lower {
                let s = sigmoid(a);
                let d = s * (1.0 - s);
                gi -= v * d;
                hi -= v * v.transpose() * (d * (1.0 - 2.0 * s));
            }
            gi /= p;
            g += gi;
            h += hi / p - gi * gi.transpose();
        }
        (g, h)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Maximum-likelihood fit of [`OrderedLogitModel`] by damped Newton ascent.
///
/// A constant covariate leaves β unidentified; it is fixed at zero and the
/// cutpoints reproduce the empirical outcome frequencies. An outcome class
/// absent from the data has no finite optimum, so its cutpoint is placed far
/// out (or, for draws, the two cutpoints nearly coincide) and the remaining
/// binary problem is fitted.
pub fn ologit_fit(samples: &[(f64, Outcome)]) -> Result<OrderedLogitModel> {
    if let Some((x, _)) = samples.iter().find(|(x, _)| !x.is_finite()) {
        return Err(Error::domain(format!("covariate must be finite, got {x}")));
    }
    let mut counts = [0usize; 3];
    for (_, y) in samples {
        counts[y.index()] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Degenerate("ordered logit needs at least two distinct outcomes".into()));
    }
    let n = samples.len() as f64;
    let [n_home, n_draw, n_away] = counts.map(|c| c as f64);
    let constant = samples.windows(2).all(|w| w[0].0 == w[1].0);

    if present == 3 {
        let c1 = logit(n_away / n);
        let c2 = logit((n_away + n_draw) / n);
        let start = OrderedLogitModel { beta: 0.0, cut1: c1, cut2: c2 };
        if constant {
            return Ok(start);
        }
        return Ok(newton(samples, start));
    }

    // Two classes present: the informative cutpoint comes from a binary logit
    // of the lower class against the upper one.
    let lower = if n_away > 0.0 { Outcome::AwayWin } else { Outcome::Draw };
    let binary: Vec<(f64, bool)> = samples.iter().map(|&(x, y)| (x, y == lower)).collect();
    let (beta, cut) = fit_binary(&binary, constant);
    Ok(if n_draw == 0.0 {
        OrderedLogitModel { beta, cut1: cut, cut2: cut + ABSENT_DRAW_GAP }
    } else if n_home == 0.0 {
        OrderedLogitModel { beta, cut1: cut, cut2: cut + ABSENT_CLASS_OFFSET }
    } else {
        OrderedLogitModel { beta, cut1: cut - ABSENT_CLASS_OFFSET, cut2: cut }
    })
}

/// Binary logit `P(lower) = σ(cut - βx)` by damped Newton ascent. Returns `(β, cut)`.
fn fit_binary(samples: &[(f64, bool)], constant: bool) -> (f64, f64) {
    let n = samples.len() as f64;
    let k = samples.iter().filter(|(_, y)| *y).count() as f64;
    let mut theta = Vector2::new(0.0, logit(k / n));
    if constant {
        return (theta[0], theta[1]);
    }
    let ll = |t: &Vector2<f64>| -> f64 {
        samples
            .iter()
            .map(|&(x, y)| {
                let z = t[1] - t[0] * x;
                let p = if y { sigmoid(z) } else { sigmoid(-z) };
                p.max(f64::MIN_POSITIVE).ln()
            })
            .sum()
    };
    let mut current = ll(&theta);
    for _ in 0..200 {
        let mut g = Vector2::zeros();
        let mut h = Matrix2::zeros();
        for &(x, y) in samples {
            let z = theta[1] - theta[0] * x;
            let s = sigmoid(z);
            let u = Vector2::new(-x, 1.0);
            g += u * (if y { 1.0 - s } else { -s });
            h -= u * u.transpose() * (s * (1.0 - s));
        }
        if g.amax() < 1e-10 {
            break;
        }
        let mut dir = (-h).cholesky().map(|c| c.solve(&g)).unwrap_or(g);
        if dir.dot(&g) <= 0.0 {
            dir = g;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let cand = theta + dir * step;
            let cand_ll = ll(&cand);
            if cand_ll >= current {
                improved = cand_ll > current;
                theta = cand;
                current = cand_ll;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (theta[0], theta[1])
}

fn newton(samples: &[(f64, Outcome)], start: OrderedLogitModel) -> OrderedLogitModel {
    let mut model = start;
    let mut ll = model.log_likelihood(samples);
    for _ in 0..200 {
        let (g, h) = model.grad_hess(samples);
        if g.amax() < 1e-10 {
            break;
        }
        // Newton direction for a maximum; fall back to gradient ascent if the
        // Hessian is not negative definite.
        let mut dir = (-h).cholesky().map(|c| c.solve(&g)).unwrap_or(g);
        if dir.dot(&g) <= 0.0 {
            dir = g;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let cand = OrderedLogitModel {
                beta: model.beta + step * dir[0],
                cut1: model.cut1 + step * dir[1],
                cut2: model.cut2 + step * dir[2],
            };
            if cand.cut1 < cand.cut2 {
                let cand_ll = cand.log_likelihood(samples);
                if cand_ll >= ll {
                    improved = cand_ll > ll;
                    model = cand;
                    ll = cand_ll;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    model
}

pub fn ologit_predict(model: &OrderedLogitModel, x: f64) -> ProbTriple {
    model.predict(x)
}

/// Win/draw/loss from independent Poisson scores, truncated at `goal_cap`
/// goals per side and renormalized.
pub fn poisson_outcome(mu_home: f64, mu_away: f64, goal_cap: u32) -> Result<ProbTriple> {
    if !(mu_home >= 0.0 && mu_away >= 0.0 && mu_home.is_finite() && mu_away.is_finite()) {
        return Err(Error::domain(format!("scoring rates must be non-negative, got {mu_home} and {mu_away}")));
    }
    if goal_cap < 1 {
        return Err(Error::domain("goal cap must be at least 1"));
    }
    if goal_cap <= DEFAULT_GOAL_CAP && mu_home.max(mu_away) > MAX_MEAN_AT_DEFAULT_CAP {
        return Err(Error::domain(format!(
            "scoring rate {} is too large for a cap of {goal_cap} goals; raise the cap",
            mu_home.max(mu_away)
        )));
    }
    let pmf = |mu: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(goal_cap as usize + 1);
        let mut p = (-mu).exp();
        for k in 0..=goal_cap {
            v.push(p);
            p *= mu / (k + 1) as f64;
        }
        v
    };
    let ph = pmf(mu_home);
    let pa = pmf(mu_away);
    let (mut home, mut draw, mut away) = (0.0, 0.0, 0.0);
    for (i, &x) in ph.iter().enumerate() {
        for (j, &y) in pa.iter().enumerate() {
            let p = x * y;
            match i.cmp(&j) {
                std::cmp::Ordering::Greater => home += p,
                std::cmp::Ordering::Equal => draw += p,
                std::cmp::Ordering::Less => away += p,
            }
        }
    }
    let total = home + draw + away;
    Ok(ProbTriple {
        home: home / total,
        draw: draw / total,
        away: away / total,
    })
}

/// Empirical outcome frequencies of the training set.
pub fn baseline_majority(train: &[Outcome]) -> Result<ProbTriple> {
    if train.is_empty() {
        return Err(Error::Empty("training outcomes"));
    }
    let mut counts = [0usize; 3];
    for y in train {
        counts[y.index()] += 1;
    }
    let n = train.len() as f64;
    let [h, d, a] = counts.map(|c| c as f64 / n);
    // Frequencies of a finite sample always sum to 1 within rounding.
    ProbTriple::new(h, d, a)
}

/// Majority class of the training set, ties toward the home win.
pub fn majority_class(train: &[Outcome]) -> Result<Outcome> {
    Ok(baseline_majority(train)?.predicted())
}

pub fn baseline_uniform() -> ProbTriple {
    ProbTriple::uniform()
}

pub fn baseline_odds(odds: &OddsTriple) -> Result<ProbTriple> {
    odds_to_probs(odds).map(|(p, _)| p)
}
