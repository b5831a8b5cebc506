//! Scoring statements against an inferred posterior.
//!
//! A lowered statement is a boolean combination of probability comparisons
//! (what the agent believes) and world-formula checks (what is actually the
//! case). Under one hypothesis both parts are crisp: the agent's subjective
//! probability of a world formula is its particle-belief mass on worlds
//! satisfying it, and the world check is evaluated in the hypothesis world.
//! A statement's score is then the posterior mass of hypotheses under which
//! it comes out true, optionally normalized against the prior mass so that
//! scores measure what the watched behavior itself revealed.
//!
//! The module also fits the free parameters, threshold values and the
//! Boltzmann temperature, to a set of human ratings by maximizing Pearson
//! correlation.

use std::collections::HashMap;

use crate::btom::Posterior;
use crate::elot::{
    BaseFormula, LoweredFormula, ProbTerm, Rhs, ThresholdName, ThresholdTable,
};
use crate::gridworld::state_satisfies;

/// Whether a statement talks about the moment of judgment or the start of
/// the episode ("the box was empty" vs "the box initially contained...").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    Initial,
    Current,
}

impl Tense {
    pub fn as_str(self) -> &'static str {
        match self {
            Tense::Initial => "initial",
            Tense::Current => "current",
        }
    }

    pub fn parse(s: &str) -> Option<Tense> {
        match s {
            "initial" => Some(Tense::Initial),
            "current" => Some(Tense::Current),
            _ => None,
        }
    }
}

/// What the reported score is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// Normalize against the statement's prior probability, so 0.5 means
    /// the behavior said nothing about the statement.
    Statement,
    /// Report raw posterior mass under a uniform prior over hypotheses.
    Worlds,
}

impl PriorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PriorMode::Statement => "statement",
            PriorMode::Worlds => "worlds",
        }
    }

    pub fn parse(s: &str) -> Option<PriorMode> {
        match s {
            "statement" => Some(PriorMode::Statement),
            "worlds" => Some(PriorMode::Worlds),
            _ => None,
        }
    }
}

/// Everything needed to evaluate a lowered statement under one hypothesis
/// at one moment.
pub struct EvalCtx<'a> {
    pub posterior: &'a Posterior,
    pub hypothesis: usize,
    pub time: usize,
    pub thresholds: &'a ThresholdTable,
}

/// The agent's subjective probability of a world formula: the fraction of
/// its belief particles sitting on worlds where the formula holds.
pub fn prob_of(ctx: &EvalCtx, body: &BaseFormula) -> f64 {
    ctx.posterior
        .particle_states(ctx.hypothesis, ctx.time)
        .into_iter()
        .filter(|(state, _)| state_satisfies(&ctx.posterior.map, state, body))
        .map(|(_, w)| w)
        .sum()
}

/// Whether a world formula holds in the hypothesis's actual world.
pub fn holds(ctx: &EvalCtx, body: &BaseFormula) -> bool {
    let state = ctx.posterior.world_state(ctx.hypothesis, ctx.time);
    state_satisfies(&ctx.posterior.map, state, body)
}

fn rhs_value(ctx: &EvalCtx, rhs: &Rhs) -> f64 {
    match rhs {
        Rhs::Threshold(name) => ctx.thresholds.get(*name),
        Rhs::MostThreshold(name) => ctx.thresholds.most_threshold(*name),
        Rhs::LeastThreshold(name) => ctx.thresholds.least_threshold(*name),
        Rhs::Prob(term) => prob_of(ctx, &term.body),
    }
}

/// Evaluates a lowered statement under one hypothesis. The single agent is
/// the planner itself, so the agent name inside probability terms does not
/// select anything further.
pub fn eval_lowered(ctx: &EvalCtx, formula: &LoweredFormula) -> bool {
    match formula {
        LoweredFormula::Cmp { op, lhs, rhs } => {
            let ProbTerm { body, .. } = lhs;
            op.compare(prob_of(ctx, body), rhs_value(ctx, rhs))
        }
        LoweredFormula::Holds(body) => holds(ctx, body),
        LoweredFormula::And(parts) => parts.iter().all(|p| eval_lowered(ctx, p)),
        LoweredFormula::Or(parts) => parts.iter().any(|p| eval_lowered(ctx, p)),
        LoweredFormula::Not(inner) => !eval_lowered(ctx, inner),
        LoweredFormula::Implies(a, b) => !eval_lowered(ctx, a) || eval_lowered(ctx, b),
        LoweredFormula::True => true,
        LoweredFormula::False => false,
    }
}

/// Posterior mass of hypotheses satisfying the statement, with weights
/// taken after `weight_t` actions and the world/belief snapshot taken at
/// `snapshot_t`. `None` when every hypothesis is already ruled out.
///
/// Statement truth never depends on the hypothesized goal, so hypotheses
/// sharing a world and a belief are evaluated once.
pub fn statement_mean(
    posterior: &Posterior,
    weight_t: usize,
    snapshot_t: usize,
    formula: &LoweredFormula,
    thresholds: &ThresholdTable,
) -> Option<f64> {
    let weights = posterior.weights_at(weight_t)?;
    let mut memo: HashMap<(usize, Vec<u8>), bool> = HashMap::new();
    let mut acc = 0.0;
    for (h, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let candidate = posterior.hypotheses[h].candidate;
        let counts = posterior.belief_at(h, snapshot_t).counts().to_vec();
        let truth = *memo.entry((candidate, counts)).or_insert_with(|| {
            let ctx = EvalCtx {
                posterior,
                hypothesis: h,
                time: snapshot_t,
                thresholds,
            };
            eval_lowered(&ctx, formula)
        });
        if truth {
            acc += w;
        }
    }
    Some(acc)
}

/// Rescales a posterior statement probability against its prior: the
/// probability that a perfectly calibrated judge would assign given only
/// what the behavior added. Degenerate priors pass the posterior through
/// unchanged; they force the posterior to the same extreme anyway.
pub fn normalized_likelihood(q: f64, prior: f64) -> f64 {
    if prior <= 0.0 || prior >= 1.0 {
        return q;
    }
    let r_true = q / prior;
    let r_false = (1.0 - q) / (1.0 - prior);
    if r_true + r_false == 0.0 {
        return 0.5;
    }
    r_true / (r_true + r_false)
}

/// A scored statement at one judgment point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatementScore {
    /// Posterior mass of the statement.
    pub raw: f64,
    /// Its mass under the pre-behavior prior (same snapshot moment).
    pub prior: f64,
    /// The reported score: normalized against the prior, or the raw mass
    /// when [`PriorMode::Worlds`] is selected.
    pub score: f64,
}

/// Scores one statement at one judgment point. Initial-tense statements
/// snapshot the world and belief at time zero; current-tense statements
/// snapshot at the judgment point itself. The prior uses the same snapshot
/// but pre-behavior weights, so it isolates what the actions revealed.
pub fn score_statement(
    posterior: &Posterior,
    judgment_t: usize,
    tense: Tense,
    formula: &LoweredFormula,
    thresholds: &ThresholdTable,
    mode: PriorMode,
) -> Option<StatementScore> {
    let snapshot_t = match tense {
        Tense::Initial => 0,
        Tense::Current => judgment_t,
    };
    let raw = statement_mean(posterior, judgment_t, snapshot_t, formula, thresholds)?;
    let prior = statement_mean(posterior, 0, snapshot_t, formula, thresholds)?;
    let score = match mode {
        PriorMode::Statement => normalized_likelihood(raw, prior),
        PriorMode::Worlds => raw,
    };
    Some(StatementScore { raw, prior, score })
}

/// One row of a human-ratings table.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRow {
    pub scenario: String,
    pub statement: String,
    pub judgment_point: String,
    pub rating: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RatingsError {
    #[error("ratings line {line}: expected 4 tab-separated fields, got {got}")]
    BadShape { line: usize, got: usize },
    #[error("ratings line {line}: unparseable rating `{text}`")]
    BadRating { line: usize, text: String },
    #[error("ratings line {line}: rating {value} outside [0, 1]")]
    OutOfRange { line: usize, value: f64 },
}

/// Parses a ratings table: one row per rating, tab-separated columns
/// `scenario  statement  judgment_point  mean_rating`, ratings in the unit
/// interval. Blank lines and lines starting with `#` are skipped.
pub fn parse_ratings(text: &str) -> Result<Vec<RatingRow>, RatingsError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(RatingsError::BadShape { line, got: fields.len() });
        }
        let rating: f64 = fields[3].parse().map_err(|_| RatingsError::BadRating {
            line,
            text: fields[3].to_owned(),
        })?;
        if !(0.0..=1.0).contains(&rating) {
            return Err(RatingsError::OutOfRange { line, value: rating });
        }
        rows.push(RatingRow {
            scenario: fields[0].to_owned(),
            statement: fields[1].to_owned(),
            judgment_point: fields[2].to_owned(),
            rating,
        });
    }
    Ok(rows)
}

/// One human-rated judgment for parameter fitting: a statement, where and
/// when it was judged, and the rating it received.
#[derive(Debug, Clone)]
pub struct FitCase {
    /// Index into the caller's posterior list.
    pub scenario: usize,
    pub judgment_t: usize,
    pub tense: Tense,
    pub formula: LoweredFormula,
    /// Human rating, any affine scale.
    pub rating: f64,
}

/// Model scores for every case, or `None` if any case hits a ruled-out
/// posterior.
pub fn model_scores(
    posteriors: &[Posterior],
    cases: &[FitCase],
    thresholds: &ThresholdTable,
    mode: PriorMode,
) -> Option<Vec<f64>> {
    cases
        .iter()
        .map(|case| {
            score_statement(
                &posteriors[case.scenario],
                case.judgment_t,
                case.tense,
                &case.formula,
                thresholds,
                mode,
            )
            .map(|s| s.score)
        })
        .collect()
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

fn fit_objective(
    posteriors: &[Posterior],
    cases: &[FitCase],
    thresholds: &ThresholdTable,
    mode: PriorMode,
) -> f64 {
    match model_scores(posteriors, cases, thresholds, mode) {
        Some(scores) => {
            let ratings: Vec<f64> = cases.iter().map(|c| c.rating).collect();
            pearson_r(&scores, &ratings)
        }
        None => f64::NEG_INFINITY,
    }
}

/// Fits threshold values to human ratings by coordinate ascent on Pearson
/// correlation. Each threshold is scanned over a grid of steps of 0.05
/// within 0.2 of its starting value (clipped to the unit interval), in
/// declaration order, keeping the current value on ties; sweeps repeat
/// until one passes with no change. Posteriors are unaffected by
/// thresholds, so they are computed once by the caller and reused.
pub fn fit_thresholds(
    posteriors: &[Posterior],
    cases: &[FitCase],
    start: &ThresholdTable,
    mode: PriorMode,
) -> (ThresholdTable, f64) {
    let grid_for = |center: f64| -> Vec<f64> {
        let mut values = Vec::new();
        for step in -4i32..=4 {
            let v = center + 0.05 * step as f64;
            if (0.0..=1.0).contains(&v) {
                values.push(v);
            }
        }
        values
    };

    let mut table = start.clone();
    let mut best = fit_objective(posteriors, cases, &table, mode);
    loop {
        let mut changed = false;
        for name in ThresholdName::ALL {
            let current = table.get(name);
            for v in grid_for(start.get(name)) {
                if v == current {
                    continue;
                }
                let mut trial = table.clone();
                trial.set(name, v).expect("grid values are clipped to range");
                let r = fit_objective(posteriors, cases, &trial, mode);
                if r > best {
                    best = r;
                    table = trial;
                    changed = true;
                }
            }
        }
        if !changed {
            return (table, best);
        }
    }
}

/// Inverse temperatures tried by [`fit_beta`]: a geometric ladder from
/// 0.5 to 4 in half-octave steps.
pub fn beta_grid() -> Vec<f64> {
    (0..=6).map(|j| 0.5 * 2f64.powf(j as f64 / 2.0)).collect()
}

/// Fits the Boltzmann temperature by grid search. `run` must produce the
/// posterior list for a given beta; the earliest best value wins ties.
pub fn fit_beta(
    run: &mut dyn FnMut(f64) -> Vec<Posterior>,
    cases: &[FitCase],
    thresholds: &ThresholdTable,
    mode: PriorMode,
) -> (f64, f64) {
    let mut best_beta = f64::NAN;
    let mut best_r = f64::NEG_INFINITY;
    for beta in beta_grid() {
        let posteriors = run(beta);
        let r = fit_objective(&posteriors, cases, thresholds, mode);
        if r > best_r {
            best_r = r;
            best_beta = beta;
        }
    }
    (best_beta, best_r)
}
