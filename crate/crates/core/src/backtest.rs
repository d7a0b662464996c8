//! Walk-forward evaluation and flat-stake betting.
//!
//! Each season is scored by a model fitted on strictly earlier seasons, with
//! standardization constants taken from that training split. MLB games are
//! bet with money-lines; NBA seasons report classification metrics.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    build_design_matrix, compute_all, outcome_value, DesignLayout, FeatureContext, ModelSpec, Standardization,
};
use crate::ingest::{timestamp_string, Dataset, League, TeamGameRow};
use crate::market::{bet_expected_value, devig_pair, implied_probability, winning_profit, Cents, MoneyLine};
use crate::regress::{fit_logistic, fit_ols, linear_predictor, sigmoid, LogisticOptions, ModelFit};

pub const DEFAULT_STAKE: Cents = Cents(10_000);

/// A fitted model with everything needed to score new rows the same way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub fit: ModelFit,
    pub layout: DesignLayout,
    pub standardization: Standardization,
    pub exclusions: BTreeMap<String, usize>,
}

impl FittedModel {
    /// Linear predictor for a row; `Ok(None)` when the row cannot be scored.
    pub fn score(&self, row: &TeamGameRow, dataset: &Dataset) -> Result<Option<f64>> {
        let cfg = self.spec.feature_config();
        let ctx = FeatureContext {
            config: &cfg,
            standardization: &self.standardization,
            establishments: &dataset.establishments,
        };
        let Some(fv) = crate::features::compute_features(row, &ctx)? else {
            return Ok(None);
        };
        match self.layout.encode(&row.team_id, &fv)? {
            Some(x) => Ok(Some(linear_predictor(&self.fit, &x)?)),
            None => Ok(None),
        }
    }
}

/// Fits `spec` on `rows`; standardization constants come from `rows` alone.
pub fn fit_model(dataset: &Dataset, rows: &[TeamGameRow], spec: &ModelSpec) -> Result<FittedModel> {
    let cfg = spec.feature_config();
    let standardization = Standardization::fit(rows, &dataset.establishments);
    let ctx = FeatureContext {
        config: &cfg,
        standardization: &standardization,
        establishments: &dataset.establishments,
    };
    let feats = compute_all(rows, &ctx)?;
    let dm = build_design_matrix(rows, &feats, spec)?;
    let names = dm.column_names();
    let fit = if spec.outcome.is_binary() {
        fit_logistic(&dm.x, &dm.y, &names, &LogisticOptions::default())?
    } else {
        fit_ols(&dm.x, &dm.y, &names)?
    };
    Ok(FittedModel {
        spec: spec.clone(),
        fit,
        layout: dm.layout,
        standardization,
        exclusions: dm.exclusions,
    })
}

pub fn fit_dataset(dataset: &Dataset, spec: &ModelSpec) -> Result<FittedModel> {
    fit_model(dataset, &dataset.rows, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Home,
    Away,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetOutcome {
    Win,
    Loss,
    Push,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetEntry {
    pub game_id: String,
    pub timestamp: DateTime<FixedOffset>,
    pub side: Side,
    pub team_id: String,
    pub stake: Cents,
    pub moneyline: MoneyLine,
    pub model_prob: f64,
    pub expected_value: Cents,
    pub outcome: BetOutcome,
    pub pnl: Cents,
}

pub fn settle(outcome: BetOutcome, moneyline: MoneyLine, stake: Cents) -> Cents {
    match outcome {
        BetOutcome::Win => winning_profit(moneyline, stake),
        BetOutcome::Loss => -stake,
        BetOutcome::Push => Cents(0),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BetLedger {
    pub entries: Vec<BetEntry>,
}

impl BetLedger {
    pub fn new(entries: Vec<BetEntry>) -> Self {
        Self { entries }
    }

    pub fn bet_count(&self) -> usize {
        self.entries.len()
    }

    pub fn final_profit(&self) -> Cents {
        self.entries.iter().map(|e| e.pnl).sum()
    }

    pub fn cumulative(&self) -> Vec<Cents> {
        let mut total = Cents(0);
        self.entries
            .iter()
            .map(|e| {
                total += e.pnl;
                total
            })
            .collect()
    }

    pub fn worst_out_of_pocket(&self) -> Cents {
        self.cumulative().into_iter().fold(Cents(0), |m, c| if c < m { c } else { m })
    }

    /// Recomputes every pnl from outcome, price and stake.
    pub fn resettle(&mut self) {
        for e in &mut self.entries {
            e.pnl = settle(e.outcome, e.moneyline, e.stake);
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from(
            "game_id,timestamp,side,team_id,stake,moneyline,model_prob,expected_value,outcome,pnl\n",
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{},{},{}\n",
                e.game_id,
                timestamp_string(&e.timestamp),
                match e.side {
                    Side::Home => "home",
                    Side::Away => "away",
                },
                e.team_id,
                e.stake,
                e.moneyline.odds(),
                e.model_prob,
                e.expected_value,
                match e.outcome {
                    BetOutcome::Win => "win",
                    BetOutcome::Loss => "loss",
                    BetOutcome::Push => "push",
                },
                e.pnl
            ));
        }
        write_text(path, &out)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub timestamp: DateTime<FixedOffset>,
    pub cumulative_profit: Cents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitCurve {
    pub points: Vec<CurvePoint>,
    pub worst: Cents,
    /// Index of the first point reaching `worst`, when it is below zero.
    pub worst_index: Option<usize>,
}

pub fn profit_curve(ledger: &BetLedger) -> ProfitCurve {
    let mut points = Vec::with_capacity(ledger.entries.len());
    let mut worst = Cents(0);
    let mut worst_index = None;
    for (i, (e, c)) in ledger.entries.iter().zip(ledger.cumulative()).enumerate() {
        if c < worst {
            worst = c;
            worst_index = Some(i);
        }
        points.push(CurvePoint {
            timestamp: e.timestamp,
            cumulative_profit: c,
        });
    }
    ProfitCurve {
        points,
        worst,
        worst_index,
    }
}

impl ProfitCurve {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::from("timestamp,cumulative_profit\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", timestamp_string(&p.timestamp), p.cumulative_profit));
        }
        write_text(path.as_ref(), &out)
    }
}

/// Where win probabilities come from when betting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Probabilities from the walk-forward model.
    Model,
    /// The de-vigged market probability itself; never finds value.
    MarketImplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub log_loss: f64,
    pub brier: f64,
    pub mean_prediction: f64,
    pub base_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonResult {
    pub season: i32,
    pub league: League,
    pub train_seasons: Vec<i32>,
    pub ledger: BetLedger,
    pub metrics: Option<ClassificationMetrics>,
    /// Games or rows left unscored, by reason.
    pub skipped: BTreeMap<String, usize>,
}

impl SeasonResult {
    pub fn final_profit(&self) -> Cents {
        self.ledger.final_profit()
    }

    pub fn worst_out_of_pocket(&self) -> Cents {
        self.ledger.worst_out_of_pocket()
    }
}

/// Home win probability from the two own-perspective model scores.
///
/// The home row's prediction and the complement of the away row's are
/// averaged, so the fitted slope on shared controls is not counted twice.
pub fn combine_sides(home_score: f64, away_score: f64) -> f64 {
    0.5 * (sigmoid(home_score) + 1.0 - sigmoid(away_score))
}

/// Picks the side to back, if any: the larger positive EV, home on ties.
pub fn choose_side(
    p_home: f64,
    home_ml: MoneyLine,
    away_ml: MoneyLine,
    stake: Cents,
) -> Result<Option<(Side, Cents)>> {
    let ev_home = bet_expected_value(p_home, home_ml, stake)?;
    let ev_away = bet_expected_value(1.0 - p_home, away_ml, stake)?;
    let best = if ev_home >= ev_away {
        (Side::Home, ev_home)
    } else {
        (Side::Away, ev_away)
    };
    Ok(best.1.is_positive().then_some(best))
}

fn bump(map: &mut BTreeMap<String, usize>, key: &str) {
    *map.entry(key.to_string()).or_default() += 1;
}

/// Indices of (home row, away row) per game, in chronological order.
fn game_pairs(rows: &[TeamGameRow]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < rows.len() {
        if rows[i].game_id == rows[i + 1].game_id {
            let (h, a) = if rows[i].is_home { (i, i + 1) } else { (i + 1, i) };
            out.push((h, a));
            i += 2;
        } else {
            i += 1;
        }
    }
    out
}

fn bet_season(
    dataset: &Dataset,
    rows: &[TeamGameRow],
    model: Option<&FittedModel>,
    stake: Cents,
) -> Result<(BetLedger, BTreeMap<String, usize>)> {
    let mut entries = Vec::new();
    let mut skipped = BTreeMap::new();
    for (h, a) in game_pairs(rows) {
        let (home, away) = (&rows[h], &rows[a]);
        let (Some(hl), Some(al)) = (
            home.line.as_ref().and_then(|l| l.moneyline),
            away.line.as_ref().and_then(|l| l.moneyline),
        ) else {
            bump(&mut skipped, "missing_line");
            continue;
        };
        let (market_home, _) = devig_pair(implied_probability(hl), implied_probability(al))?;
        let p_home = match model {
            None => market_home,
            Some(m) => match (m.score(home, dataset)?, m.score(away, dataset)?) {
                (Some(sh), Some(sa)) => combine_sides(sh, sa),
                _ => {
                    bump(&mut skipped, "unscored");
                    continue;
                }
            },
        };
        let Some((side, ev)) = choose_side(p_home, hl, al, stake)? else {
            continue;
        };
        let (row, ml, p) = match side {
            Side::Home => (home, hl, p_home),
            Side::Away => (away, al, 1.0 - p_home),
        };
        let outcome = match row.team_score.cmp(&row.opponent_score) {
            std::cmp::Ordering::Greater => BetOutcome::Win,
            std::cmp::Ordering::Less => BetOutcome::Loss,
            std::cmp::Ordering::Equal => BetOutcome::Push,
        };
        entries.push(BetEntry {
            game_id: row.game_id.clone(),
            timestamp: row.start,
            side,
            team_id: row.team_id.clone(),
            stake,
            moneyline: ml,
            model_prob: p,
            expected_value: ev,
            outcome,
            pnl: settle(outcome, ml, stake),
        });
    }
    Ok((BetLedger::new(entries), skipped))
}

fn classify_season(
    dataset: &Dataset,
    rows: &[TeamGameRow],
    model: &FittedModel,
) -> Result<(ClassificationMetrics, BTreeMap<String, usize>)> {
    let mut skipped = BTreeMap::new();
    let (mut n, mut correct, mut ll, mut brier, mut sum_p, mut sum_y) = (0usize, 0usize, 0.0, 0.0, 0.0, 0.0);
    for row in rows {
        let y = match outcome_value(row, model.spec.outcome) {
            Ok(y) => y,
            Err(reason) => {
                bump(&mut skipped, reason);
                continue;
            }
        };
        if row.line.is_none() {
            bump(&mut skipped, "missing_line");
            continue;
        }
        let Some(eta) = model.score(row, dataset)? else {
            bump(&mut skipped, "unscored");
            continue;
        };
        let p = sigmoid(eta);
        n += 1;
        correct += usize::from((p > 0.5) == (y > 0.5));
        ll -= if y > 0.5 { p.ln() } else { (1.0 - p).ln() };
        brier += (p - y).powi(2);
        sum_p += p;
        sum_y += y;
    }
    let nf = n.max(1) as f64;
    Ok((
        ClassificationMetrics {
            n,
            accuracy: correct as f64 / nf,
            log_loss: ll / nf,
            brier: brier / nf,
            mean_prediction: sum_p / nf,
            base_rate: sum_y / nf,
        },
        skipped,
    ))
}

/// Trains on all seasons before each evaluated season and scores it.
///
/// The first season only ever serves as training data.
pub fn walk_forward(dataset: &Dataset, spec: &ModelSpec, policy: Policy) -> Result<Vec<SeasonResult>> {
    walk_forward_with_stake(dataset, spec, policy, DEFAULT_STAKE)
}

pub fn walk_forward_with_stake(
    dataset: &Dataset,
    spec: &ModelSpec,
    policy: Policy,
    stake: Cents,
) -> Result<Vec<SeasonResult>> {
    spec.validate()?;
    let seasons = dataset.seasons();
    let Some(first) = seasons.first().copied() else {
        return Err(Error::EmptySample);
    };
    if seasons.len() < 2 {
        return Err(Error::NoTrainingData(first));
    }
    if dataset.league == League::Nba && !spec.outcome.is_binary() {
        return Err(Error::Config("NBA evaluation needs a binary outcome".into()));
    }
    let mut results = Vec::with_capacity(seasons.len() - 1);
    for (i, &season) in seasons.iter().enumerate().skip(1) {
        let training: Vec<TeamGameRow> = dataset.rows.iter().filter(|r| r.season_id < season).cloned().collect();
        let current: Vec<TeamGameRow> = dataset.rows.iter().filter(|r| r.season_id == season).cloned().collect();
        let model = match policy {
            Policy::MarketImplied if dataset.league == League::Mlb => None,
            _ => Some(fit_model(dataset, &training, spec).map_err(|e| match e {
                Error::EmptySample => Error::NoTrainingData(season),
                other => other,
            })?),
        };
        let (ledger, metrics, skipped) = match dataset.league {
            League::Mlb => {
                let (ledger, skipped) = bet_season(dataset, &current, model.as_ref(), stake)?;
                (ledger, None, skipped)
            }
            League::Nba => {
                let model = model.as_ref().expect("NBA always fits");
                let (metrics, skipped) = classify_season(dataset, &current, model)?;
                (BetLedger::default(), Some(metrics), skipped)
            }
        };
        results.push(SeasonResult {
            season,
            league: dataset.league,
            train_seasons: seasons[..i].to_vec(),
            ledger,
            metrics,
            skipped,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::DateTime;

    fn entry(pnl: i64) -> BetEntry {
        BetEntry {
            game_id: "g".into(),
            timestamp: DateTime::parse_from_rfc3339("2014-06-01T19:05:00-04:00").unwrap(),
            side: Side::Home,
            team_id: "NYY".into(),
            stake: DEFAULT_STAKE,
            moneyline: MoneyLine::new(-110).unwrap(),
            model_prob: 0.55,
            expected_value: Cents(500),
            outcome: if pnl > 0 { BetOutcome::Win } else { BetOutcome::Loss },
            pnl: Cents(pnl),
        }
    }

    #[test]
    fn curve_fixtures() {
        let empty = profit_curve(&BetLedger::default());
        assert!(empty.points.is_empty());
        assert_eq!(empty.worst, Cents(0));

        let ledger = BetLedger::new(vec![entry(5000), entry(-10000), entry(2500)]);
        let curve = profit_curve(&ledger);
        let cum: Vec<_> = curve.points.iter().map(|p| p.cumulative_profit).collect();
        assert_eq!(cum, vec![Cents(5000), Cents(-5000), Cents(-2500)]);
        assert_eq!(curve.worst, Cents(-5000));
        assert_eq!(curve.worst_index, Some(1));
        assert_eq!(ledger.final_profit(), Cents(-2500));
    }

    #[test]
    fn resettle_is_idempotent() {
        let mut ledger = BetLedger::new(vec![entry(1), entry(-1)]);
        ledger.resettle();
        let once = ledger.clone();
        ledger.resettle();
        assert_eq!(ledger, once);
        assert_eq!(ledger.entries[0].pnl, Cents(9091));
        assert_eq!(ledger.entries[1].pnl, Cents(-10000));
        assert_eq!(settle(BetOutcome::Push, MoneyLine::new(150).unwrap(), DEFAULT_STAKE), Cents(0));
    }

    #[test]
    fn market_probability_never_finds_value() {
        for (h, a) in [(-110, -110), (150, -170), (-300, 250), (105, -125)] {
            let (h, a) = (MoneyLine::new(h).unwrap(), MoneyLine::new(a).unwrap());
            let (p, _) = devig_pair(implied_probability(h), implied_probability(a)).unwrap();
            assert_eq!(choose_side(p, h, a, DEFAULT_STAKE).unwrap(), None);
        }
    }

    #[test]
    fn combining_consistent_sides_returns_their_probability() {
        let l = 0.62_f64.ln() - 0.38_f64.ln();
        assert!((combine_sides(l, -l) - 0.62).abs() < 1e-12);
        assert!(combine_sides(l + 0.3, -l) > 0.62);
        assert!(combine_sides(l, -l + 0.3) < 0.62);
    }

    #[test]
    fn ties_on_expected_value_go_home() {
        let ml = MoneyLine::new(120).unwrap();
        let pick = choose_side(0.5, ml, ml, DEFAULT_STAKE).unwrap();
        assert_eq!(pick.map(|p| p.0), Some(Side::Home));
    }
}
