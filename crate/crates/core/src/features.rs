//! Regressors for the hangover models and design-matrix assembly.
//!
//! Exposure is defined from a team's previous game: where it was played
//! (the venue's MSA) and how long ago. The discrete indicator fires for
//! party-city venues inside the rest window; the placebo fires for the same
//! venues outside it. The continuous measure is the lagged log count of
//! music establishments in the last venue's MSA, rescaled by the training
//! maximum and zeroed outside the window.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, Timelike, Weekday};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{BoxScore, EstablishmentTable, League, TeamGameRow};
use crate::market::{devig_pair, implied_probability, CoverOutcome};
use crate::regress::dependent_columns;

/// Los Angeles-Long Beach-Anaheim and New York-Newark-Jersey City CBSA codes.
pub const DEFAULT_PARTY_MSAS: [&str; 2] = ["31080", "35620"];
pub const DEFAULT_WINDOW_HOURS: f64 = 24.0;
/// Largest gap, in quarters, tolerated when the exact lagged quarter is missing.
pub const NIGHTLIFE_FALLBACK_QUARTERS: i32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub party_msas: BTreeSet<String>,
    pub window_hours: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            party_msas: DEFAULT_PARTY_MSAS.iter().map(|s| s.to_string()).collect(),
            window_hours: DEFAULT_WINDOW_HOURS,
        }
    }
}

impl FeatureConfig {
    pub fn is_party_msa(&self, msa: &str) -> bool {
        self.party_msas.contains(msa)
    }
}

/// Hours between two kickoffs, using their UTC instants.
pub fn rest_hours(prev_start: &DateTime<FixedOffset>, cur_start: &DateTime<FixedOffset>) -> Result<f64> {
    let secs = (*cur_start - *prev_start).num_seconds();
    if secs <= 0 {
        return Err(Error::InvalidInput(format!(
            "non-positive gap between {prev_start} and {cur_start}"
        )));
    }
    Ok(secs as f64 / 3600.0)
}

pub fn party_discrete(last_venue_msa: &str, rest_hours: f64, config: &FeatureConfig) -> u8 {
    u8::from(config.is_party_msa(last_venue_msa) && rest_hours <= config.window_hours)
}

pub fn placebo_indicator(last_venue_msa: &str, rest_hours: f64, config: &FeatureConfig) -> u8 {
    u8::from(config.is_party_msa(last_venue_msa) && rest_hours > config.window_hours)
}

fn quarter_of(date: NaiveDate) -> u8 {
    (date.month0() / 3 + 1) as u8
}

/// Log music-establishment count for the MSA, lagged one year.
///
/// Uses the same quarter of the previous year; if that is absent, the latest
/// earlier quarter no more than [`NIGHTLIFE_FALLBACK_QUARTERS`] back. Zero
/// counts and gaps yield `None`.
pub fn nightlife_raw(msa_id: &str, game_date: NaiveDate, establishments: &EstablishmentTable) -> Option<f64> {
    let year = game_date.year() - 1;
    let quarter = quarter_of(game_date);
    let ((y, q), count) = establishments.latest_at_or_before(msa_id, year, quarter)?;
    let gap = (year - y) * 4 + i32::from(quarter) - i32::from(q);
    if gap > NIGHTLIFE_FALLBACK_QUARTERS || count == 0 {
        return None;
    }
    Some(f64::from(count).ln())
}

pub fn party_continuous(nightlife_raw: f64, rest_hours: f64, league_max_log: f64, window_hours: f64) -> Result<f64> {
    if !(league_max_log > 0.0) {
        return Err(Error::InvalidInput(format!(
            "league maximum log count must be positive, got {league_max_log}"
        )));
    }
    if rest_hours > window_hours {
        return Ok(0.0);
    }
    Ok((nightlife_raw / league_max_log).clamp(0.0, 1.0))
}

/// True when the night after a game on `date` is a Friday or Saturday night.
pub fn is_weekend_night(prev_game_local_date: NaiveDate) -> bool {
    matches!(prev_game_local_date.weekday(), Weekday::Fri | Weekday::Sat)
}

pub fn weekend_interact(value: f64, prev_game_local_date: NaiveDate) -> f64 {
    if is_weekend_night(prev_game_local_date) {
        value
    } else {
        0.0
    }
}

fn team_possessions(b: &BoxScore) -> f64 {
    f64::from(b.fga) + 0.44 * f64::from(b.fta) + f64::from(b.tov) - 0.5 * f64::from(b.reb)
}

/// Unstandardized changes of possession for one game, both teams combined.
pub fn possession_changes_raw(home: &BoxScore, away: &BoxScore) -> f64 {
    team_possessions(home) + team_possessions(away)
}

pub fn standardize(raw: f64, mean: f64, sd: f64) -> f64 {
    (raw - mean) / sd
}

/// Constants estimated on a training split and reused unchanged on evaluation splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub league_max_log: Option<f64>,
    pub possession_mean: Option<f64>,
    pub possession_sd: Option<f64>,
}

impl Standardization {
    pub fn fit<'a>(
        training: impl IntoIterator<Item = &'a TeamGameRow>,
        establishments: &EstablishmentTable,
    ) -> Self {
        let mut max_log: Option<f64> = None;
        let mut poss = Vec::new();
        for row in training {
            let Some(lag) = &row.lag else { continue };
            if let Some(v) = nightlife_raw(&lag.last_venue_msa, row.start.date_naive(), establishments) {
                max_log = Some(max_log.map_or(v, |m| m.max(v)));
            }
            if let Some((h, a)) = &lag.boxes {
                poss.push(possession_changes_raw(h, a));
            }
        }
        let (mean, sd) = if poss.len() >= 2 {
            let n = poss.len() as f64;
            let mean = poss.iter().sum::<f64>() / n;
            let var = poss.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            (Some(mean), (sd > 0.0).then_some(sd))
        } else {
            (None, None)
        };
        Self {
            league_max_log: max_log,
            possession_mean: mean,
            possession_sd: sd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    PartyDiscrete,
    PartyContinuous,
    NightlifeNoWeekend,
    Placebo,
    RestHours,
    RestDays,
    BackToBack,
    LagPossessionChanges,
    LogTravelDistance,
    EastWest,
    Jetlag,
    IsHome,
    GameHour,
    Weekend,
    BookmakerProb,
    BookmakerLogit,
}

impl Feature {
    pub const ALL: [Feature; 16] = [
        Feature::PartyDiscrete,
        Feature::PartyContinuous,
        Feature::NightlifeNoWeekend,
        Feature::Placebo,
        Feature::RestHours,
        Feature::RestDays,
        Feature::BackToBack,
        Feature::LagPossessionChanges,
        Feature::LogTravelDistance,
        Feature::EastWest,
        Feature::Jetlag,
        Feature::IsHome,
        Feature::GameHour,
        Feature::Weekend,
        Feature::BookmakerProb,
        Feature::BookmakerLogit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PartyDiscrete => "party_discrete",
            Feature::PartyContinuous => "party_continuous",
            Feature::NightlifeNoWeekend => "nightlife_no_weekend",
            Feature::Placebo => "placebo",
            Feature::RestHours => "rest_hours",
            Feature::RestDays => "rest_days",
            Feature::BackToBack => "back_to_back",
            Feature::LagPossessionChanges => "lag_possession_changes",
            Feature::LogTravelDistance => "log_travel_distance",
            Feature::EastWest => "east_west",
            Feature::Jetlag => "jetlag",
            Feature::IsHome => "is_home",
            Feature::GameHour => "game_hour",
            Feature::Weekend => "weekend",
            Feature::BookmakerProb => "bookmaker_prob",
            Feature::BookmakerLogit => "bookmaker_logit",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature `{s}`")))
    }
}

/// Every regressor for one team-game row that has a previous game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub party_discrete: u8,
    pub party_continuous: Option<f64>,
    pub nightlife_no_weekend: Option<f64>,
    pub placebo: u8,
    pub rest_hours: f64,
    pub back_to_back: u8,
    pub lag_possession_changes: Option<f64>,
    pub log_travel_distance: f64,
    pub east_west: f64,
    pub jetlag: f64,
    pub is_home: u8,
    pub game_hour: f64,
    pub weekend: u8,
    pub bookmaker_prob: Option<f64>,
}

impl FeatureVector {
    pub fn value(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::PartyDiscrete => Some(f64::from(self.party_discrete)),
            Feature::PartyContinuous => self.party_continuous,
            Feature::NightlifeNoWeekend => self.nightlife_no_weekend,
            Feature::Placebo => Some(f64::from(self.placebo)),
            Feature::RestHours => Some(self.rest_hours),
            Feature::RestDays => Some(self.rest_hours / 24.0),
            Feature::BackToBack => Some(f64::from(self.back_to_back)),
            Feature::LagPossessionChanges => self.lag_possession_changes,
            Feature::LogTravelDistance => Some(self.log_travel_distance),
            Feature::EastWest => Some(self.east_west),
            Feature::Jetlag => Some(self.jetlag),
            Feature::IsHome => Some(f64::from(self.is_home)),
            Feature::GameHour => Some(self.game_hour),
            Feature::Weekend => Some(f64::from(self.weekend)),
            Feature::BookmakerProb => self.bookmaker_prob,
            Feature::BookmakerLogit => self.bookmaker_prob.map(|p| (p / (1.0 - p)).ln()),
        }
    }
}

/// Read-only inputs shared by every row's feature computation.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub config: &'a FeatureConfig,
    pub standardization: &'a Standardization,
    pub establishments: &'a EstablishmentTable,
}

/// Features for one row; `None` for a team's first game of the season.
pub fn compute_features(row: &TeamGameRow, ctx: &FeatureContext<'_>) -> Result<Option<FeatureVector>> {
    let Some(lag) = &row.lag else {
        return Ok(None);
    };
    let cfg = ctx.config;
    let rest = lag.rest_hours;
    let prev_date = lag.prev_start.date_naive();

    let nightlife = match ctx.standardization.league_max_log {
        Some(max) => match nightlife_raw(&lag.last_venue_msa, row.start.date_naive(), ctx.establishments) {
            Some(raw) => Some(party_continuous(raw, rest, max, cfg.window_hours)?),
            // outside the window the measure is zero whether or not counts exist
            None if rest > cfg.window_hours => Some(0.0),
            None => None,
        },
        None => None,
    };
    let interacted = match row.league {
        League::Mlb => nightlife.map(|v| weekend_interact(v, prev_date)),
        League::Nba => nightlife,
    };

    let possession = match (&lag.boxes, ctx.standardization.possession_mean, ctx.standardization.possession_sd) {
        (Some((h, a)), Some(mean), Some(sd)) => Some(standardize(possession_changes_raw(h, a), mean, sd)),
        _ => None,
    };

    let bookmaker_prob = row.line.as_ref().and_then(|l| match (l.moneyline, l.opponent_moneyline) {
        (Some(own), Some(opp)) => devig_pair(implied_probability(own), implied_probability(opp))
            .ok()
            .map(|(p, _)| p),
        _ => None,
    });

    let local = row.start.time();
    Ok(Some(FeatureVector {
        party_discrete: party_discrete(&lag.last_venue_msa, rest, cfg),
        party_continuous: interacted,
        nightlife_no_weekend: nightlife,
        placebo: placebo_indicator(&lag.last_venue_msa, rest, cfg),
        rest_hours: rest,
        back_to_back: u8::from(rest <= cfg.window_hours),
        lag_possession_changes: possession,
        log_travel_distance: lag.travel.log_distance(),
        east_west: lag.travel.east_west,
        jetlag: lag.travel.jetlag,
        is_home: u8::from(row.is_home),
        game_hour: f64::from(local.hour()) + f64::from(local.minute()) / 60.0,
        weekend: u8::from(is_weekend_night(prev_date)),
        bookmaker_prob,
    }))
}

/// Computes features for every row. Rows are independent once the
/// standardization constants are fixed.
pub fn compute_all(rows: &[TeamGameRow], ctx: &FeatureContext<'_>) -> Result<Vec<Option<FeatureVector>>> {
    rows.iter().map(|r| compute_features(r, ctx)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MeetSpread,
    Win,
    PointsAdmitted,
    PointsScored,
}

impl Outcome {
    pub fn is_binary(self) -> bool {
        matches!(self, Outcome::MeetSpread | Outcome::Win)
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::MeetSpread => "Meet the Spread",
            Outcome::Win => "Probability of Winning",
            Outcome::PointsAdmitted => "Team Points Admitted",
            Outcome::PointsScored => "Team Points Scored",
        }
    }
}

fn default_party_cities() -> Vec<String> {
    DEFAULT_PARTY_MSAS.iter().map(|s| s.to_string()).collect()
}

fn default_window() -> f64 {
    DEFAULT_WINDOW_HOURS
}

/// A model: outcome, ordered regressors, and the exposure definition.
///
/// Loaded from TOML:
///
/// ```toml
/// name = "party-discrete"
/// outcome = "meet_spread"
/// features = ["party_discrete", "rest_hours", "is_home"]
/// team_fixed_effects = false
/// party_cities = ["31080", "35620"]
/// window_hours = 24
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub outcome: Outcome,
    pub features: Vec<Feature>,
    #[serde(default)]
    pub team_fixed_effects: bool,
    #[serde(default = "default_party_cities")]
    pub party_cities: Vec<String>,
    #[serde(default = "default_window")]
    pub window_hours: f64,
}

const NBA_CONTROLS: [Feature; 7] = [
    Feature::LagPossessionChanges,
    Feature::LogTravelDistance,
    Feature::EastWest,
    Feature::RestHours,
    Feature::GameHour,
    Feature::IsHome,
    Feature::Jetlag,
];

const MLB_CONTROLS: [Feature; 5] = [
    Feature::BookmakerProb,
    Feature::IsHome,
    Feature::RestDays,
    Feature::LogTravelDistance,
    Feature::Weekend,
];

impl ModelSpec {
    pub fn new(outcome: Outcome, features: Vec<Feature>) -> Self {
        Self {
            name: None,
            outcome,
            features,
            team_fixed_effects: false,
            party_cities: default_party_cities(),
            window_hours: DEFAULT_WINDOW_HOURS,
        }
    }

    fn with_lead(name: &str, outcome: Outcome, lead: Feature, controls: &[Feature]) -> Self {
        let mut features = vec![lead];
        features.extend_from_slice(controls);
        Self {
            name: Some(name.to_string()),
            ..Self::new(outcome, features)
        }
    }

    pub fn nba_party_discrete() -> Self {
        Self::with_lead("party-discrete", Outcome::MeetSpread, Feature::PartyDiscrete, &NBA_CONTROLS)
    }

    pub fn nba_party_continuous() -> Self {
        Self::with_lead("party-continuous", Outcome::MeetSpread, Feature::PartyContinuous, &NBA_CONTROLS)
    }

    pub fn nba_placebo() -> Self {
        Self::with_lead("placebo", Outcome::MeetSpread, Feature::Placebo, &NBA_CONTROLS)
    }

    pub fn nba_points_admitted() -> Self {
        Self::with_lead("points-admitted", Outcome::PointsAdmitted, Feature::PartyDiscrete, &NBA_CONTROLS)
    }

    pub fn mlb_nightlife() -> Self {
        Self::with_lead("nightlife", Outcome::Win, Feature::PartyContinuous, &MLB_CONTROLS)
    }

    pub fn mlb_nightlife_no_weekend() -> Self {
        Self::with_lead("nightlife-no-weekend", Outcome::Win, Feature::NightlifeNoWeekend, &MLB_CONTROLS)
    }

    /// Lean win model for walk-forward betting: treatment plus the market's log-odds.
    pub fn mlb_betting() -> Self {
        Self::with_lead("betting", Outcome::Win, Feature::PartyDiscrete, &[Feature::BookmakerLogit])
    }

    pub fn default_for(league: League) -> Vec<Self> {
        match league {
            League::Nba => vec![Self::nba_party_discrete(), Self::nba_party_continuous()],
            League::Mlb => vec![Self::mlb_nightlife(), Self::mlb_nightlife_no_weekend()],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ModelSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model spec is always representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for f in &self.features {
            if !seen.insert(*f) {
                return Err(Error::Config(format!("duplicate feature `{f}`")));
            }
        }
        if !(self.window_hours > 0.0 && self.window_hours.is_finite()) {
            return Err(Error::Config(format!("window_hours must be positive, got {}", self.window_hours)));
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            party_msas: self.party_cities.iter().cloned().collect(),
            window_hours: self.window_hours,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.outcome.label().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    Intercept,
    Feature(Feature),
    Team(String),
}

impl Column {
    pub fn name(&self) -> String {
        match self {
            Column::Intercept => "intercept".to_string(),
            Column::Feature(f) => f.name().to_string(),
            Column::Team(t) => format!("team:{t}"),
        }
    }
}

/// Column layout of a fitted design; used to encode evaluation rows identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignLayout {
    pub columns: Vec<Column>,
    pub reference_team: Option<String>,
}

pub const EXCLUDED_SEASON_OPENER: &str = "season_opener";
pub const EXCLUDED_PUSH: &str = "push";
pub const EXCLUDED_MISSING_OUTCOME: &str = "missing_outcome";

impl DesignLayout {
    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(Column::name).collect()
    }

    fn features(&self) -> impl Iterator<Item = Feature> + '_ {
        self.columns.iter().filter_map(|c| match c {
            Column::Feature(f) => Some(*f),
            _ => None,
        })
    }

    /// Encodes one row. `Ok(None)` when a required feature is missing.
    pub fn encode(&self, team_id: &str, features: &FeatureVector) -> Result<Option<Vec<f64>>> {
        if let Some(reference) = &self.reference_team {
            let known = reference == team_id
                || self.columns.iter().any(|c| matches!(c, Column::Team(t) if t == team_id));
            if !known {
                return Err(Error::UnfittedFeature(format!("team:{team_id}")));
            }
        }
        let mut out = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let v = match c {
                Column::Intercept => 1.0,
                Column::Feature(f) => match features.value(*f) {
                    Some(v) => v,
                    None => return Ok(None),
                },
                Column::Team(t) => f64::from(u8::from(t == team_id)),
            };
            out.push(v);
        }
        Ok(Some(out))
    }

    /// First reason a row cannot be used, if any.
    pub fn exclusion(&self, row: &TeamGameRow, features: Option<&FeatureVector>) -> Option<String> {
        if row.line.is_none() {
            return Some(crate::ingest::EXCLUDED_MISSING_LINE.to_string());
        }
        let fv = match features {
            Some(fv) => fv,
            None => return Some(EXCLUDED_SEASON_OPENER.to_string()),
        };
        self.features()
            .find(|f| fv.value(*f).is_none())
            .map(|f| format!("missing_feature:{f}"))
    }
}

pub fn outcome_value(row: &TeamGameRow, outcome: Outcome) -> std::result::Result<f64, &'static str> {
    match outcome {
        Outcome::MeetSpread => match row.covered {
            Some(CoverOutcome::Cover) => Ok(1.0),
            Some(CoverOutcome::NoCover) => Ok(0.0),
            Some(CoverOutcome::Push) => Err(EXCLUDED_PUSH),
            None => Err(EXCLUDED_MISSING_OUTCOME),
        },
        Outcome::Win => Ok(f64::from(u8::from(row.won))),
        Outcome::PointsAdmitted => Ok(f64::from(row.opponent_score)),
        Outcome::PointsScored => Ok(f64::from(row.team_score)),
    }
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Index into the input rows for each matrix row.
    pub row_index: Vec<usize>,
    pub layout: DesignLayout,
    pub exclusions: BTreeMap<String, usize>,
}

impl DesignMatrix {
    pub fn column_names(&self) -> Vec<String> {
        self.layout.names()
    }

    pub fn excluded_total(&self) -> usize {
        self.exclusions.values().sum()
    }
}

/// Assembles `(X, y)` with an intercept in column 0 and, optionally, team
/// dummies (first team alphabetically is the reference level).
pub fn build_design_matrix(
    rows: &[TeamGameRow],
    features: &[Option<FeatureVector>],
    spec: &ModelSpec,
) -> Result<DesignMatrix> {
    spec.validate()?;
    if rows.len() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: features.len(),
        });
    }
    let mut columns = vec![Column::Intercept];
    columns.extend(spec.features.iter().map(|f| Column::Feature(*f)));
    let mut layout = DesignLayout {
        columns,
        reference_team: None,
    };

    let mut exclusions: BTreeMap<String, usize> = BTreeMap::new();
    let mut kept: Vec<(usize, f64)> = Vec::new();
    for (i, (row, fv)) in rows.iter().zip(features).enumerate() {
        if let Some(reason) = layout.exclusion(row, fv.as_ref()) {
            *exclusions.entry(reason).or_default() += 1;
            continue;
        }
        match outcome_value(row, spec.outcome) {
            Ok(y) => kept.push((i, y)),
            Err(reason) => *exclusions.entry(reason.to_string()).or_default() += 1,
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }

    if spec.team_fixed_effects {
        let teams: BTreeSet<&str> = kept.iter().map(|(i, _)| rows[*i].team_id.as_str()).collect();
        let mut teams = teams.into_iter();
        layout.reference_team = teams.next().map(str::to_string);
        layout.columns.extend(teams.map(|t| Column::Team(t.to_string())));
    }

    let k = layout.columns.len();
    let mut x = DMatrix::zeros(kept.len(), k);
    let mut y = DVector::zeros(kept.len());
    for (r, (i, yi)) in kept.iter().enumerate() {
        let fv = features[*i].as_ref().expect("kept rows have features");
        let encoded = layout
            .encode(&rows[*i].team_id, fv)?
            .expect("kept rows have every feature");
        for (c, v) in encoded.into_iter().enumerate() {
            x[(r, c)] = v;
        }
        y[r] = *yi;
    }

    let dependent = dependent_columns(&x);
    if !dependent.is_empty() {
        let names = layout.names();
        return Err(Error::RankDeficient(dependent.into_iter().map(|j| names[j].clone()).collect()));
    }

    Ok(DesignMatrix {
        x,
        y,
        row_index: kept.into_iter().map(|(i, _)| i).collect(),
        layout,
        exclusions,
    })
}
