//! Synthetic leagues with a planted hangover effect.
//!
//! Outcomes follow a logit model in team strength, home advantage and
//! `delta * (T_home - T_away)`, where `T` is the party indicator computed
//! exactly as the feature builder does. Lines are set from a bookmaker's
//! noisy view of the same model, optionally blind to `delta`.

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{party_discrete, rest_hours, FeatureConfig, DEFAULT_PARTY_MSAS, DEFAULT_WINDOW_HOURS};
use crate::geo::Coordinate;
use crate::ingest::{
    BoxScore, EstablishmentCount, GameRecord, InputTables, League, LineRecord, StadiumRecord,
};
use crate::market::{MoneyLine, SpreadLine};

/// Minimum separation the generator guarantees between a team's games.
pub const MIN_GAP_HOURS: f64 = 18.0;
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Clone, Copy)]
pub struct TeamSite {
    pub id: &'static str,
    pub latitude: f64,
    pub longitude: f64,
    pub msa: &'static str,
    pub utc_offset_hours: i32,
}

const fn site(id: &'static str, latitude: f64, longitude: f64, msa: &'static str, utc_offset_hours: i32) -> TeamSite {
    TeamSite {
        id,
        latitude,
        longitude,
        msa,
        utc_offset_hours,
    }
}

/// Arena locations, CBSA codes and standard-time offsets. Toronto has no
/// establishment series.
pub const NBA_SITES: [TeamSite; 30] = [
    site("ATL", 33.757, -84.396, "12060", -5),
    site("BKN", 40.683, -73.976, "35620", -5),
    site("BOS", 42.366, -71.062, "14460", -5),
    site("CHA", 35.225, -80.839, "16740", -5),
    site("CHI", 41.881, -87.674, "16980", -6),
    site("CLE", 41.496, -81.688, "17460", -5),
    site("DAL", 32.790, -96.810, "19100", -6),
    site("DEN", 39.749, -105.008, "19740", -7),
    site("DET", 42.341, -83.055, "19820", -5),
    site("GSW", 37.768, -122.388, "41860", -8),
    site("HOU", 29.751, -95.362, "26420", -6),
    site("IND", 39.764, -86.155, "26900", -5),
    site("LAC", 34.043, -118.267, "31080", -8),
    site("LAL", 34.043, -118.267, "31080", -8),
    site("MEM", 35.138, -90.051, "32820", -6),
    site("MIA", 25.781, -80.187, "33100", -5),
    site("MIL", 43.044, -87.917, "33340", -6),
    site("MIN", 44.979, -93.276, "33460", -6),
    site("NOP", 29.949, -90.082, "35380", -6),
    site("NYK", 40.751, -73.994, "35620", -5),
    site("OKC", 35.463, -97.515, "36420", -6),
    site("ORL", 28.539, -81.384, "36740", -5),
    site("PHI", 39.901, -75.172, "37980", -5),
    site("PHX", 33.446, -112.071, "38060", -7),
    site("POR", 45.532, -122.667, "38900", -8),
    site("SAC", 38.649, -121.518, "40900", -8),
    site("SAS", 29.427, -98.438, "41700", -6),
    site("TOR", 43.643, -79.379, "TOR", -5),
    site("UTA", 40.768, -111.901, "41620", -7),
    site("WAS", 38.898, -77.021, "47900", -5),
];

pub const MLB_SITES: [TeamSite; 30] = [
    site("ARI", 33.445, -112.067, "38060", -7),
    site("ATL", 33.735, -84.390, "12060", -5),
    site("BAL", 39.284, -76.622, "12580", -5),
    site("BOS", 42.346, -71.097, "14460", -5),
    site("CHC", 41.948, -87.656, "16980", -6),
    site("CIN", 39.097, -84.507, "17140", -5),
    site("CLE", 41.496, -81.685, "17460", -5),
    site("COL", 39.756, -104.994, "19740", -7),
    site("CWS", 41.830, -87.634, "16980", -6),
    site("DET", 42.339, -83.049, "19820", -5),
    site("HOU", 29.757, -95.355, "26420", -6),
    site("KC", 39.051, -94.480, "28140", -6),
    site("LAA", 33.800, -117.883, "31080", -8),
    site("LAD", 34.074, -118.240, "31080", -8),
    site("MIA", 25.778, -80.220, "33100", -5),
    site("MIL", 43.028, -87.971, "33340", -6),
    site("MIN", 44.982, -93.278, "33460", -6),
    site("NYM", 40.757, -73.846, "35620", -5),
    site("NYY", 40.829, -73.926, "35620", -5),
    site("OAK", 37.752, -122.201, "41860", -8),
    site("PHI", 39.906, -75.166, "37980", -5),
    site("PIT", 40.447, -80.006, "38300", -5),
    site("SD", 32.707, -117.157, "41740", -8),
    site("SEA", 47.591, -122.332, "42660", -8),
    site("SF", 37.779, -122.389, "41860", -8),
    site("STL", 38.623, -90.193, "41180", -6),
    site("TB", 27.768, -82.653, "45300", -5),
    site("TEX", 32.751, -97.083, "19100", -6),
    site("TOR", 43.641, -79.389, "TOR", -5),
    site("WSH", 38.873, -77.007, "47900", -5),
];

/// MSAs without establishment data.
const NO_ESTABLISHMENT_DATA: [&str; 1] = ["TOR"];

pub fn sites(league: League) -> &'static [TeamSite; 30] {
    match league {
        League::Nba => &NBA_SITES,
        League::Mlb => &MLB_SITES,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NightlifeConfig {
    /// Mean of log establishment counts across ordinary MSAs.
    pub log_mean: f64,
    pub log_sd: f64,
    /// Added to the log mean for party MSAs.
    pub party_log_boost: f64,
    /// Quarter-to-quarter multiplicative noise on the log scale.
    pub quarterly_sd: f64,
}

impl Default for NightlifeConfig {
    fn default() -> Self {
        Self {
            log_mean: 5.5,
            log_sd: 0.5,
            party_log_boost: 1.5,
            quarterly_sd: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub league: League,
    pub seed: u64,
    pub n_teams: usize,
    pub n_seasons: usize,
    pub first_season: i32,
    pub games_per_team: usize,
    /// NBA only: calendar days over which the regular season is spread.
    pub season_days: usize,
    /// NBA only: chance a team that played yesterday plays again today.
    pub back_to_back_rate: f64,
    /// MLB only: games per series.
    pub series_length: usize,
    /// MLB only: chance of a league-wide off day between series.
    pub off_day_rate: f64,
    /// Standard deviation of team strength on the logit scale.
    pub strength_sd: f64,
    pub home_advantage: f64,
    /// True hangover coefficient on the logit scale.
    pub delta: f64,
    pub bookmaker_noise_sd: f64,
    pub market_aware: bool,
    /// Total overround added to money-line prices.
    pub vig: f64,
    /// NBA points per unit of logit.
    pub points_per_logit: f64,
    pub party_msas: Vec<String>,
    pub window_hours: f64,
    pub nightlife: NightlifeConfig,
}

impl SynthConfig {
    pub fn nba(seed: u64) -> Self {
        Self {
            league: League::Nba,
            seed,
            n_teams: 30,
            n_seasons: 4,
            first_season: 2011,
            games_per_team: 82,
            season_days: 165,
            back_to_back_rate: 0.3,
            series_length: 1,
            off_day_rate: 0.0,
            strength_sd: 0.6,
            home_advantage: 0.4,
            delta: -0.5,
            bookmaker_noise_sd: 0.1,
            market_aware: false,
            vig: 0.0,
            points_per_logit: 6.5,
            party_msas: DEFAULT_PARTY_MSAS.iter().map(|s| s.to_string()).collect(),
            window_hours: DEFAULT_WINDOW_HOURS,
            nightlife: NightlifeConfig::default(),
        }
    }

    pub fn mlb(seed: u64) -> Self {
        Self {
            league: League::Mlb,
            games_per_team: 162,
            season_days: 183,
            back_to_back_rate: 0.0,
            series_length: 3,
            off_day_rate: 0.25,
            strength_sd: 0.3,
            home_advantage: 0.15,
            vig: 0.045,
            ..Self::nba(seed)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SynthConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("synth config is always representable in TOML")
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            party_msas: self.party_msas.iter().cloned().collect(),
            window_hours: self.window_hours,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_teams < 2 || !self.n_teams.is_multiple_of(2) || self.n_teams > 30 {
            return bad(format!("n_teams must be even and in [2, 30], got {}", self.n_teams));
        }
        if self.n_seasons == 0 || self.games_per_team == 0 {
            return bad("n_seasons and games_per_team must be positive".into());
        }
        for (name, v) in [
            ("strength_sd", self.strength_sd),
            ("bookmaker_noise_sd", self.bookmaker_noise_sd),
            ("nightlife.log_sd", self.nightlife.log_sd),
            ("nightlife.quarterly_sd", self.nightlife.quarterly_sd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite non-negative value, got {v}"));
            }
        }
        for (name, v) in [
            ("home_advantage", self.home_advantage),
            ("delta", self.delta),
            ("nightlife.log_mean", self.nightlife.log_mean),
            ("nightlife.party_log_boost", self.nightlife.party_log_boost),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(0.0..0.25).contains(&self.vig) {
            return bad(format!("vig must lie in [0, 0.25), got {}", self.vig));
        }
        if !(self.points_per_logit > 0.0) {
            return bad("points_per_logit must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.back_to_back_rate) || !(0.0..1.0).contains(&self.off_day_rate) {
            return bad("rates must be probabilities".into());
        }
        if !(self.window_hours > 0.0) {
            return bad("window_hours must be positive".into());
        }
        match self.league {
            League::Nba => {
                self.nba_play_rate()?;
            }
            League::Mlb => {
                if self.series_length == 0 {
                    return bad("series_length must be positive".into());
                }
                if self.n_teams < 2 {
                    return bad("need at least two teams".into());
                }
            }
        }
        Ok(())
    }

    /// Probability a rested team plays on a given day, chosen so the expected
    /// share of playing days matches `games_per_team / season_days`.
    fn nba_play_rate(&self) -> Result<f64> {
        let pi = self.games_per_team as f64 / self.season_days as f64;
        let r = self.back_to_back_rate;
        if self.season_days == 0 || pi >= 1.0 {
            return Err(Error::Config(format!(
                "infeasible schedule: {} games in {} days",
                self.games_per_team, self.season_days
            )));
        }
        let x = pi * (1.0 - r) / (1.0 - pi);
        if x > 1.0 {
            return Err(Error::Config(format!(
                "infeasible schedule: back_to_back_rate {r} too low for {} games in {} days",
                self.games_per_team, self.season_days
            )));
        }
        Ok(x)
    }

    fn season_start(&self, season: i32) -> NaiveDate {
        match self.league {
            League::Nba => NaiveDate::from_ymd_opt(season, 10, 28),
            League::Mlb => NaiveDate::from_ymd_opt(season, 4, 1),
        }
        .expect("valid calendar date")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub league: League,
    pub delta: f64,
    pub market_aware: bool,
    pub strengths: IndexMap<String, f64>,
    pub party_msas: Vec<String>,
    pub games: usize,
    pub treated_team_games: usize,
}

#[derive(Debug, Clone)]
pub struct SynthLeague {
    pub tables: InputTables,
    pub truth: GroundTruth,
}

impl SynthLeague {
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.tables.write(dir)?;
        let path = dir.join(TRUTH_FILE);
        let mut text = serde_json::to_string_pretty(&self.truth)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
struct LastGame {
    start: DateTime<FixedOffset>,
    msa: &'static str,
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    teams: Vec<TeamSite>,
    strengths: Vec<f64>,
    party: FeatureConfig,
    games: Vec<GameRecord>,
    lines: Vec<LineRecord>,
    boxes: Vec<BoxScore>,
    treated: usize,
}

fn logistic_noise(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    (u / (1.0 - u)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn round_half(x: f64) -> f64 {
    (x * 2.0).round() / 2.0
}

fn local_time(date: NaiveDate, hour: u32, minute: u32, offset_hours: i32) -> DateTime<FixedOffset> {
    let tz = FixedOffset::east_opt(offset_hours * 3600).expect("offset within a day");
    let naive = date.and_time(NaiveTime::from_hms_opt(hour, minute, 0).expect("valid time"));
    tz.from_local_datetime(&naive).single().expect("fixed offsets are unambiguous")
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SynthConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let teams: Vec<TeamSite> = sites(cfg.league)[..cfg.n_teams].to_vec();
        let normal = Normal::new(0.0, cfg.strength_sd).map_err(|e| Error::Config(e.to_string()))?;
        let mut strengths: Vec<f64> = teams.iter().map(|_| normal.sample(&mut rng)).collect();
        let mean = strengths.iter().sum::<f64>() / strengths.len() as f64;
        strengths.iter_mut().for_each(|s| *s -= mean);
        Ok(Self {
            cfg,
            rng,
            teams,
            strengths,
            party: cfg.feature_config(),
            games: Vec::new(),
            lines: Vec::new(),
            boxes: Vec::new(),
            treated: 0,
        })
    }

    fn treatment(&self, last: Option<&LastGame>, start: &DateTime<FixedOffset>) -> Result<f64> {
        Ok(match last {
            Some(l) => f64::from(party_discrete(l.msa, rest_hours(&l.start, start)?, &self.party)),
            None => 0.0,
        })
    }

    /// Plays one game and records it with its line (and box scores for NBA).
    #[allow(clippy::too_many_arguments)]
    fn play(
        &mut self,
        season: i32,
        seq: &mut usize,
        home: usize,
        away: usize,
        start: DateTime<FixedOffset>,
        last: &mut [Option<LastGame>],
    ) -> Result<()> {
        for t in [home, away] {
            if let Some(l) = &last[t] {
                let gap = rest_hours(&l.start, &start)?;
                if gap < MIN_GAP_HOURS {
                    return Err(Error::Config(format!(
                        "schedule produced a {gap:.1}h gap for {}",
                        self.teams[t].id
                    )));
                }
            }
        }
        let t_home = self.treatment(last[home].as_ref(), &start)?;
        let t_away = self.treatment(last[away].as_ref(), &start)?;
        self.treated += (t_home + t_away) as usize;

        let base = self.strengths[home] - self.strengths[away] + self.cfg.home_advantage;
        let eta = base + self.cfg.delta * (t_home - t_away);
        let noise = if self.cfg.bookmaker_noise_sd > 0.0 {
            Normal::new(0.0, self.cfg.bookmaker_noise_sd)
                .expect("validated sd")
                .sample(&mut self.rng)
        } else {
            0.0
        };
        let eta_book = if self.cfg.market_aware { eta } else { base } + noise;

        *seq += 1;
        let league_tag = match self.cfg.league {
            League::Nba => "NBA",
            League::Mlb => "MLB",
        };
        let game_id = format!("{league_tag}-{season}-{:05}", *seq);
        let (home_score, away_score, line) = match self.cfg.league {
            League::Nba => {
                let ppl = self.cfg.points_per_logit;
                let margin = loop {
                    let m = (ppl * (eta + logistic_noise(&mut self.rng))).round() as i64;
                    if m != 0 {
                        break m;
                    }
                };
                let total = Normal::new(206.0_f64, 14.0).expect("constant sd").sample(&mut self.rng).round() as i64;
                let total = total.max(margin.abs() + 120);
                // parity of total must match margin for integer scores
                let total = if (total + margin) % 2 != 0 { total + 1 } else { total };
                let home_score = (total + margin) / 2;
                let away_score = total - home_score;
                let spread = SpreadLine::new(-round_half(ppl * eta_book) + 0.0)?;
                let line = LineRecord {
                    game_id: game_id.clone(),
                    timestamp: start - Duration::hours(2),
                    home_moneyline: None,
                    away_moneyline: None,
                    home_spread: Some(spread),
                };
                (home_score as u32, away_score as u32, line)
            }
            League::Mlb => {
                let home_wins = eta + logistic_noise(&mut self.rng) > 0.0;
                let loser = Poisson::new(3.4).expect("positive rate").sample(&mut self.rng) as u32;
                let lead = 1 + Poisson::new(1.6).expect("positive rate").sample(&mut self.rng) as u32;
                let (h, a) = if home_wins { (loser + lead, loser) } else { (loser, loser + lead) };
                let p = sigmoid(eta_book).clamp(0.02, 0.98);
                let q = 1.0 + self.cfg.vig;
                let quote = |x: f64| MoneyLine::from_probability((x * q).min(0.995));
                let line = LineRecord {
                    game_id: game_id.clone(),
                    timestamp: start - Duration::hours(2),
                    home_moneyline: Some(quote(p)?),
                    away_moneyline: Some(quote(1.0 - p)?),
                    home_spread: None,
                };
                (h, a, line)
            }
        };

        if self.cfg.league == League::Nba {
            for t in [home, away] {
                let b = self.box_score(&game_id, self.teams[t].id);
                self.boxes.push(b);
            }
        }
        let venue = self.teams[home];
        self.games.push(GameRecord {
            game_id,
            league: self.cfg.league,
            season_id: season,
            start,
            home_team_id: venue.id.to_string(),
            away_team_id: self.teams[away].id.to_string(),
            home_score,
            away_score,
            venue_team_id: venue.id.to_string(),
        });
        self.lines.push(line);
        for t in [home, away] {
            last[t] = Some(LastGame { start, msa: venue.msa });
        }
        Ok(())
    }

    fn box_score(&mut self, game_id: &str, team: &str) -> BoxScore {
        let rng = &mut self.rng;
        let pois = |rng: &mut ChaCha8Rng, l: f64| Poisson::new(l).expect("positive rate").sample(rng) as u64;
        let binom = |rng: &mut ChaCha8Rng, n: u64, p: f64| Binomial::new(n, p).expect("valid p").sample(rng);
        let fga = pois(rng, 84.0);
        let fgm = binom(rng, fga, 0.46);
        let tpa = binom(rng, fga, 0.3);
        let tpm = binom(rng, tpa, 0.35).min(fgm);
        let fta = pois(rng, 22.0);
        let ftm = binom(rng, fta, 0.76);
        BoxScore {
            game_id: game_id.to_string(),
            team_id: team.to_string(),
            fgm: fgm as u32,
            fga: fga as u32,
            tpm: tpm as u32,
            tpa: tpa as u32,
            ftm: ftm as u32,
            fta: fta as u32,
            tov: pois(rng, 14.0) as u32,
            reb: pois(rng, 44.0) as u32,
        }
    }

    fn host(&mut self, a: usize, b: usize, home_counts: &mut [usize]) -> (usize, usize) {
        let (home, away) = match home_counts[a].cmp(&home_counts[b]) {
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
            std::cmp::Ordering::Equal => {
                if self.rng.random_bool(0.5) {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        home_counts[home] += 1;
        (home, away)
    }

    fn nba_season(&mut self, season: i32) -> Result<()> {
        let n = self.teams.len();
        let x = self.cfg.nba_play_rate()?;
        let r = self.cfg.back_to_back_rate;
        let mut remaining = vec![self.cfg.games_per_team; n];
        let mut played_yesterday = vec![false; n];
        let mut home_counts = vec![0usize; n];
        let mut last: Vec<Option<LastGame>> = vec![None; n];
        let mut seq = 0;
        let start_date = self.cfg.season_start(season);
        let mut day = 0usize;
        // generous horizon so late stragglers still find opponents
        let horizon = self.cfg.season_days * 2 + 30;

        while remaining.iter().filter(|r| **r > 0).count() >= 2 {
            if day >= horizon {
                return Err(Error::Config("infeasible schedule: season did not complete".into()));
            }
            let late = day >= self.cfg.season_days;
            let mut eligible: Vec<usize> = (0..n)
                .filter(|&t| remaining[t] > 0)
                .filter(|&t| {
                    let p = if late {
                        1.0
                    } else if played_yesterday[t] {
                        r
                    } else {
                        x
                    };
                    self.rng.random_bool(p.clamp(0.0, 1.0))
                })
                .collect();
            eligible.shuffle(&mut self.rng);
            let date = start_date + Duration::days(day as i64);
            let mut today = vec![false; n];
            let mut fixtures = Vec::new();
            for pair in eligible.chunks_exact(2) {
                let (home, away) = self.host(pair[0], pair[1], &mut home_counts);
                let minute = if self.rng.random_bool(0.5) { 0 } else { 30 };
                let start = local_time(date, 19, minute, self.teams[home].utc_offset_hours);
                fixtures.push((start, home, away));
            }
            fixtures.sort_by_key(|(s, h, _)| (*s, *h));
            for (start, home, away) in fixtures {
                self.play(season, &mut seq, home, away, start, &mut last)?;
                for t in [home, away] {
                    remaining[t] -= 1;
                    today[t] = true;
                }
            }
            played_yesterday = today;
            day += 1;
        }
        Ok(())
    }

    fn mlb_season(&mut self, season: i32) -> Result<()> {
        let n = self.teams.len();
        let mut home_counts = vec![0usize; n];
        let mut last: Vec<Option<LastGame>> = vec![None; n];
        let mut seq = 0;
        let mut date = self.cfg.season_start(season);
        let series = self.cfg.games_per_team.div_ceil(self.cfg.series_length);
        let mut order: Vec<usize> = (0..n).collect();
        for s in 0..series {
            let len = self.cfg.series_length.min(self.cfg.games_per_team - s * self.cfg.series_length);
            order.shuffle(&mut self.rng);
            let pairs: Vec<(usize, usize)> = order
                .chunks_exact(2)
                .map(|p| (p[0], p[1]))
                .collect::<Vec<_>>()
                .into_iter()
                .map(|(a, b)| self.host(a, b, &mut home_counts))
                .collect();
            for _ in 0..len {
                let mut fixtures = Vec::new();
                for &(home, away) in &pairs {
                    let offset = self.teams[home].utc_offset_hours;
                    let day_game = local_time(date, 13, 5, offset);
                    let night_game = local_time(date, 19, 5, offset);
                    let mut start = if self.rng.random_bool(0.3) { day_game } else { night_game };
                    let too_soon = [home, away].iter().any(|&t| {
                        last[t]
                            .as_ref()
                            .is_some_and(|l| (start - l.start).num_minutes() < (MIN_GAP_HOURS * 60.0) as i64)
                    });
                    if too_soon {
                        start = night_game;
                    }
                    fixtures.push((start, home, away));
                }
                fixtures.sort_by_key(|(s, h, _)| (*s, *h));
                for (start, home, away) in fixtures {
                    self.play(season, &mut seq, home, away, start, &mut last)?;
                }
                date += Duration::days(1);
            }
            if self.rng.random_bool(self.cfg.off_day_rate) {
                date += Duration::days(1);
            }
        }
        Ok(())
    }

    fn establishments(&mut self) -> Result<Vec<EstablishmentCount>> {
        let msas: BTreeSet<&'static str> = self.teams.iter().map(|t| t.msa).collect();
        let nl = &self.cfg.nightlife;
        let base = Normal::new(nl.log_mean, nl.log_sd).map_err(|e| Error::Config(e.to_string()))?;
        let wiggle = Normal::new(0.0, nl.quarterly_sd).map_err(|e| Error::Config(e.to_string()))?;
        let first = self.cfg.first_season - 2;
        let last = self.cfg.first_season + self.cfg.n_seasons as i32;
        let mut out = Vec::new();
        for msa in msas {
            let mut level = base.sample(&mut self.rng);
            if self.party.is_party_msa(msa) {
                level += nl.party_log_boost;
            }
            if NO_ESTABLISHMENT_DATA.contains(&msa) {
                continue;
            }
            for year in first..=last {
                for quarter in 1..=4u8 {
                    let log_count = level + wiggle.sample(&mut self.rng);
                    out.push(EstablishmentCount {
                        msa_id: msa.to_string(),
                        year,
                        quarter,
                        music_establishments: log_count.exp().round().max(1.0) as u32,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Generates a full league. Output is a pure function of the config.
pub fn generate_league(config: &SynthConfig) -> Result<SynthLeague> {
    config.validate()?;
    let mut g = Generator::new(config)?;
    for i in 0..config.n_seasons {
        let season = config.first_season + i as i32;
        match config.league {
            League::Nba => g.nba_season(season)?,
            League::Mlb => g.mlb_season(season)?,
        }
    }
    let establishments = g.establishments()?;
    let stadiums = g
        .teams
        .iter()
        .map(|t| {
            Ok(StadiumRecord {
                team_id: t.id.to_string(),
                league: config.league,
                location: Coordinate::new(t.latitude, t.longitude)?,
                msa_id: t.msa.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = GroundTruth {
        seed: config.seed,
        league: config.league,
        delta: config.delta,
        market_aware: config.market_aware,
        strengths: g
            .teams
            .iter()
            .zip(&g.strengths)
            .map(|(t, s)| (t.id.to_string(), *s))
            .collect(),
        party_msas: config.party_msas.clone(),
        games: g.games.len(),
        treated_team_games: g.treated,
    };
    Ok(SynthLeague {
        tables: InputTables {
            games: g.games,
            lines: g.lines,
            boxes: g.boxes,
            establishments,
            stadiums,
        },
        truth,
    })
}
