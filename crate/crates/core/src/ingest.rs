//! Input schemas, validation and the team-game join.
//!
//! Five CSV files feed the pipeline. Each has a fixed header (order matters)
//! and every row is validated on read; the first bad field aborts the parse
//! with its file, line and column.
//!
//! ```text
//! games.csv          game_id,league,season_id,start_time,home_team_id,away_team_id,home_score,away_score,venue_team_id
//! lines.csv          game_id,timestamp,home_moneyline,away_moneyline,home_spread
//! box_scores.csv     game_id,team_id,fgm,fga,tpm,tpa,ftm,fta,tov,reb
//! establishments.csv msa_id,year,quarter,music_establishments
//! stadiums.csv       team_id,league,latitude_deg,longitude_deg,msa_id
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::rest_hours;
use crate::geo::{Coordinate, TravelLeg};
use crate::market::{spread_cover_outcome, CoverOutcome, MoneyLine, SpreadLine};

pub const GAMES_HEADER: &[&str] = &[
    "game_id",
    "league",
    "season_id",
    "start_time",
    "home_team_id",
    "away_team_id",
    "home_score",
    "away_score",
    "venue_team_id",
];
pub const LINES_HEADER: &[&str] = &[
    "game_id",
    "timestamp",
    "home_moneyline",
    "away_moneyline",
    "home_spread",
];
pub const BOX_SCORES_HEADER: &[&str] = &[
    "game_id", "team_id", "fgm", "fga", "tpm", "tpa", "ftm", "fta", "tov", "reb",
];
pub const ESTABLISHMENTS_HEADER: &[&str] = &["msa_id", "year", "quarter", "music_establishments"];
pub const STADIUMS_HEADER: &[&str] = &["team_id", "league", "latitude_deg", "longitude_deg", "msa_id"];

/// Standard file names inside a data directory.
pub const GAMES_FILE: &str = "games.csv";
pub const LINES_FILE: &str = "lines.csv";
pub const BOX_SCORES_FILE: &str = "box_scores.csv";
pub const ESTABLISHMENTS_FILE: &str = "establishments.csv";
pub const STADIUMS_FILE: &str = "stadiums.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum League {
    #[serde(rename = "NBA")]
    Nba,
    #[serde(rename = "MLB")]
    Mlb,
}

impl fmt::Display for League {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            League::Nba => "NBA",
            League::Mlb => "MLB",
        })
    }
}

impl FromStr for League {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NBA" => Ok(League::Nba),
            "MLB" => Ok(League::Mlb),
            other => Err(Error::InvalidInput(format!("unknown league `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game_id: String,
    pub league: League,
    pub season_id: i32,
    pub start: DateTime<FixedOffset>,
    pub home_team_id: String,
    pub away_team_id: String,
    pub home_score: u32,
    pub away_score: u32,
    pub venue_team_id: String,
}

impl GameRecord {
    pub fn home_margin(&self) -> i32 {
        self.home_score as i32 - self.away_score as i32
    }
}

/// One quote for a game. MLB rows carry both money-lines, NBA rows the spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub game_id: String,
    pub timestamp: DateTime<FixedOffset>,
    pub home_moneyline: Option<MoneyLine>,
    pub away_moneyline: Option<MoneyLine>,
    pub home_spread: Option<SpreadLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LineSelection {
    Opening,
    #[default]
    Closing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxScore {
    pub game_id: String,
    pub team_id: String,
    pub fgm: u32,
    pub fga: u32,
    pub tpm: u32,
    pub tpa: u32,
    pub ftm: u32,
    pub fta: u32,
    pub tov: u32,
    pub reb: u32,
}

impl BoxScore {
    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.fgm > self.fga {
            return Err(("fgm", format!("fgm {} exceeds fga {}", self.fgm, self.fga)));
        }
        if self.tpm > self.tpa {
            return Err(("tpm", format!("tpm {} exceeds tpa {}", self.tpm, self.tpa)));
        }
        if self.ftm > self.fta {
            return Err(("ftm", format!("ftm {} exceeds fta {}", self.ftm, self.fta)));
        }
        if self.tpm > self.fgm {
            return Err(("tpm", format!("tpm {} exceeds fgm {}", self.tpm, self.fgm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstablishmentCount {
    pub msa_id: String,
    pub year: i32,
    pub quarter: u8,
    pub music_establishments: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StadiumRecord {
    pub team_id: String,
    pub league: League,
    pub location: Coordinate,
    pub msa_id: String,
}

/// Establishment counts keyed by MSA and calendar quarter.
#[derive(Debug, Clone, Default)]
pub struct EstablishmentTable {
    counts: HashMap<String, BTreeMap<(i32, u8), u32>>,
}

impl EstablishmentTable {
    pub fn new(records: &[EstablishmentCount]) -> Self {
        let mut counts: HashMap<String, BTreeMap<(i32, u8), u32>> = HashMap::new();
        for r in records {
            counts
                .entry(r.msa_id.clone())
                .or_default()
                .insert((r.year, r.quarter), r.music_establishments);
        }
        Self { counts }
    }

    pub fn get(&self, msa_id: &str, year: i32, quarter: u8) -> Option<u32> {
        self.counts.get(msa_id)?.get(&(year, quarter)).copied()
    }

    /// Latest entry at or before `(year, quarter)` for the MSA.
    pub fn latest_at_or_before(&self, msa_id: &str, year: i32, quarter: u8) -> Option<((i32, u8), u32)> {
        self.counts
            .get(msa_id)?
            .range(..=(year, quarter))
            .next_back()
            .map(|(k, v)| (*k, *v))
    }

    pub fn has_msa(&self, msa_id: &str) -> bool {
        self.counts.contains_key(msa_id)
    }
}

// ---------------------------------------------------------------------------
// CSV reading
// ---------------------------------------------------------------------------

struct CsvRows {
    path: PathBuf,
    reader: csv::Reader<File>,
}

impl CsvRows {
    fn open(path: &Path, expected: &[&str]) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let headers = reader.headers().map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected {
            return Err(Error::Header {
                path: path.to_path_buf(),
                expected: expected.join(","),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            reader,
        })
    }

    fn for_each(mut self, mut f: impl FnMut(&Row<'_>) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let line = record.position().map(|p| p.line()).unwrap_or(0);
                    f(&Row {
                        path: &self.path,
                        line,
                        record: &record,
                    })?;
                }
                Err(e) => {
                    return Err(Error::Csv {
                        path: self.path.clone(),
                        source: e,
                    })
                }
            }
        }
    }
}

struct Row<'a> {
    path: &'a Path,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn raw(&self, idx: usize, name: &str) -> Result<&str> {
        self.record
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| self.err(name, "missing field"))
    }

    fn text(&self, idx: usize, name: &str) -> Result<String> {
        let s = self.raw(idx, name)?;
        if s.is_empty() {
            return Err(self.err(name, "empty value"));
        }
        Ok(s.to_string())
    }

    fn parse<T: FromStr>(&self, idx: usize, name: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let s = self.raw(idx, name)?;
        s.parse::<T>()
            .map_err(|e| self.err(name, format!("cannot parse `{s}`: {e}")))
    }

    fn optional<T: FromStr>(&self, idx: usize, name: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        let s = self.raw(idx, name)?;
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<T>()
            .map(Some)
            .map_err(|e| self.err(name, format!("cannot parse `{s}`: {e}")))
    }

    fn timestamp(&self, idx: usize, name: &str) -> Result<DateTime<FixedOffset>> {
        let s = self.raw(idx, name)?;
        DateTime::parse_from_rfc3339(s)
            .map_err(|e| self.err(name, format!("`{s}` is not RFC 3339 with offset: {e}")))
    }

    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::parse(self.path, self.line, field, message)
    }

    fn duplicate(&self, key: impl Into<String>) -> Error {
        Error::Duplicate {
            path: self.path.to_path_buf(),
            line: self.line,
            key: key.into(),
        }
    }
}

pub fn parse_games(path: impl AsRef<Path>) -> Result<Vec<GameRecord>> {
    let path = path.as_ref();
    let mut games = Vec::new();
    let mut seen = HashSet::new();
    CsvRows::open(path, GAMES_HEADER)?.for_each(|row| {
        let game = GameRecord {
            game_id: row.text(0, "game_id")?,
            league: row.parse(1, "league")?,
            season_id: row.parse(2, "season_id")?,
            start: row.timestamp(3, "start_time")?,
            home_team_id: row.text(4, "home_team_id")?,
            away_team_id: row.text(5, "away_team_id")?,
            home_score: row.parse(6, "home_score")?,
            away_score: row.parse(7, "away_score")?,
            venue_team_id: row.text(8, "venue_team_id")?,
        };
        if game.home_team_id == game.away_team_id {
            return Err(row.err("away_team_id", "home and away teams are identical"));
        }
        if game.league == League::Nba && game.home_score == game.away_score {
            return Err(row.err("away_score", "NBA games cannot end tied"));
        }
        if !seen.insert(game.game_id.clone()) {
            return Err(row.duplicate(&game.game_id));
        }
        games.push(game);
        Ok(())
    })?;
    sort_chronologically(&mut games);
    Ok(games)
}

pub(crate) fn sort_chronologically(games: &mut [GameRecord]) {
    games.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.game_id.cmp(&b.game_id)));
}

pub fn parse_lines(path: impl AsRef<Path>) -> Result<Vec<LineRecord>> {
    let path = path.as_ref();
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    CsvRows::open(path, LINES_HEADER)?.for_each(|row| {
        let home_ml: Option<i32> = row.optional(2, "home_moneyline")?;
        let away_ml: Option<i32> = row.optional(3, "away_moneyline")?;
        let spread: Option<f64> = row.optional(4, "home_spread")?;
        let to_ml = |v: Option<i32>, name: &str| -> Result<Option<MoneyLine>> {
            v.map(|o| MoneyLine::new(o).map_err(|e| row.err(name, e.to_string())))
                .transpose()
        };
        let line = LineRecord {
            game_id: row.text(0, "game_id")?,
            timestamp: row.timestamp(1, "timestamp")?,
            home_moneyline: to_ml(home_ml, "home_moneyline")?,
            away_moneyline: to_ml(away_ml, "away_moneyline")?,
            home_spread: spread
                .map(|s| SpreadLine::new(s).map_err(|e| row.err("home_spread", e.to_string())))
                .transpose()?,
        };
        if line.home_moneyline.is_some() != line.away_moneyline.is_some() {
            return Err(row.err("away_moneyline", "money-lines must be given for both sides"));
        }
        if line.home_moneyline.is_none() && line.home_spread.is_none() {
            return Err(row.err("home_spread", "row carries neither money-lines nor a spread"));
        }
        if !seen.insert((line.game_id.clone(), line.timestamp)) {
            return Err(row.duplicate(format!("{}@{}", line.game_id, line.timestamp.to_rfc3339())));
        }
        lines.push(line);
        Ok(())
    })?;
    Ok(lines)
}

pub fn parse_box_scores(path: impl AsRef<Path>) -> Result<Vec<BoxScore>> {
    let path = path.as_ref();
    let mut boxes = Vec::new();
    let mut seen = HashSet::new();
    CsvRows::open(path, BOX_SCORES_HEADER)?.for_each(|row| {
        let b = BoxScore {
            game_id: row.text(0, "game_id")?,
            team_id: row.text(1, "team_id")?,
            fgm: row.parse(2, "fgm")?,
            fga: row.parse(3, "fga")?,
            tpm: row.parse(4, "tpm")?,
            tpa: row.parse(5, "tpa")?,
            ftm: row.parse(6, "ftm")?,
            fta: row.parse(7, "fta")?,
            tov: row.parse(8, "tov")?,
            reb: row.parse(9, "reb")?,
        };
        b.validate().map_err(|(field, msg)| row.err(field, msg))?;
        if !seen.insert((b.game_id.clone(), b.team_id.clone())) {
            return Err(row.duplicate(format!("{}/{}", b.game_id, b.team_id)));
        }
        boxes.push(b);
        Ok(())
    })?;
    Ok(boxes)
}

pub fn parse_establishments(path: impl AsRef<Path>) -> Result<Vec<EstablishmentCount>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    CsvRows::open(path, ESTABLISHMENTS_HEADER)?.for_each(|row| {
        let rec = EstablishmentCount {
            msa_id: row.text(0, "msa_id")?,
            year: row.parse(1, "year")?,
            quarter: row.parse(2, "quarter")?,
            music_establishments: row.parse(3, "music_establishments")?,
        };
        if !(1..=4).contains(&rec.quarter) {
            return Err(row.err("quarter", format!("quarter {} outside 1..=4", rec.quarter)));
        }
        if !seen.insert((rec.msa_id.clone(), rec.year, rec.quarter)) {
            return Err(row.duplicate(format!("{}/{}Q{}", rec.msa_id, rec.year, rec.quarter)));
        }
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_stadiums(path: impl AsRef<Path>) -> Result<Vec<StadiumRecord>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    CsvRows::open(path, STADIUMS_HEADER)?.for_each(|row| {
        let lat: f64 = row.parse(2, "latitude_deg")?;
        let lon: f64 = row.parse(3, "longitude_deg")?;
        let rec = StadiumRecord {
            team_id: row.text(0, "team_id")?,
            league: row.parse(1, "league")?,
            location: Coordinate::new(lat, lon).map_err(|e| row.err("latitude_deg", e.to_string()))?,
            msa_id: row.text(4, "msa_id")?,
        };
        if !seen.insert((rec.team_id.clone(), rec.league)) {
            return Err(row.duplicate(&rec.team_id));
        }
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV writing
// ---------------------------------------------------------------------------

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    let wrap = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn timestamp_string(t: &DateTime<FixedOffset>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%:z").to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_games(path: impl AsRef<Path>, games: &[GameRecord]) -> Result<()> {
    write_csv(
        path.as_ref(),
        GAMES_HEADER,
        games.iter().map(|g| {
            vec![
                g.game_id.clone(),
                g.league.to_string(),
                g.season_id.to_string(),
                timestamp_string(&g.start),
                g.home_team_id.clone(),
                g.away_team_id.clone(),
                g.home_score.to_string(),
                g.away_score.to_string(),
                g.venue_team_id.clone(),
            ]
        }),
    )
}

pub fn write_lines(path: impl AsRef<Path>, lines: &[LineRecord]) -> Result<()> {
    write_csv(
        path.as_ref(),
        LINES_HEADER,
        lines.iter().map(|l| {
            vec![
                l.game_id.clone(),
                timestamp_string(&l.timestamp),
                opt(l.home_moneyline.map(MoneyLine::odds)),
                opt(l.away_moneyline.map(MoneyLine::odds)),
                opt(l.home_spread.map(SpreadLine::home)),
            ]
        }),
    )
}

pub fn write_box_scores(path: impl AsRef<Path>, boxes: &[BoxScore]) -> Result<()> {
    write_csv(
        path.as_ref(),
        BOX_SCORES_HEADER,
        boxes.iter().map(|b| {
            let mut r = vec![b.game_id.clone(), b.team_id.clone()];
            r.extend([b.fgm, b.fga, b.tpm, b.tpa, b.ftm, b.fta, b.tov, b.reb].map(|v| v.to_string()));
            r
        }),
    )
}

pub fn write_establishments(path: impl AsRef<Path>, recs: &[EstablishmentCount]) -> Result<()> {
    write_csv(
        path.as_ref(),
        ESTABLISHMENTS_HEADER,
        recs.iter().map(|r| {
            vec![
                r.msa_id.clone(),
                r.year.to_string(),
                r.quarter.to_string(),
                r.music_establishments.to_string(),
            ]
        }),
    )
}

pub fn write_stadiums(path: impl AsRef<Path>, recs: &[StadiumRecord]) -> Result<()> {
    write_csv(
        path.as_ref(),
        STADIUMS_HEADER,
        recs.iter().map(|r| {
            vec![
                r.team_id.clone(),
                r.league.to_string(),
                r.location.latitude_deg().to_string(),
                r.location.longitude_deg().to_string(),
                r.msa_id.clone(),
            ]
        }),
    )
}

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

/// The line as seen from one team's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamLine {
    pub timestamp: DateTime<FixedOffset>,
    /// Spread from this team's perspective (negative = favoured).
    pub spread: Option<f64>,
    pub moneyline: Option<MoneyLine>,
    pub opponent_moneyline: Option<MoneyLine>,
}

/// Everything known about the team's previous game in the same season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagInfo {
    pub prev_game_id: String,
    pub prev_start: DateTime<FixedOffset>,
    pub rest_hours: f64,
    pub last_venue_team_id: String,
    pub last_venue_msa: String,
    pub was_home: bool,
    pub travel: TravelLeg,
    /// Both teams' box scores from the previous game, when available.
    pub boxes: Option<(BoxScore, BoxScore)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamGameRow {
    pub game_id: String,
    pub league: League,
    pub season_id: i32,
    pub start: DateTime<FixedOffset>,
    pub team_id: String,
    pub opponent_id: String,
    pub is_home: bool,
    pub venue_team_id: String,
    pub venue_msa: String,
    pub team_score: u32,
    pub opponent_score: u32,
    pub lag: Option<LagInfo>,
    /// `None` means no line was available: the row is flagged and excluded.
    pub line: Option<TeamLine>,
    pub won: bool,
    pub covered: Option<CoverOutcome>,
}

impl TeamGameRow {
    pub fn prev_game_id(&self) -> Option<&str> {
        self.lag.as_ref().map(|l| l.prev_game_id.as_str())
    }

    pub fn rest_hours(&self) -> Option<f64> {
        self.lag.as_ref().map(|l| l.rest_hours)
    }
}

/// Game-level loss accounting for the join.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JoinAccounting {
    pub games: usize,
    pub joined: usize,
    pub excluded: BTreeMap<String, usize>,
}

impl JoinAccounting {
    pub fn excluded_total(&self) -> usize {
        self.excluded.values().sum()
    }

    pub fn balances(&self) -> bool {
        self.games == self.joined + self.excluded_total()
    }
}

#[derive(Debug, Clone)]
pub struct JoinOutput {
    pub rows: Vec<TeamGameRow>,
    pub accounting: JoinAccounting,
}

pub const EXCLUDED_MISSING_LINE: &str = "missing_line";

fn pick_line<'a>(
    candidates: Option<&Vec<&'a LineRecord>>,
    start: &DateTime<FixedOffset>,
    selection: LineSelection,
) -> Option<&'a LineRecord> {
    let valid = candidates?.iter().copied().filter(|l| l.timestamp <= *start);
    match selection {
        LineSelection::Closing => valid.max_by_key(|l| l.timestamp),
        LineSelection::Opening => valid.min_by_key(|l| l.timestamp),
    }
}

/// Builds two rows per game, linking each to that team's previous game in
/// the same season. Games without a usable line are kept (they still serve
/// as lag sources) but flagged and counted as excluded.
pub fn build_team_game_rows(
    games: &[GameRecord],
    lines: &[LineRecord],
    boxes: &[BoxScore],
    stadiums: &[StadiumRecord],
    selection: LineSelection,
) -> Result<JoinOutput> {
    let mut ordered: Vec<&GameRecord> = games.iter().collect();
    ordered.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.game_id.cmp(&b.game_id)));

    let mut lines_by_game: HashMap<&str, Vec<&LineRecord>> = HashMap::new();
    for l in lines {
        lines_by_game.entry(l.game_id.as_str()).or_default().push(l);
    }
    let boxes_by_key: HashMap<(&str, &str), &BoxScore> = boxes
        .iter()
        .map(|b| ((b.game_id.as_str(), b.team_id.as_str()), b))
        .collect();

    let stadium_of = |league: League, team: &str| -> Result<&StadiumRecord> {
        stadiums
            .iter()
            .find(|s| s.league == league && s.team_id == team)
            .ok_or_else(|| Error::UnknownTeam(team.to_string()))
    };

    let mut accounting = JoinAccounting {
        games: ordered.len(),
        ..Default::default()
    };
    let mut last_game: HashMap<(&str, i32), &GameRecord> = HashMap::new();
    let mut rows = Vec::with_capacity(2 * ordered.len());

    for g in ordered {
        let venue = stadium_of(g.league, &g.venue_team_id)?;
        let line = pick_line(lines_by_game.get(g.game_id.as_str()), &g.start, selection);
        if line.is_some() {
            accounting.joined += 1;
        } else {
            *accounting.excluded.entry(EXCLUDED_MISSING_LINE.to_string()).or_default() += 1;
        }

        for (team, opp, is_home) in [
            (&g.home_team_id, &g.away_team_id, true),
            (&g.away_team_id, &g.home_team_id, false),
        ] {
            stadium_of(g.league, team)?;
            let lag = match last_game.get(&(team.as_str(), g.season_id)) {
                Some(prev) => {
                    let prev_venue = stadium_of(prev.league, &prev.venue_team_id)?;
                    let prev_boxes = match (
                        boxes_by_key.get(&(prev.game_id.as_str(), prev.home_team_id.as_str())),
                        boxes_by_key.get(&(prev.game_id.as_str(), prev.away_team_id.as_str())),
                    ) {
                        (Some(h), Some(a)) => Some(((*h).clone(), (*a).clone())),
                        _ => None,
                    };
                    Some(LagInfo {
                        prev_game_id: prev.game_id.clone(),
                        prev_start: prev.start,
                        rest_hours: rest_hours(&prev.start, &g.start)?,
                        last_venue_team_id: prev.venue_team_id.clone(),
                        last_venue_msa: prev_venue.msa_id.clone(),
                        was_home: prev.home_team_id == *team,
                        travel: TravelLeg::between(prev_venue.location, venue.location)?,
                        boxes: prev_boxes,
                    })
                }
                None => None,
            };

            let sign = if is_home { 1.0 } else { -1.0 };
            let team_line = line.map(|l| TeamLine {
                timestamp: l.timestamp,
                spread: l.home_spread.map(|s| sign * s.home()),
                moneyline: if is_home { l.home_moneyline } else { l.away_moneyline },
                opponent_moneyline: if is_home { l.away_moneyline } else { l.home_moneyline },
            });
            let covered = line.and_then(|l| l.home_spread).map(|s| {
                let home = spread_cover_outcome(g.home_margin(), s.home());
                if is_home {
                    home
                } else {
                    home.mirror()
                }
            });
            let (team_score, opponent_score) = if is_home {
                (g.home_score, g.away_score)
            } else {
                (g.away_score, g.home_score)
            };
            rows.push(TeamGameRow {
                game_id: g.game_id.clone(),
                league: g.league,
                season_id: g.season_id,
                start: g.start,
                team_id: team.clone(),
                opponent_id: opp.clone(),
                is_home,
                venue_team_id: g.venue_team_id.clone(),
                venue_msa: venue.msa_id.clone(),
                team_score,
                opponent_score,
                lag,
                line: team_line,
                won: team_score > opponent_score,
                covered,
            });
        }
        last_game.insert((g.home_team_id.as_str(), g.season_id), g);
        last_game.insert((g.away_team_id.as_str(), g.season_id), g);
    }

    Ok(JoinOutput { rows, accounting })
}

/// The five input tables, in memory.
#[derive(Debug, Clone, Default)]
pub struct InputTables {
    pub games: Vec<GameRecord>,
    pub lines: Vec<LineRecord>,
    pub boxes: Vec<BoxScore>,
    pub establishments: Vec<EstablishmentCount>,
    pub stadiums: Vec<StadiumRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPaths {
    pub games: PathBuf,
    pub lines: PathBuf,
    pub boxes: PathBuf,
    pub establishments: PathBuf,
    pub stadiums: PathBuf,
}

impl DataPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            games: dir.join(GAMES_FILE),
            lines: dir.join(LINES_FILE),
            boxes: dir.join(BOX_SCORES_FILE),
            establishments: dir.join(ESTABLISHMENTS_FILE),
            stadiums: dir.join(STADIUMS_FILE),
        }
    }

    pub fn all(&self) -> [&Path; 5] {
        [
            &self.games,
            &self.lines,
            &self.boxes,
            &self.establishments,
            &self.stadiums,
        ]
    }
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, T>) -> T {
    h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))
}

impl InputTables {
    pub fn read(paths: &DataPaths) -> Result<Self> {
        // distinct files parse independently
        std::thread::scope(|s| {
            let games = s.spawn(|| parse_games(&paths.games));
            let lines = s.spawn(|| parse_lines(&paths.lines));
            let boxes = s.spawn(|| parse_box_scores(&paths.boxes));
            let est = s.spawn(|| parse_establishments(&paths.establishments));
            let stadiums = parse_stadiums(&paths.stadiums);
            Ok(Self {
                games: join(games)?,
                lines: join(lines)?,
                boxes: join(boxes)?,
                establishments: join(est)?,
                stadiums: stadiums?,
            })
        })
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<DataPaths> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = DataPaths::in_dir(dir);
        write_games(&paths.games, &self.games)?;
        write_lines(&paths.lines, &self.lines)?;
        write_box_scores(&paths.boxes, &self.boxes)?;
        write_establishments(&paths.establishments, &self.establishments)?;
        write_stadiums(&paths.stadiums, &self.stadiums)?;
        Ok(paths)
    }
}

/// Joined rows plus the lookup tables the feature builder needs.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub league: League,
    pub rows: Vec<TeamGameRow>,
    pub stadiums: Vec<StadiumRecord>,
    pub establishments: EstablishmentTable,
    pub accounting: JoinAccounting,
}

impl Dataset {
    pub fn from_tables(league: League, tables: &InputTables, selection: LineSelection) -> Result<Self> {
        let games: Vec<GameRecord> = tables.games.iter().filter(|g| g.league == league).cloned().collect();
        let stadiums: Vec<StadiumRecord> =
            tables.stadiums.iter().filter(|s| s.league == league).cloned().collect();
        let joined = build_team_game_rows(&games, &tables.lines, &tables.boxes, &stadiums, selection)?;
        Ok(Self {
            league,
            rows: joined.rows,
            stadiums,
            establishments: EstablishmentTable::new(&tables.establishments),
            accounting: joined.accounting,
        })
    }

    pub fn load(league: League, paths: &DataPaths, selection: LineSelection) -> Result<Self> {
        Self::from_tables(league, &InputTables::read(paths)?, selection)
    }

    pub fn seasons(&self) -> Vec<i32> {
        let mut s: Vec<i32> = self.rows.iter().map(|r| r.season_id).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn stadium(&self, team_id: &str) -> Option<&StadiumRecord> {
        self.stadiums.iter().find(|s| s.team_id == team_id)
    }
}

/// Writes the joined rows (without features) for inspection.
pub fn write_rows_csv(path: impl AsRef<Path>, rows: &[TeamGameRow]) -> Result<()> {
    let path = path.as_ref();
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::from(
        "game_id,season_id,start_time,team_id,opponent_id,is_home,prev_game_id,rest_hours,last_venue_team_id,travel_km,has_line,won,covered\n",
    );
    for r in rows {
        let lag = r.lag.as_ref();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.game_id,
            r.season_id,
            timestamp_string(&r.start),
            r.team_id,
            r.opponent_id,
            u8::from(r.is_home),
            lag.map(|l| l.prev_game_id.as_str()).unwrap_or(""),
            opt(lag.map(|l| l.rest_hours)),
            lag.map(|l| l.last_venue_team_id.as_str()).unwrap_or(""),
            opt(lag.map(|l| l.travel.distance_km)),
            u8::from(r.line.is_some()),
            u8::from(r.won),
            match r.covered {
                Some(CoverOutcome::Cover) => "COVER",
                Some(CoverOutcome::NoCover) => "NO_COVER",
                Some(CoverOutcome::Push) => "PUSH",
                None => "",
            }
        ));
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    const GAMES_HEAD: &str =
        "game_id,league,season_id,start_time,home_team_id,away_team_id,home_score,away_score,venue_team_id\n";

    #[test]
    fn parses_three_games_in_chronological_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "games.csv",
            &format!(
                "{GAMES_HEAD}g3,NBA,2014,2014-11-03T19:30:00-05:00,BOS,NYK,101,99,BOS\n\
                 g1,NBA,2014,2014-11-01T19:30:00-04:00,NYK,BOS,88,90,NYK\n\
                 g2,NBA,2014,2014-11-02T19:30:00-08:00,LAL,NYK,110,100,LAL\n"
            ),
        );
        let games = parse_games(&p).unwrap();
        let ids: Vec<_> = games.iter().map(|g| g.game_id.as_str()).collect();
        assert_eq!(ids, ["g1", "g2", "g3"]);
    }

    #[test]
    fn rejects_same_team_on_both_sides() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "games.csv",
            &format!(
                "{GAMES_HEAD}g1,NBA,2014,2014-11-01T19:30:00-04:00,NYK,BOS,88,90,NYK\n\
                 g2,NBA,2014,2014-11-02T19:30:00-04:00,NYK,NYK,88,90,NYK\n"
            ),
        );
        match parse_games(&p) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "away_team_id");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_tied_nba_game_but_not_mlb() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "games.csv",
            &format!("{GAMES_HEAD}g1,NBA,2014,2014-11-01T19:30:00-04:00,NYK,BOS,90,90,NYK\n"),
        );
        assert!(matches!(parse_games(&p), Err(Error::Parse { line: 2, .. })));
        let p = write_tmp(
            &dir,
            "mlb.csv",
            &format!("{GAMES_HEAD}g1,MLB,2014,2014-06-01T19:05:00-04:00,NYY,BOS,3,3,NYY\n"),
        );
        assert_eq!(parse_games(&p).unwrap().len(), 1);
    }

    #[test]
    fn rejects_duplicates_and_bad_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "games.csv",
            &format!(
                "{GAMES_HEAD}g1,NBA,2014,2014-11-01T19:30:00-04:00,NYK,BOS,88,90,NYK\n\
                 g1,NBA,2014,2014-11-02T19:30:00-04:00,NYK,BOS,88,90,NYK\n"
            ),
        );
        assert!(matches!(parse_games(&p), Err(Error::Duplicate { line: 3, .. })));
        let p = write_tmp(&dir, "bad.csv", "game_id,league\n");
        assert!(matches!(parse_games(&p), Err(Error::Header { .. })));
        let p = write_tmp(
            &dir,
            "neg.csv",
            &format!("{GAMES_HEAD}g1,NBA,2014,2014-11-01T19:30:00-04:00,NYK,BOS,-1,90,NYK\n"),
        );
        assert!(matches!(parse_games(&p), Err(Error::Parse { ref field, .. }) if field == "home_score"));
    }

    const BOX_HEAD: &str = "game_id,team_id,fgm,fga,tpm,tpa,ftm,fta,tov,reb\n";

    #[test]
    fn box_score_constraints() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write_tmp(&dir, "ok.csv", &format!("{BOX_HEAD}g1,NYK,40,85,10,28,18,22,13,44\n"));
        assert_eq!(parse_box_scores(&ok).unwrap().len(), 1);
        let bad = write_tmp(&dir, "b1.csv", &format!("{BOX_HEAD}g1,NYK,40,39,10,28,18,22,13,44\n"));
        assert!(matches!(parse_box_scores(&bad), Err(Error::Parse { ref field, .. }) if field == "fgm"));
        let bad = write_tmp(&dir, "b2.csv", &format!("{BOX_HEAD}g1,NYK,10,85,11,28,18,22,13,44\n"));
        assert!(matches!(parse_box_scores(&bad), Err(Error::Parse { ref field, .. }) if field == "tpm"));
    }

    const EST_HEAD: &str = "msa_id,year,quarter,music_establishments\n";

    #[test]
    fn establishment_constraints() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write_tmp(&dir, "ok.csv", &format!("{EST_HEAD}31080,2014,2,1543\n"));
        let recs = parse_establishments(&ok).unwrap();
        assert_eq!(recs[0].music_establishments, 1543);
        let neg = write_tmp(&dir, "neg.csv", &format!("{EST_HEAD}31080,2014,2,-3\n"));
        assert!(parse_establishments(&neg).is_err());
        let q5 = write_tmp(&dir, "q5.csv", &format!("{EST_HEAD}31080,2014,5,10\n"));
        assert!(matches!(parse_establishments(&q5), Err(Error::Parse { ref field, .. }) if field == "quarter"));
    }

    #[test]
    fn line_rows_need_both_money_lines() {
        let dir = tempfile::tempdir().unwrap();
        let head = "game_id,timestamp,home_moneyline,away_moneyline,home_spread\n";
        let p = write_tmp(&dir, "l.csv", &format!("{head}g1,2014-06-01T12:00:00-04:00,-150,,\n"));
        assert!(parse_lines(&p).is_err());
        let p = write_tmp(&dir, "l2.csv", &format!("{head}g1,2014-06-01T12:00:00-04:00,-50,120,\n"));
        assert!(matches!(parse_lines(&p), Err(Error::Parse { ref field, .. }) if field == "home_moneyline"));
        let p = write_tmp(&dir, "l3.csv", &format!("{head}g1,2014-06-01T12:00:00-04:00,,,-3.5\n"));
        assert_eq!(parse_lines(&p).unwrap()[0].home_spread.unwrap().home(), -3.5);
    }

    fn game(id: &str, season: i32, start: &str, home: &str, away: &str, hs: u32, aws: u32) -> GameRecord {
        GameRecord {
            game_id: id.into(),
            league: League::Nba,
            season_id: season,
            start: DateTime::parse_from_rfc3339(start).unwrap(),
            home_team_id: home.into(),
            away_team_id: away.into(),
            home_score: hs,
            away_score: aws,
            venue_team_id: home.into(),
        }
    }

    fn stadium(team: &str, lat: f64, lon: f64, msa: &str) -> StadiumRecord {
        StadiumRecord {
            team_id: team.into(),
            league: League::Nba,
            location: Coordinate::new(lat, lon).unwrap(),
            msa_id: msa.into(),
        }
    }

    fn spread_line(game: &str, ts: &str, spread: f64) -> LineRecord {
        LineRecord {
            game_id: game.into(),
            timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
            home_moneyline: None,
            away_moneyline: None,
            home_spread: Some(SpreadLine::new(spread).unwrap()),
        }
    }

    #[test]
    fn back_to_back_links_previous_game_and_flags_missing_lines() {
        let stadiums = vec![
            stadium("LAL", 34.043, -118.267, "31080"),
            stadium("NYK", 40.751, -73.993, "35620"),
            stadium("MEM", 35.138, -90.051, "32820"),
        ];
        let games = vec![
            game("g1", 2014, "2014-11-01T19:30:00-07:00", "LAL", "NYK", 100, 95),
            game("g2", 2014, "2014-11-02T19:00:00-06:00", "MEM", "NYK", 90, 99),
            game("g3", 2015, "2015-11-01T19:00:00-06:00", "MEM", "NYK", 90, 99),
        ];
        let lines = vec![
            spread_line("g1", "2014-11-01T12:00:00-07:00", -4.5),
            spread_line("g1", "2014-11-01T18:00:00-07:00", -5.5),
            // posted after tip-off: never usable
            spread_line("g2", "2014-11-03T12:00:00-06:00", 2.0),
            spread_line("g3", "2015-11-01T12:00:00-06:00", 2.0),
        ];
        let out = build_team_game_rows(&games, &lines, &[], &stadiums, LineSelection::Closing).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.accounting.joined, 2);
        assert_eq!(out.accounting.excluded[EXCLUDED_MISSING_LINE], 1);
        assert!(out.accounting.balances());

        let nyk_g2 = out.rows.iter().find(|r| r.game_id == "g2" && r.team_id == "NYK").unwrap();
        assert_eq!(nyk_g2.prev_game_id(), Some("g1"));
        assert_eq!(nyk_g2.rest_hours(), Some(22.5));
        assert_eq!(nyk_g2.lag.as_ref().unwrap().last_venue_msa, "31080");
        assert!(nyk_g2.line.is_none());

        // season boundary: no lag carried into 2015
        let nyk_g3 = out.rows.iter().find(|r| r.game_id == "g3" && r.team_id == "NYK").unwrap();
        assert!(nyk_g3.lag.is_none());

        let lal_g1 = out.rows.iter().find(|r| r.game_id == "g1" && r.team_id == "LAL").unwrap();
        assert!(lal_g1.lag.is_none());
        assert_eq!(lal_g1.line.as_ref().unwrap().spread, Some(-5.5));
        assert_eq!(lal_g1.covered, Some(CoverOutcome::NoCover));
        let nyk_g1 = out.rows.iter().find(|r| r.game_id == "g1" && r.team_id == "NYK").unwrap();
        assert_eq!(nyk_g1.line.as_ref().unwrap().spread, Some(5.5));
        assert_eq!(nyk_g1.covered, Some(CoverOutcome::Cover));

        let opening = build_team_game_rows(&games, &lines, &[], &stadiums, LineSelection::Opening).unwrap();
        assert_eq!(opening.rows[0].line.as_ref().unwrap().spread, Some(-4.5));
    }

    #[test]
    fn unknown_team_is_fatal() {
        let games = vec![game("g1", 2014, "2014-11-01T19:30:00-07:00", "LAL", "XXX", 100, 95)];
        let stadiums = vec![stadium("LAL", 34.043, -118.267, "31080")];
        assert!(matches!(
            build_team_game_rows(&games, &[], &[], &stadiums, LineSelection::Closing),
            Err(Error::UnknownTeam(t)) if t == "XXX"
        ));
    }
}
