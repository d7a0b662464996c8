//! Command-line front end.
//!
//! Every subcommand writes its artifacts plus `manifest.json` into one output
//! directory. Failures print a single JSON line on stderr and exit nonzero.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::backtest::{fit_model, profit_curve, walk_forward, BetLedger, Policy};
use crate::error::{Error, Result};
use crate::features::{compute_all, Feature, FeatureContext, ModelSpec, Standardization};
use crate::geo::Coordinate;
use crate::ingest::{timestamp_string, DataPaths, Dataset, InputTables, League, LineSelection};
use crate::report::{cooccurrence_matrix, new_york, RegressionTable, TableLayout};
use crate::synth::{generate_league, SynthConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "hangover", version, about = "Nightlife exposure and next-day performance")]
pub struct Cli {
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic league with a known injected effect.
    Synth(SynthArgs),
    /// Compute per-row features and write them as CSV.
    Features(FitArgs),
    /// Fit one or more model specs and render the regression table.
    Fit(FitArgs),
    /// Fit the placebo variant of a spec (rest beyond the party window).
    Placebo(FitArgs),
    /// Walk-forward evaluation; money-line betting for MLB.
    Backtest(BacktestArgs),
    /// Export the last-venue by current-venue co-occurrence matrix.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeagueArg {
    Nba,
    Mlb,
}

impl From<LeagueArg> for League {
    fn from(l: LeagueArg) -> Self {
        match l {
            LeagueArg::Nba => League::Nba,
            LeagueArg::Mlb => League::Mlb,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum)]
    pub league: Option<LeagueArg>,
    /// Output directory; defaults to runs/<subcommand>-<config hash>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated MSA codes treated as party cities.
    #[arg(long, value_delimiter = ',')]
    pub party_cities: Option<Vec<String>>,
    #[arg(long)]
    pub window_hours: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Directory holding the five standard CSV files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub games: Option<PathBuf>,
    #[arg(long)]
    pub lines: Option<PathBuf>,
    #[arg(long)]
    pub boxes: Option<PathBuf>,
    #[arg(long)]
    pub establishments: Option<PathBuf>,
    #[arg(long)]
    pub stadiums: Option<PathBuf>,
    /// Use opening rather than closing lines.
    #[arg(long)]
    pub opening_lines: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// TOML file with any subset of the generator settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seasons: Option<usize>,
    #[arg(long)]
    pub market_aware: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: InputArgs,
    /// Model spec TOML; league presets when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    Model,
    Market,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: InputArgs,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "model")]
    pub policy: PolicyArg,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: InputArgs,
    /// Anchor for venue ordering as `lat,lon`; New York when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<String>,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

/// Entry point for the binary: returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            error_line("usage", first);
            return 2;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if !outcome.summary.is_empty() {
                print!("{}", outcome.summary);
            }
            0
        }
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            1
        }
    }
}

fn error_line(kind: &str, message: &str) {
    let line = json!({ "error": kind, "message": message });
    let _ = writeln!(std::io::stderr(), "{line}");
}

pub fn run(cli: &Cli) -> Result<RunOutcome> {
    let log = |m: &str| {
        if cli.verbose {
            eprintln!("{m}");
        }
    };
    match &cli.command {
        Command::Synth(a) => run_synth(a, &log),
        Command::Features(a) => run_features(a, &log),
        Command::Fit(a) => run_fit(a, false, &log),
        Command::Placebo(a) => run_fit(a, true, &log),
        Command::Backtest(a) => run_backtest(a, &log),
        Command::Report(a) => run_report(a, &log),
    }
}

// ---------------------------------------------------------------------------
// Configuration resolution
// ---------------------------------------------------------------------------

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Overlays `top` onto `base`, recursing into tables.
fn merge_toml(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_toml(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Defaults, then the file, then flags.
pub fn resolve_synth_config(a: &SynthArgs) -> Result<SynthConfig> {
    let file: toml::Table = match &a.config {
        Some(p) => toml::from_str(&read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => toml::Table::new(),
    };
    let league = match a.common.league {
        Some(l) => League::from(l),
        None => match file.get("league").and_then(|v| v.as_str()) {
            Some(s) => s.parse()?,
            None => League::Nba,
        },
    };
    let seed = match (a.seed, file.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .as_integer()
            .and_then(|i| u64::try_from(i).ok())
            .ok_or_else(|| Error::Config("`seed` must be a non-negative integer".into()))?,
        (None, None) => return Err(Error::Config("synth requires --seed (or `seed` in the config file)".into())),
    };
    let defaults = match league {
        League::Nba => SynthConfig::nba(seed),
        League::Mlb => SynthConfig::mlb(seed),
    };
    let mut table = toml::Table::try_from(&defaults).map_err(|e| Error::Config(e.to_string()))?;
    merge_toml(&mut table, file);
    let mut cfg: SynthConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.league = league;
    cfg.seed = seed;
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if let Some(n) = a.seasons {
        cfg.n_seasons = n;
    }
    if a.market_aware {
        cfg.market_aware = true;
    }
    if let Some(p) = &a.common.party_cities {
        cfg.party_msas = p.clone();
    }
    if let Some(w) = a.common.window_hours {
        cfg.window_hours = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(spec: &mut ModelSpec, common: &Common) -> Result<()> {
    if let Some(p) = &common.party_cities {
        spec.party_cities = p.clone();
    }
    if let Some(w) = common.window_hours {
        spec.window_hours = w;
    }
    spec.validate()
}

fn load_spec(path: &Path) -> Result<ModelSpec> {
    ModelSpec::from_toml(&read_to_string(path)?).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Swaps the treatment feature for the placebo indicator.
pub fn placebo_variant(spec: &ModelSpec) -> ModelSpec {
    let treatments = [
        Feature::PartyDiscrete,
        Feature::PartyContinuous,
        Feature::NightlifeNoWeekend,
        Feature::Placebo,
    ];
    let mut features: Vec<Feature> = spec.features.iter().copied().filter(|f| !treatments.contains(f)).collect();
    features.insert(0, Feature::Placebo);
    ModelSpec {
        name: Some("placebo".to_string()),
        features,
        ..spec.clone()
    }
}

fn league_of(common: &Common) -> Result<League> {
    common
        .league
        .map(League::from)
        .ok_or_else(|| Error::Config("--league is required".into()))
}

fn data_paths(inputs: &InputArgs) -> Result<DataPaths> {
    let base = inputs.data.as_ref().map(DataPaths::in_dir);
    let pick = |flag: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| -> Result<PathBuf> {
        flag.clone()
            .or_else(|| from_dir.cloned())
            .ok_or_else(|| Error::Config(format!("missing input: pass --{name} or --data")))
    };
    let paths = DataPaths {
        games: pick(&inputs.games, base.as_ref().map(|b| &b.games), "games")?,
        lines: pick(&inputs.lines, base.as_ref().map(|b| &b.lines), "lines")?,
        boxes: pick(&inputs.boxes, base.as_ref().map(|b| &b.boxes), "boxes")?,
        establishments: pick(&inputs.establishments, base.as_ref().map(|b| &b.establishments), "establishments")?,
        stadiums: pick(&inputs.stadiums, base.as_ref().map(|b| &b.stadiums), "stadiums")?,
    };
    for p in paths.all() {
        if !p.is_file() {
            return Err(Error::io(
                p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
            ));
        }
    }
    Ok(paths)
}

fn selection(inputs: &InputArgs) -> LineSelection {
    if inputs.opening_lines {
        LineSelection::Opening
    } else {
        LineSelection::Closing
    }
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Collects artifacts for one run directory and writes the manifest last.
struct RunDir {
    subcommand: &'static str,
    dir: PathBuf,
    config: serde_json::Value,
    config_hash: String,
    seed: Option<u64>,
    inputs: Vec<(String, PathBuf)>,
    outputs: Vec<PathBuf>,
}

impl RunDir {
    fn open(
        subcommand: &'static str,
        out: Option<&PathBuf>,
        config: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<Self> {
        let canonical = serde_json::to_string(&config)?;
        let config_hash = sha256_hex(canonical.as_bytes());
        let dir = match out {
            Some(d) => d.clone(),
            None => PathBuf::from("runs").join(format!("{subcommand}-{}", &config_hash[..12])),
        };
        if dir.join(MANIFEST_FILE).exists() {
            return Err(Error::Config(format!(
                "{} already holds a run; choose a fresh --out",
                dir.display()
            )));
        }
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            subcommand,
            dir,
            config,
            config_hash,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn add_inputs(&mut self, paths: &DataPaths) {
        let names = ["games", "lines", "boxes", "establishments", "stadiums"];
        for (n, p) in names.iter().zip(paths.all()) {
            self.inputs.push((n.to_string(), p.to_path_buf()));
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn write(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.path(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    fn finish(mut self, summary: String) -> Result<RunOutcome> {
        self.outputs.sort();
        self.outputs.dedup();
        let mut inputs = serde_json::Map::new();
        for (name, p) in &self.inputs {
            inputs.insert(
                name.clone(),
                json!({ "path": p.display().to_string(), "sha256": file_hash(p)? }),
            );
        }
        let mut outputs = serde_json::Map::new();
        for p in &self.outputs {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            outputs.insert(name, json!(file_hash(p)?));
        }
        let manifest = json!({
            "format": MANIFEST_FORMAT,
            "subcommand": self.subcommand,
            "config": self.config,
            "config_sha256": self.config_hash,
            "seed": self.seed,
            "inputs": inputs,
            "outputs": outputs,
            "versions": {
                "hangover": env!("CARGO_PKG_VERSION"),
            },
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let mpath = self.dir.join(MANIFEST_FILE);
        std::fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))?;
        let mut artifacts = self.outputs;
        artifacts.push(mpath);
        Ok(RunOutcome {
            out_dir: self.dir,
            artifacts,
            summary,
        })
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run_synth(a: &SynthArgs, log: &dyn Fn(&str)) -> Result<RunOutcome> {
    let cfg = resolve_synth_config(a)?;
    let mut run = RunDir::open("synth", a.common.out.as_ref(), json!({ "synth": &cfg }), Some(cfg.seed))?;
    log(&format!("generating {} seasons of {} (seed {})", cfg.n_seasons, cfg.league, cfg.seed));
    let league = generate_league(&cfg)?;
    league.write(&run.dir)?;
    let written = DataPaths::in_dir(&run.dir);
    for p in written.all() {
        run.outputs.push(p.to_path_buf());
    }
    run.path(crate::synth::TRUTH_FILE);
    run.write("synth_config.toml", &cfg.to_toml())?;
    let summary = format!(
        "{} games, {} treated team-games written to {}\n",
        league.tables.games.len(),
        league.truth.treated_team_games,
        run.dir.display()
    );
    run.finish(summary)
}

fn load_dataset(league: League, inputs: &InputArgs, run: &mut RunDir, log: &dyn Fn(&str)) -> Result<Dataset> {
    let paths = data_paths(inputs)?;
    run.add_inputs(&paths);
    log("reading inputs");
    let tables = InputTables::read(&paths)?;
    let ds = Dataset::from_tables(league, &tables, selection(inputs))?;
    log(&format!("{} team-game rows", ds.rows.len()));
    Ok(ds)
}

fn input_config(inputs: &InputArgs) -> serde_json::Value {
    json!({ "opening_lines": inputs.opening_lines })
}

fn fit_specs(a: &FitArgs, league: League, placebo: bool) -> Result<Vec<ModelSpec>> {
    let mut specs = match &a.spec {
        Some(p) => vec![load_spec(p)?],
        None if placebo => vec![ModelSpec::default_for(league).remove(0)],
        None => ModelSpec::default_for(league),
    };
    if placebo {
        specs = specs.iter().map(placebo_variant).collect();
    }
    for s in &mut specs {
        apply_overrides(s, &a.common)?;
    }
    Ok(specs)
}

fn run_fit(a: &FitArgs, placebo: bool, log: &dyn Fn(&str)) -> Result<RunOutcome> {
    let league = league_of(&a.common)?;
    let specs = fit_specs(a, league, placebo)?;
    let name = if placebo { "placebo" } else { "fit" };
    let config = json!({ "league": league, "specs": &specs, "inputs": input_config(&a.inputs) });
    let mut run = RunDir::open(name, a.common.out.as_ref(), config, None)?;
    let ds = load_dataset(league, &a.inputs, &mut run, log)?;

    let mut fitted = Vec::new();
    for s in &specs {
        log(&format!("fitting {}", s.label()));
        fitted.push(fit_model(&ds, &ds.rows, s)?);
    }
    let outcomes: std::collections::BTreeSet<_> = specs.iter().map(|s| s.outcome.label()).collect();
    let mut layout = TableLayout::new(outcomes.into_iter().collect::<Vec<_>>().join(" / "));
    layout.title = Some(format!("{league}"));
    layout.column_titles = specs.iter().map(ModelSpec::label).collect();
    let fits: Vec<_> = fitted.iter().map(|f| f.fit.clone()).collect();
    let table = RegressionTable::build(&fits, &layout)?;
    let text = table.render_text();
    run.write("table.txt", &text)?;
    run.write("table.json", &table.to_json())?;
    let models: Vec<_> = fitted
        .iter()
        .map(|f| json!({ "spec": &f.spec, "fit": &f.fit, "exclusions": &f.exclusions, "standardization": &f.standardization }))
        .collect();
    run.write("models.json", &serde_json::to_string_pretty(&models)?)?;
    run.finish(text)
}

fn run_features(a: &FitArgs, log: &dyn Fn(&str)) -> Result<RunOutcome> {
    let league = league_of(&a.common)?;
    let mut spec = match &a.spec {
        Some(p) => load_spec(p)?,
        None => ModelSpec::default_for(league).remove(0),
    };
    apply_overrides(&mut spec, &a.common)?;
    let config = json!({
        "league": league,
        "party_cities": &spec.party_cities,
        "window_hours": spec.window_hours,
        "inputs": input_config(&a.inputs),
    });
    let mut run = RunDir::open("features", a.common.out.as_ref(), config, None)?;
    let ds = load_dataset(league, &a.inputs, &mut run, log)?;
    let cfg = spec.feature_config();
    let standardization = Standardization::fit(&ds.rows, &ds.establishments);
    let ctx = FeatureContext {
        config: &cfg,
        standardization: &standardization,
        establishments: &ds.establishments,
    };
    let feats = compute_all(&ds.rows, &ctx)?;
    let mut out = String::from("game_id,team_id,season_id,start");
    for f in Feature::ALL {
        out.push(',');
        out.push_str(f.name());
    }
    out.push('\n');
    for (r, fv) in ds.rows.iter().zip(&feats) {
        out.push_str(&format!("{},{},{},{}", r.game_id, r.team_id, r.season_id, timestamp_string(&r.start)));
        for f in Feature::ALL {
            out.push(',');
            if let Some(v) = fv.as_ref().and_then(|fv| fv.value(f)) {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    run.write("features.csv", &out)?;
    let scored = feats.iter().filter(|f| f.is_some()).count();
    let summary = format!("{} rows, {} with features, written to {}\n", ds.rows.len(), scored, run.dir.display());
    run.finish(summary)
}

fn run_backtest(a: &BacktestArgs, log: &dyn Fn(&str)) -> Result<RunOutcome> {
    let league = league_of(&a.common)?;
    let mut spec = match &a.spec {
        Some(p) => load_spec(p)?,
        None => match league {
            League::Nba => ModelSpec::nba_party_discrete(),
            League::Mlb => ModelSpec::mlb_betting(),
        },
    };
    apply_overrides(&mut spec, &a.common)?;
    let policy = match a.policy {
        PolicyArg::Model => Policy::Model,
        PolicyArg::Market => Policy::MarketImplied,
    };
    let config = json!({ "league": league, "spec": &spec, "policy": a.policy, "inputs": input_config(&a.inputs) });
    let mut run = RunDir::open("backtest", a.common.out.as_ref(), config, None)?;
    let ds = load_dataset(league, &a.inputs, &mut run, log)?;
    let seasons = walk_forward(&ds, &spec, policy)?;

    let ledger = BetLedger::new(seasons.iter().flat_map(|s| s.ledger.entries.iter().cloned()).collect());
    let ledger_path = run.path("ledger.csv");
    ledger.write_csv(&ledger_path)?;
    let curve = profit_curve(&ledger);
    let curve_path = run.path("profit_curve.csv");
    curve.write_csv(&curve_path)?;
    let per_season: Vec<_> = seasons
        .iter()
        .map(|s| {
            json!({
                "season": s.season,
                "train_seasons": &s.train_seasons,
                "bets": s.ledger.bet_count(),
                "final_profit_cents": s.final_profit().0,
                "worst_out_of_pocket_cents": s.ledger.worst_out_of_pocket().0,
                "metrics": &s.metrics,
                "skipped": &s.skipped,
            })
        })
        .collect();
    let summary_json = json!({
        "bets": ledger.bet_count(),
        "final_profit_cents": ledger.final_profit().0,
        "worst_out_of_pocket_cents": curve.worst.0,
        "seasons": per_season,
    });
    run.write("backtest.json", &serde_json::to_string_pretty(&summary_json)?)?;

    let mut summary = String::new();
    for s in &seasons {
        summary.push_str(&format!("season {}: {} bets, profit {}", s.season, s.ledger.bet_count(), s.final_profit()));
        if let Some(m) = &s.metrics {
            summary.push_str(&format!(", accuracy {:.3}, log loss {:.4}", m.accuracy, m.log_loss));
        }
        summary.push('\n');
    }
    summary.push_str(&format!(
        "total: {} bets, profit {}, worst out of pocket {}\n",
        ledger.bet_count(),
        ledger.final_profit(),
        curve.worst
    ));
    run.finish(summary)
}

fn parse_anchor(s: &str) -> Result<Coordinate> {
    let bad = || Error::Config(format!("--anchor expects `lat,lon`, got `{s}`"));
    let (lat, lon) = s.split_once(',').ok_or_else(bad)?;
    let lat: f64 = lat.trim().parse().map_err(|_| bad())?;
    let lon: f64 = lon.trim().parse().map_err(|_| bad())?;
    Coordinate::new(lat, lon)
}

fn run_report(a: &ReportArgs, log: &dyn Fn(&str)) -> Result<RunOutcome> {
    let league = league_of(&a.common)?;
    let anchor = match &a.anchor {
        Some(s) => parse_anchor(s)?,
        None => new_york(),
    };
    let config = json!({ "league": league, "anchor": anchor, "inputs": input_config(&a.inputs) });
    let mut run = RunDir::open("report", a.common.out.as_ref(), config, None)?;
    let ds = load_dataset(league, &a.inputs, &mut run, log)?;
    let m = cooccurrence_matrix(&ds.rows, &ds.stadiums, anchor);
    let csv_path = run.path("cooccurrence.csv");
    m.write_csv(&csv_path)?;
    run.write("cooccurrence.json", &serde_json::to_string_pretty(&m)?)?;
    let summary = format!("{} venues, {} lagged rows written to {}\n", m.venues.len(), m.total(), run.dir.display());
    run.finish(summary)
}
