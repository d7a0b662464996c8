//! C ABI for the hangover toolkit.
//!
//! Conventions: every fallible function returns a [`HangoverStatus`]; results
//! go through out-pointers. On failure the message is kept per thread and can
//! be read with [`hangover_last_error_message`]. Handles are opaque and must
//! be released with their `_free` function. Strings are NUL-terminated UTF-8.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hangover::backtest::{fit_dataset, walk_forward, FittedModel, Policy};
use hangover::features::ModelSpec;
use hangover::geo::{great_circle_distance, Coordinate};
use hangover::ingest::{DataPaths, Dataset, League, LineSelection};
use hangover::market::{bet_expected_value, devig_pair, implied_probability, Cents, MoneyLine};
use hangover::report::{render_table, TableLayout};
use hangover::synth::{generate_league, SynthConfig};
use hangover::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HangoverStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Config = 6,
    EmptySample = 7,
    RankDeficient = 8,
    NonConvergence = 9,
    Separation = 10,
    NoTrainingData = 11,
    BufferTooSmall = 12,
    Other = 13,
    Panic = 14,
}

fn status_of(e: &Error) -> HangoverStatus {
    use HangoverStatus as S;
    match e {
        Error::InvalidCoordinate(_)
        | Error::UndefinedBearing
        | Error::InvalidInput(_)
        | Error::InvalidOdds(_)
        | Error::Underround(_)
        | Error::DimensionMismatch { .. }
        | Error::UnknownTeam(_) => S::InvalidArgument,
        Error::Parse { .. } | Error::Header { .. } | Error::Duplicate { .. } | Error::Csv { .. } | Error::Json(_) => {
            S::Parse
        }
        Error::Io { .. } => S::Io,
        Error::Config(_) => S::Config,
        Error::EmptySample => S::EmptySample,
        Error::RankDeficient(_) => S::RankDeficient,
        Error::NonConvergence(_) => S::NonConvergence,
        Error::Separation(_) => S::Separation,
        Error::NoTrainingData(_) => S::NoTrainingData,
        _ => S::Other,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<(&'static str, String)>> = const { RefCell::new(None) };
}

fn set_error(kind: &'static str, message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some((kind, message)));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(e: Error) -> HangoverStatus {
    let s = status_of(&e);
    set_error(e.kind(), e.to_string());
    s
}

fn null(what: &str) -> HangoverStatus {
    set_error("null_pointer", format!("`{what}` is null"));
    HangoverStatus::NullPointer
}

/// Runs `f`, turning panics into `Panic` and recording errors.
fn guard(f: impl FnOnce() -> Result<(), HangoverStatus>) -> HangoverStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HangoverStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic", "internal panic".to_string());
            HangoverStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HangoverStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("invalid_utf8", format!("`{what}` is not valid UTF-8"));
        HangoverStatus::InvalidUtf8
    })
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HangoverStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

fn league(s: &str) -> Result<League, HangoverStatus> {
    s.parse::<League>().map_err(fail)
}

/// Copies `text` plus a NUL into `buf`. `needed` always receives the full
/// size; a short buffer yields `BufferTooSmall` and is left untouched.
unsafe fn copy_out(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), HangoverStatus> {
    copy_raw(text, buf, len, needed).inspect_err(|_| {
        set_error("buffer_too_small", format!("need {} bytes", text.len() + 1));
    })
}

/// As [`copy_out`] but leaves the last error alone.
unsafe fn copy_raw(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), HangoverStatus> {
    let size = text.len() + 1;
    if let Some(n) = needed.as_mut() {
        *n = size;
    }
    if buf.is_null() || len < size {
        return Err(HangoverStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hangover_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Stable snake-case kind of this thread's last error, or an empty string.
#[no_mangle]
pub extern "C" fn hangover_last_error_kind() -> *const c_char {
    const KINDS: &[(&str, &str)] = &[
        ("invalid_coordinate", "invalid_coordinate\0"),
        ("undefined_bearing", "undefined_bearing\0"),
        ("invalid_input", "invalid_input\0"),
        ("invalid_odds", "invalid_odds\0"),
        ("underround", "underround\0"),
        ("parse", "parse\0"),
        ("schema", "schema\0"),
        ("duplicate", "duplicate\0"),
        ("unknown_team", "unknown_team\0"),
        ("empty_sample", "empty_sample\0"),
        ("rank_deficient", "rank_deficient\0"),
        ("non_convergence", "non_convergence\0"),
        ("separation", "separation\0"),
        ("dimension_mismatch", "dimension_mismatch\0"),
        ("zero_standard_error", "zero_standard_error\0"),
        ("config", "config\0"),
        ("no_trainable_prior_data", "no_trainable_prior_data\0"),
        ("unfitted_feature", "unfitted_feature\0"),
        ("table_clash", "table_clash\0"),
        ("io", "io\0"),
        ("csv", "csv\0"),
        ("json", "json\0"),
        ("null_pointer", "null_pointer\0"),
        ("invalid_utf8", "invalid_utf8\0"),
        ("buffer_too_small", "buffer_too_small\0"),
        ("panic", "panic\0"),
    ];
    let kind = LAST_ERROR.with(|e| e.borrow().as_ref().map(|(k, _)| *k));
    let s = kind
        .and_then(|k| KINDS.iter().find(|(name, _)| *name == k).map(|(_, z)| *z))
        .unwrap_or("\0");
    s.as_ptr().cast()
}

/// Copies this thread's last error message into `buf`.
/// Returns `BufferTooSmall` with `*needed` set when `len` is short; the
/// stored error is never replaced by this call.
#[no_mangle]
pub unsafe extern "C" fn hangover_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> HangoverStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().as_ref().map(|(_, m)| m.clone()).unwrap_or_default());
    match copy_raw(&msg, buf, len, needed) {
        Ok(()) => HangoverStatus::Ok,
        Err(s) => s,
    }
}

// ---------------------------------------------------------------------------
// Market and geodesy
// ---------------------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn hangover_implied_probability(american_odds: i32, out_p: *mut f64) -> HangoverStatus {
    guard(|| {
        let o = out(out_p, "out_p")?;
        *o = implied_probability(MoneyLine::new(american_odds).map_err(fail)?);
        Ok(())
    })
}

/// Proportional vig removal on two implied probabilities.
#[no_mangle]
pub unsafe extern "C" fn hangover_devig_pair(
    p_home: f64,
    p_away: f64,
    out_home: *mut f64,
    out_away: *mut f64,
) -> HangoverStatus {
    guard(|| {
        let h = out(out_home, "out_home")?;
        let a = out(out_away, "out_away")?;
        let (x, y) = devig_pair(p_home, p_away).map_err(fail)?;
        *h = x;
        *a = y;
        Ok(())
    })
}

/// Expected value in cents of staking `stake_cents` at `american_odds`.
#[no_mangle]
pub unsafe extern "C" fn hangover_expected_value_cents(
    p_model: f64,
    american_odds: i32,
    stake_cents: i64,
    out_cents: *mut i64,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_cents, "out_cents")?;
        let ml = MoneyLine::new(american_odds).map_err(fail)?;
        *o = bet_expected_value(p_model, ml, Cents(stake_cents)).map_err(fail)?.0;
        Ok(())
    })
}

/// Haversine distance in kilometres.
#[no_mangle]
pub unsafe extern "C" fn hangover_great_circle_km(
    lat1: f64,
    lon1: f64,
    lat2: f64,
    lon2: f64,
    out_km: *mut f64,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_km, "out_km")?;
        let a = Coordinate::new(lat1, lon1).map_err(fail)?;
        let b = Coordinate::new(lat2, lon2).map_err(fail)?;
        *o = great_circle_distance(&a, &b);
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Joined team-game rows for one league.
pub struct HangoverDataset {
    inner: Dataset,
}

/// Loads the five standard CSV files from `data_dir`.
#[no_mangle]
pub unsafe extern "C" fn hangover_dataset_load(
    league_name: *const c_char,
    data_dir: *const c_char,
    out_dataset: *mut *mut HangoverDataset,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_dataset, "out_dataset")?;
        let l = league(str_arg(league_name, "league_name")?)?;
        let dir = str_arg(data_dir, "data_dir")?;
        let ds = Dataset::load(l, &DataPaths::in_dir(dir), LineSelection::Closing).map_err(fail)?;
        *o = Box::into_raw(Box::new(HangoverDataset { inner: ds }));
        Ok(())
    })
}

/// Generates a synthetic league with the generator defaults for `seed`.
/// When `out_dir` is non-null the CSV files are also written there.
#[no_mangle]
pub unsafe extern "C" fn hangover_synth_dataset(
    league_name: *const c_char,
    seed: u64,
    delta: f64,
    out_dir: *const c_char,
    out_dataset: *mut *mut HangoverDataset,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_dataset, "out_dataset")?;
        let l = league(str_arg(league_name, "league_name")?)?;
        let mut cfg = match l {
            League::Nba => SynthConfig::nba(seed),
            League::Mlb => SynthConfig::mlb(seed),
        };
        cfg.delta = delta;
        let lg = generate_league(&cfg).map_err(fail)?;
        if !out_dir.is_null() {
            lg.write(Path::new(str_arg(out_dir, "out_dir")?)).map_err(fail)?;
        }
        let ds = Dataset::from_tables(l, &lg.tables, LineSelection::Closing).map_err(fail)?;
        *o = Box::into_raw(Box::new(HangoverDataset { inner: ds }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hangover_dataset_row_count(dataset: *const HangoverDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.rows.len())
}

#[no_mangle]
pub unsafe extern "C" fn hangover_dataset_free(dataset: *mut HangoverDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// A fitted regression.
pub struct HangoverModel {
    inner: FittedModel,
}

unsafe fn spec_arg(spec_toml: *const c_char, league: League) -> Result<ModelSpec, HangoverStatus> {
    if spec_toml.is_null() {
        return Ok(ModelSpec::default_for(league).remove(0));
    }
    ModelSpec::from_toml(str_arg(spec_toml, "spec_toml")?).map_err(fail)
}

/// Fits a spec given as TOML text; null selects the league's first preset.
#[no_mangle]
pub unsafe extern "C" fn hangover_model_fit(
    dataset: *const HangoverDataset,
    spec_toml: *const c_char,
    out_model: *mut *mut HangoverModel,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_model, "out_model")?;
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        let spec = spec_arg(spec_toml, ds.league)?;
        let fitted = fit_dataset(ds, &spec).map_err(fail)?;
        *o = Box::into_raw(Box::new(HangoverModel { inner: fitted }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hangover_model_n_obs(model: *const HangoverModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.fit.n_obs)
}

/// Estimate, standard error and p-value of one term. Any out-pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn hangover_model_term(
    model: *const HangoverModel,
    term: *const c_char,
    out_estimate: *mut f64,
    out_std_error: *mut f64,
    out_p_value: *mut f64,
) -> HangoverStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let name = str_arg(term, "term")?;
        let t = m.fit.term(name).ok_or_else(|| {
            fail(Error::InvalidInput(format!("no term named `{name}`")))
        })?;
        if let Some(p) = out_estimate.as_mut() {
            *p = t.estimate;
        }
        if let Some(p) = out_std_error.as_mut() {
            *p = t.std_error;
        }
        if let Some(p) = out_p_value.as_mut() {
            *p = t.p_value;
        }
        Ok(())
    })
}

/// The fit as JSON.
#[no_mangle]
pub unsafe extern "C" fn hangover_model_json(
    model: *const HangoverModel,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HangoverStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        copy_out(&m.fit.to_json(), buf, len, needed)
    })
}

/// The fit rendered as a one-column monospace regression table.
#[no_mangle]
pub unsafe extern "C" fn hangover_model_table(
    model: *const HangoverModel,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HangoverStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let mut layout = TableLayout::new(m.spec.outcome.label());
        layout.column_titles = vec![m.spec.label()];
        let t = render_table(std::slice::from_ref(&m.fit), &layout).map_err(fail)?;
        copy_out(&t.text, buf, len, needed)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hangover_model_free(model: *mut HangoverModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// ---------------------------------------------------------------------------
// Backtest
// ---------------------------------------------------------------------------

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HangoverPolicy {
    Model = 0,
    MarketImplied = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HangoverBacktestSummary {
    pub seasons: usize,
    pub bets: usize,
    pub final_profit_cents: i64,
    pub worst_out_of_pocket_cents: i64,
}

/// Walk-forward backtest over all seasons; null spec picks the betting preset
/// for MLB and the discrete preset for NBA.
#[no_mangle]
pub unsafe extern "C" fn hangover_backtest(
    dataset: *const HangoverDataset,
    spec_toml: *const c_char,
    policy: HangoverPolicy,
    out_summary: *mut HangoverBacktestSummary,
) -> HangoverStatus {
    guard(|| {
        let o = out(out_summary, "out_summary")?;
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        let spec = if spec_toml.is_null() {
            match ds.league {
                League::Nba => ModelSpec::nba_party_discrete(),
                League::Mlb => ModelSpec::mlb_betting(),
            }
        } else {
            spec_arg(spec_toml, ds.league)?
        };
        let policy = match policy {
            HangoverPolicy::Model => Policy::Model,
            HangoverPolicy::MarketImplied => Policy::MarketImplied,
        };
        let seasons = walk_forward(ds, &spec, policy).map_err(fail)?;
        let entries: Vec<_> = seasons.iter().flat_map(|s| s.ledger.entries.iter().cloned()).collect();
        let ledger = hangover::backtest::BetLedger::new(entries);
        *o = HangoverBacktestSummary {
            seasons: seasons.len(),
            bets: ledger.bet_count(),
            final_profit_cents: ledger.final_profit().0,
            worst_out_of_pocket_cents: ledger.worst_out_of_pocket().0,
        };
        Ok(())
    })
}
