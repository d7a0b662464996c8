//! Regression tables and co-occurrence exports.
//!
//! Text tables show three decimals; the JSON twin keeps full precision and
//! parses back to an identical [`RegressionTable`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{great_circle_distance, Coordinate};
use crate::ingest::{StadiumRecord, TeamGameRow};
use crate::regress::{ModelFit, ModelKind, StarTier};

pub const STAR_NOTE: &str = "*p<0.1; **p<0.05; ***p<0.01";
const INTERCEPT: &str = "intercept";
const TEAM_PREFIX: &str = "team:";
const MINUS: char = '\u{2212}';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableLayout {
    pub title: Option<String>,
    pub dependent_variable: String,
    /// One per fit; `(1)`, `(2)`, ... when empty.
    #[serde(default)]
    pub column_titles: Vec<String>,
    /// Terms listed first, in this order. Remaining terms follow in order of
    /// first appearance, with the intercept last.
    #[serde(default)]
    pub row_order: Vec<String>,
    /// Display labels keyed by term name.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    /// Team fixed-effect rows are collapsed into a Yes/No footer unless set.
    #[serde(default)]
    pub show_team_effects: bool,
}

impl TableLayout {
    pub fn new(dependent_variable: impl Into<String>) -> Self {
        Self {
            title: None,
            dependent_variable: dependent_variable.into(),
            column_titles: Vec::new(),
            row_order: Vec::new(),
            labels: BTreeMap::new(),
            show_team_effects: false,
        }
    }

    fn label(&self, term: &str) -> String {
        match self.labels.get(term) {
            Some(l) => l.clone(),
            None if term == INTERCEPT => "Constant".to_string(),
            None => term.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub estimate: f64,
    #[serde(with = "crate::regress::nullable")]
    pub std_error: f64,
    #[serde(with = "crate::regress::nullable")]
    pub p_value: f64,
    pub stars: StarTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub term: String,
    pub label: String,
    pub cells: Vec<Option<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FooterValue {
    Count(u64),
    Number(f64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FooterRow {
    pub label: String,
    pub values: Vec<Option<FooterValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableColumn {
    pub title: String,
    pub kind: ModelKind,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    pub title: Option<String>,
    pub dependent_variable: String,
    pub columns: Vec<TableColumn>,
    pub rows: Vec<TableRow>,
    pub footer: Vec<FooterRow>,
    pub note: String,
}

/// Both renderings of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTable {
    pub text: String,
    pub json: String,
}

pub fn render_table(fits: &[ModelFit], layout: &TableLayout) -> Result<RenderedTable> {
    let table = RegressionTable::build(fits, layout)?;
    Ok(RenderedTable {
        text: table.render_text(),
        json: table.to_json(),
    })
}

fn is_team(term: &str) -> bool {
    term.starts_with(TEAM_PREFIX)
}

impl RegressionTable {
    pub fn build(fits: &[ModelFit], layout: &TableLayout) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::InvalidInput("a table needs at least one fit".into()));
        }
        if !layout.column_titles.is_empty() && layout.column_titles.len() != fits.len() {
            return Err(Error::DimensionMismatch {
                expected: fits.len(),
                got: layout.column_titles.len(),
            });
        }

        let mut order: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        for t in &layout.row_order {
            if !seen.insert(t.clone()) {
                return Err(Error::TableClash(format!("`{t}` listed twice in row order")));
            }
            order.push(t.clone());
        }
        let mut has_intercept = false;
        for fit in fits {
            for name in fit.terms.keys() {
                if name == INTERCEPT && !seen.contains(INTERCEPT) {
                    has_intercept = true;
                    continue;
                }
                if seen.insert(name.clone()) {
                    order.push(name.clone());
                }
            }
        }
        if has_intercept {
            order.push(INTERCEPT.to_string());
        }
        let any_team = order.iter().any(|t| is_team(t));
        if !layout.show_team_effects {
            order.retain(|t| !is_team(t));
        }

        // Distinct terms must stay distinguishable once labelled.
        let mut by_label: BTreeMap<String, &str> = BTreeMap::new();
        let mut rows = Vec::new();
        for term in &order {
            let label = layout.label(term);
            if let Some(other) = by_label.insert(label.clone(), term) {
                return Err(Error::TableClash(format!(
                    "`{other}` and `{term}` both render as `{label}`"
                )));
            }
            let cells = fits
                .iter()
                .map(|f| {
                    f.terms.get(term).map(|t| Cell {
                        estimate: t.estimate,
                        std_error: t.std_error,
                        p_value: t.p_value,
                        stars: if t.p_value.is_finite() {
                            StarTier::from_p(t.p_value)
                        } else {
                            StarTier::None
                        },
                    })
                })
                .collect();
            if fits.iter().any(|f| f.terms.contains_key(term)) {
                rows.push(TableRow {
                    term: term.clone(),
                    label,
                    cells,
                });
            }
        }

        let columns = fits
            .iter()
            .enumerate()
            .map(|(i, f)| TableColumn {
                title: layout
                    .column_titles
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("({})", i + 1)),
                kind: f.kind,
                n_obs: f.n_obs,
            })
            .collect();

        Ok(Self {
            title: layout.title.clone(),
            dependent_variable: layout.dependent_variable.clone(),
            columns,
            rows,
            footer: footer(fits, any_team && !layout.show_team_effects),
            note: STAR_NOTE.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Monospace layout; identical input always yields identical bytes.
    pub fn render_text(&self) -> String {
        let ncol = self.columns.len();
        let mut body: Vec<(String, Vec<String>)> = Vec::new();
        for row in &self.rows {
            let mut est = Vec::with_capacity(ncol);
            let mut se = Vec::with_capacity(ncol);
            for c in &row.cells {
                match c {
                    Some(c) => {
                        est.push(format!("{}{}", fmt3(c.estimate), c.stars.stars()));
                        se.push(format!("({})", fmt3(c.std_error)));
                    }
                    None => {
                        est.push(String::new());
                        se.push(String::new());
                    }
                }
            }
            body.push((row.label.clone(), est));
            body.push((String::new(), se));
            body.push((String::new(), vec![String::new(); ncol]));
        }
        let foot: Vec<(String, Vec<String>)> = self
            .footer
            .iter()
            .map(|r| {
                let vals = r
                    .values
                    .iter()
                    .map(|v| match v {
                        None => String::new(),
                        Some(FooterValue::Count(n)) => n.to_string(),
                        Some(FooterValue::Number(x)) => fmt3(*x),
                        Some(FooterValue::Flag(b)) => (if *b { "Yes" } else { "No" }).to_string(),
                    })
                    .collect();
                (r.label.clone(), vals)
            })
            .collect();

        let width = |s: &str| s.chars().count();
        let label_w = body
            .iter()
            .chain(&foot)
            .map(|(l, _)| width(l))
            .chain([width("Note:")])
            .max()
            .unwrap_or(0);
        let col_w: Vec<usize> = (0..ncol)
            .map(|j| {
                body.iter()
                    .chain(&foot)
                    .map(|(_, v)| width(&v[j]))
                    .chain([width(&self.columns[j].title)])
                    .max()
                    .unwrap_or(0)
                    + 2
            })
            .collect();
        let total = label_w + col_w.iter().sum::<usize>();
        let rule = |c: char| c.to_string().repeat(total);
        let line = |label: &str, vals: &[String]| {
            let mut s = pad_right(label, label_w);
            for (v, w) in vals.iter().zip(&col_w) {
                s.push_str(&pad_center(v, *w));
            }
            s.trim_end().to_string()
        };

        let mut out = Vec::new();
        if let Some(t) = &self.title {
            out.push(pad_center(t, total).trim_end().to_string());
        }
        out.push(rule('='));
        let dep = format!("Dependent variable: {}", self.dependent_variable);
        let span = col_w.iter().sum::<usize>();
        out.push(format!("{}{}", " ".repeat(label_w), pad_center(&dep, span)).trim_end().to_string());
        out.push(format!("{}{}", " ".repeat(label_w), "-".repeat(span)));
        let titles: Vec<String> = self.columns.iter().map(|c| c.title.clone()).collect();
        out.push(line("", &titles));
        out.push(rule('-'));
        for (l, v) in &body {
            out.push(line(l, v));
        }
        out.push(rule('-'));
        for (l, v) in &foot {
            out.push(line(l, v));
        }
        out.push(rule('='));
        out.push(format!("{}{:>w$}", pad_right("Note:", label_w), self.note, w = total - label_w));
        let mut text = out.join("\n");
        text.push('\n');
        text
    }

    pub fn write(&self, text_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<()> {
        write_text(text_path.as_ref(), &self.render_text())?;
        write_text(json_path.as_ref(), &self.to_json())
    }
}

fn footer(fits: &[ModelFit], team_effects: bool) -> Vec<FooterRow> {
    let mut rows = Vec::new();
    let mut push = |label: &str, f: &dyn Fn(&ModelFit) -> Option<FooterValue>| {
        let values: Vec<_> = fits.iter().map(f).collect();
        if label == "Observations" || values.iter().any(Option::is_some) {
            rows.push(FooterRow {
                label: label.to_string(),
                values,
            });
        }
    };
    push("Observations", &|f| Some(FooterValue::Count(f.n_obs as u64)));
    if team_effects {
        push("Team fixed effects", &|f| {
            Some(FooterValue::Flag(f.terms.keys().any(|t| is_team(t))))
        });
    }
    push("R\u{b2}", &|f| f.r_squared.map(FooterValue::Number));
    push("Adjusted R\u{b2}", &|f| f.adj_r_squared.map(FooterValue::Number));
    push("Log Likelihood", &|f| f.log_likelihood.map(FooterValue::Number));
    push("Akaike Inf. Crit.", &|f| f.aic.map(FooterValue::Number));
    push("Residual Std. Error", &|f| {
        f.residual_variance.map(|v| FooterValue::Number(v.sqrt()))
    });
    push("F Statistic", &|f| f.f_statistic.map(|s| FooterValue::Number(s.value)));
    rows
}

/// Three decimals with a typographic minus; negative zero prints as zero.
pub fn fmt3(x: f64) -> String {
    if x.is_nan() {
        return "NA".to_string();
    }
    let s = format!("{x:.3}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        Some(rest) => format!("{MINUS}{rest}"),
        None => s,
    }
}

fn pad_right(s: &str, w: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(w.saturating_sub(n)))
}

fn pad_center(s: &str, w: usize) -> String {
    let n = s.chars().count();
    let extra = w.saturating_sub(n);
    let left = extra / 2;
    format!("{}{s}{}", " ".repeat(left), " ".repeat(extra - left))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Co-occurrence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Home,
    Away,
}

impl Facet {
    pub const ALL: [Facet; 2] = [Facet::Home, Facet::Away];

    pub fn name(self) -> &'static str {
        match self {
            Facet::Home => "home",
            Facet::Away => "away",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Midtown Manhattan.
pub fn new_york() -> Coordinate {
    Coordinate::new(40.7128, -74.0060).expect("constant coordinate is valid")
}

/// Counts of (last venue, current venue) pairs, faceted by whether the
/// current game is at home. Venues are ordered by distance from the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub anchor: Coordinate,
    pub venues: Vec<String>,
    /// `counts[facet][last][current]`.
    pub counts: Vec<Vec<Vec<u64>>>,
}

pub fn cooccurrence_matrix(
    rows: &[TeamGameRow],
    stadiums: &[StadiumRecord],
    anchor: Coordinate,
) -> CooccurrenceMatrix {
    let located: BTreeMap<&str, &Coordinate> =
        stadiums.iter().map(|s| (s.team_id.as_str(), &s.location)).collect();
    let mut names: BTreeSet<&str> = located.keys().copied().collect();
    for r in rows {
        if let Some(lag) = &r.lag {
            names.insert(&r.venue_team_id);
            names.insert(&lag.last_venue_team_id);
        }
    }
    // Unlocated venues sort after every located one, by name.
    let mut keyed: Vec<(f64, &str)> = names
        .into_iter()
        .map(|n| {
            let d = located
                .get(n)
                .map(|c| great_circle_distance(&anchor, c))
                .unwrap_or(f64::INFINITY);
            (d, n)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let venues: Vec<String> = keyed.into_iter().map(|(_, n)| n.to_string()).collect();
    let index: BTreeMap<&str, usize> = venues.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();

    let n = venues.len();
    let mut counts = vec![vec![vec![0u64; n]; n]; Facet::ALL.len()];
    for r in rows {
        let Some(lag) = &r.lag else { continue };
        let facet = if r.is_home { Facet::Home } else { Facet::Away };
        let i = index[lag.last_venue_team_id.as_str()];
        let j = index[r.venue_team_id.as_str()];
        counts[facet.index()][i][j] += 1;
    }
    CooccurrenceMatrix { anchor, venues, counts }
}

impl CooccurrenceMatrix {
    pub fn facet(&self, facet: Facet) -> &[Vec<u64>] {
        &self.counts[facet.index()]
    }

    pub fn get(&self, facet: Facet, last: &str, current: &str) -> Option<u64> {
        let i = self.venues.iter().position(|v| v == last)?;
        let j = self.venues.iter().position(|v| v == current)?;
        Some(self.counts[facet.index()][i][j])
    }

    pub fn facet_total(&self, facet: Facet) -> u64 {
        self.facet(facet).iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        Facet::ALL.iter().map(|f| self.facet_total(*f)).sum()
    }

    /// Row sums across both facets, keyed by last venue.
    pub fn last_venue_totals(&self) -> BTreeMap<String, u64> {
        self.venues
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s = Facet::ALL.iter().map(|f| self.facet(*f)[i].iter().sum::<u64>()).sum();
                (v.clone(), s)
            })
            .collect()
    }

    /// Long format, every cell included, venues in matrix order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("facet,last_venue,current_venue,count\n");
        for f in Facet::ALL {
            for (i, last) in self.venues.iter().enumerate() {
                for (j, cur) in self.venues.iter().enumerate() {
                    out.push_str(&format!("{},{last},{cur},{}\n", f.name(), self.counts[f.index()][i][j]));
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::ModelKind;

    fn published_fit() -> ModelFit {
        ModelFit::from_estimates(
            ModelKind::Logistic,
            &["party_discrete", "rest_hours", "intercept"],
            &[-0.557, -0.158, 0.1],
            &[0.149, 0.095, 0.5],
            9876,
            None,
        )
        .unwrap()
    }

    #[test]
    fn cell_has_stars_and_parenthesized_se() {
        let text = render_table(&[published_fit()], &TableLayout::new("Meet the Spread")).unwrap().text;
        let lines: Vec<&str> = text.lines().collect();
        let at = lines.iter().position(|l| l.starts_with("party_discrete")).unwrap();
        assert!(lines[at].contains("\u{2212}0.557***"));
        assert!(lines[at + 1].contains("(0.149)"));
        assert!(text.contains("\u{2212}0.158*"));
        assert!(!text.contains("\u{2212}0.158**"));
        assert!(lines.iter().any(|l| l.starts_with("Observations") && l.contains("9876")));
    }

    #[test]
    fn insignificant_estimates_get_no_stars() {
        let fit = ModelFit::from_estimates(ModelKind::Logistic, &["x"], &[0.2], &[0.2 / 1.2816], 100, None).unwrap();
        assert!(fit.terms["x"].p_value > 0.19);
        let t = RegressionTable::build(&[fit], &TableLayout::new("y")).unwrap();
        assert_eq!(t.rows[0].cells[0].unwrap().stars, StarTier::None);
        assert!(t.render_text().contains(" 0.200\n") || t.render_text().contains(" 0.200 "));
    }

    #[test]
    fn two_columns_align_shared_rows_and_blank_missing() {
        let a = published_fit();
        let b = ModelFit::from_estimates(ModelKind::Logistic, &["party_continuous", "rest_hours"], &[-0.3, 0.01], &[0.1, 0.02], 50, None)
            .unwrap();
        let t = RegressionTable::build(&[a, b], &TableLayout::new("Meet the Spread")).unwrap();
        let terms: Vec<&str> = t.rows.iter().map(|r| r.term.as_str()).collect();
        assert_eq!(terms, ["party_discrete", "rest_hours", "party_continuous", "intercept"]);
        assert!(t.rows[0].cells[1].is_none());
        assert!(t.rows[1].cells.iter().all(Option::is_some));
        assert!(t.rows[3].cells[1].is_none());
    }

    #[test]
    fn json_twin_round_trips() {
        let r = render_table(&[published_fit()], &TableLayout::new("Meet the Spread")).unwrap();
        let back = RegressionTable::from_json(&r.json).unwrap();
        assert_eq!(back.render_text(), r.text);
        assert_eq!(back.to_json(), r.json);
    }

    #[test]
    fn colliding_labels_are_a_clash() {
        let mut layout = TableLayout::new("y");
        layout.labels.insert("party_discrete".into(), "Party".into());
        layout.labels.insert("rest_hours".into(), "Party".into());
        assert!(matches!(
            RegressionTable::build(&[published_fit()], &layout),
            Err(Error::TableClash(_))
        ));
    }

    #[test]
    fn minus_zero_prints_plain() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(-1.5), "\u{2212}1.500");
        assert_eq!(fmt3(2.0), "2.000");
    }

    #[test]
    fn team_effects_collapse_to_a_flag() {
        let fit = ModelFit::from_estimates(ModelKind::Ols, &["intercept", "x", "team:BOS"], &[1.0, 2.0, 0.5], &[0.1, 0.1, 0.1], 30, Some(27.0))
            .unwrap();
        let t = RegressionTable::build(&[fit], &TableLayout::new("y")).unwrap();
        assert!(t.rows.iter().all(|r| !r.term.starts_with("team:")));
        let flag = t.footer.iter().find(|r| r.label == "Team fixed effects").unwrap();
        assert_eq!(flag.values, vec![Some(FooterValue::Flag(true))]);
    }
}
