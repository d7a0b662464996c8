//! Money-line and point-spread semantics.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An American-odds quote. Negative odds mark the favourite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct MoneyLine(i32);

impl MoneyLine {
    pub fn new(american_odds: i32) -> Result<Self> {
        if american_odds.unsigned_abs() < 100 {
            return Err(Error::InvalidOdds(american_odds));
        }
        Ok(Self(american_odds))
    }

    pub fn odds(self) -> i32 {
        self.0
    }

    /// Converts a win probability (vig included) to the nearest American quote.
    pub fn from_probability(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("probability {p} outside (0, 1)")));
        }
        let odds = if p >= 0.5 {
            -(100.0 * p / (1.0 - p)).round()
        } else {
            (100.0 * (1.0 - p) / p).round()
        };
        Self::new(odds as i32)
    }
}

impl TryFrom<i32> for MoneyLine {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MoneyLine> for i32 {
    fn from(ml: MoneyLine) -> i32 {
        ml.0
    }
}

impl fmt::Display for MoneyLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// Home-perspective point spread; negative means the home side is favoured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpreadLine(f64);

impl SpreadLine {
    pub fn new(home_spread: f64) -> Result<Self> {
        if !home_spread.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite spread {home_spread}")));
        }
        if (home_spread * 2.0).fract() != 0.0 {
            return Err(Error::InvalidInput(format!(
                "spread {home_spread} is not on a half-point grid"
            )));
        }
        Ok(Self(home_spread))
    }

    pub fn home(self) -> f64 {
        self.0
    }

    pub fn away(self) -> f64 {
        -self.0
    }
}

impl TryFrom<f64> for SpreadLine {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpreadLine> for f64 {
    fn from(s: SpreadLine) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoverOutcome {
    Cover,
    NoCover,
    Push,
}

impl CoverOutcome {
    /// The other side's outcome for the same game.
    pub fn mirror(self) -> Self {
        match self {
            CoverOutcome::Cover => CoverOutcome::NoCover,
            CoverOutcome::NoCover => CoverOutcome::Cover,
            CoverOutcome::Push => CoverOutcome::Push,
        }
    }
}

/// Whole cents. All ledger arithmetic happens here so sums are exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    pub fn from_dollars(dollars: i64) -> Self {
        Cents(dollars * 100)
    }

    /// Rounds half away from zero.
    pub fn from_dollars_f64(dollars: f64) -> Self {
        Cents((dollars * 100.0).round() as i64)
    }

    pub fn as_dollars(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Neg for Cents {
    type Output = Cents;
    fn neg(self) -> Cents {
        Cents(-self.0)
    }
}

impl std::iter::Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        iter.fold(Cents::ZERO, Add::add)
    }
}

/// Break-even win probability implied by a quote (vig included).
pub fn implied_probability(ml: MoneyLine) -> f64 {
    let m = f64::from(ml.0.unsigned_abs());
    if ml.0 < 0 {
        m / (m + 100.0)
    } else {
        100.0 / (m + 100.0)
    }
}

/// Proportional vig removal for a two-way market.
pub fn devig_pair(p_home: f64, p_away: f64) -> Result<(f64, f64)> {
    for p in [p_home, p_away] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("probability {p} outside (0, 1)")));
        }
    }
    let total = p_home + p_away;
    if total < 1.0 {
        return Err(Error::Underround(total));
    }
    let home = p_home / total;
    Ok((home, 1.0 - home))
}

/// Profit per unit staked when the bet wins.
pub fn payout_per_unit(ml: MoneyLine) -> f64 {
    let m = f64::from(ml.0.unsigned_abs());
    if ml.0 < 0 {
        100.0 / m
    } else {
        m / 100.0
    }
}

/// Exact winning profit for a stake, rounded half away from zero to the cent.
pub fn winning_profit(ml: MoneyLine, stake: Cents) -> Cents {
    let stake = i128::from(stake.0);
    let m = i128::from(ml.0.unsigned_abs());
    let (num, den) = if ml.0 < 0 { (stake * 100, m) } else { (stake * m, 100) };
    let q = num / den;
    let r = num % den;
    let rounded = if 2 * r.abs() >= den { q + num.signum() } else { q };
    Cents(rounded as i64)
}

pub fn spread_cover_outcome(home_margin: i32, home_spread: f64) -> CoverOutcome {
    let adjusted = f64::from(home_margin) + home_spread;
    if adjusted > 0.0 {
        CoverOutcome::Cover
    } else if adjusted == 0.0 {
        CoverOutcome::Push
    } else {
        CoverOutcome::NoCover
    }
}

/// Expected profit in dollars before rounding.
pub fn expected_value_dollars(p_model: f64, ml: MoneyLine, stake: Cents) -> f64 {
    let stake = stake.as_dollars();
    p_model * stake * payout_per_unit(ml) - (1.0 - p_model) * stake
}

/// Expected profit of a bet, to the cent.
pub fn bet_expected_value(p_model: f64, ml: MoneyLine, stake: Cents) -> Result<Cents> {
    if !(p_model > 0.0 && p_model < 1.0) {
        return Err(Error::InvalidInput(format!(
            "model probability {p_model} outside (0, 1)"
        )));
    }
    if stake.0 <= 0 {
        return Err(Error::InvalidInput(format!("stake {stake} must be positive")));
    }
    Ok(Cents::from_dollars_f64(expected_value_dollars(p_model, ml, stake)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ml(o: i32) -> MoneyLine {
        MoneyLine::new(o).unwrap()
    }

    #[test]
    fn rejects_inside_the_dead_zone() {
        for o in [-99, -1, 0, 1, 99] {
            assert!(matches!(MoneyLine::new(o), Err(Error::InvalidOdds(_))));
        }
        assert!(MoneyLine::new(-100).is_ok());
        assert!(serde_json::from_str::<MoneyLine>("50").is_err());
    }

    #[test]
    fn implied_probability_fixtures() {
        assert_abs_diff_eq!(implied_probability(ml(-150)), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(implied_probability(ml(150)), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(implied_probability(ml(100)), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn devig_fixtures() {
        let (h, a) = devig_pair(0.6, 0.6).unwrap();
        assert_abs_diff_eq!(h, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        let (h, a) = devig_pair(0.6, 0.5).unwrap();
        assert_abs_diff_eq!(h, 6.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a, 5.0 / 11.0, epsilon = 1e-15);
        let p = implied_probability(ml(-110));
        let (h, a) = devig_pair(p, p).unwrap();
        assert_eq!((h, a), (0.5, 0.5));
        assert!(matches!(devig_pair(0.4, 0.5), Err(Error::Underround(_))));
        assert!(devig_pair(0.0, 1.2).is_err());
    }

    #[test]
    fn payout_fixtures() {
        assert_abs_diff_eq!(payout_per_unit(ml(150)), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(payout_per_unit(ml(-200)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(payout_per_unit(ml(-110)), 0.9091, epsilon = 1e-4);
        assert_eq!(winning_profit(ml(-110), Cents::from_dollars(100)), Cents(9091));
        assert_eq!(winning_profit(ml(150), Cents::from_dollars(100)), Cents(15000));
        assert_eq!(winning_profit(ml(-120), Cents(1)), Cents(1));
        assert_eq!(winning_profit(ml(-300), Cents(1)), Cents(0));
    }

    #[test]
    fn cover_fixtures() {
        assert_eq!(spread_cover_outcome(4, -3.5), CoverOutcome::Cover);
        assert_eq!(spread_cover_outcome(3, -3.0), CoverOutcome::Push);
        assert_eq!(spread_cover_outcome(-2, 1.5), CoverOutcome::NoCover);
        assert_eq!(CoverOutcome::Push.mirror(), CoverOutcome::Push);
        assert_eq!(CoverOutcome::Cover.mirror(), CoverOutcome::NoCover);
    }

    #[test]
    fn expected_value_fixtures() {
        let s = Cents::from_dollars(100);
        assert_eq!(bet_expected_value(0.55, ml(-110), s).unwrap(), Cents(500));
        assert_eq!(bet_expected_value(0.50, ml(100), s).unwrap(), Cents(0));
        // break-even probability at -110 is 110/210; with the vig removed it is 0.5,
        // leaving 0.5 * 90.909 - 50 = -4.545 dollars
        assert_eq!(bet_expected_value(0.5, ml(-110), s).unwrap(), Cents(-455));
        // +150/-170: de-vigged home prob 0.4 / (0.4 + 0.6296) = 0.38849
        let (p, _) = devig_pair(implied_probability(ml(150)), implied_probability(ml(-170))).unwrap();
        assert_eq!(bet_expected_value(p, ml(150), s).unwrap(), Cents(-288));
        assert!(bet_expected_value(1.0, ml(100), s).is_err());
        assert!(bet_expected_value(0.5, ml(100), Cents(0)).is_err());
    }

    #[test]
    fn from_probability_round_trips_common_quotes() {
        for o in [-300, -150, -110, 100, 120, 250] {
            let back = MoneyLine::from_probability(implied_probability(ml(o))).unwrap();
            assert_eq!(back.odds(), if o == 100 { -100 } else { o });
        }
    }

    #[test]
    fn cents_display() {
        assert_eq!(Cents(-8900).to_string(), "-89.00");
        assert_eq!(Cents(1_150_005).to_string(), "11500.05");
        assert_eq!(Cents(-5).to_string(), "-0.05");
    }

    #[test]
    fn spread_grid() {
        assert!(SpreadLine::new(-3.5).is_ok());
        assert!(SpreadLine::new(2.25).is_err());
        assert!(SpreadLine::new(f64::NAN).is_err());
    }
}
