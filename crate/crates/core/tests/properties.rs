//! Property tests over geodesy, market arithmetic, estimation, ledgers and
//! table rendering.

use chrono::{DateTime, Duration, FixedOffset, TimeZone};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use hangover::backtest::{profit_curve, settle, BetEntry, BetLedger, BetOutcome, Side};
use hangover::geo::{east_west_component, final_bearing, great_circle_distance, Coordinate};
use hangover::market::{
    bet_expected_value, devig_pair, expected_value_dollars, implied_probability, spread_cover_outcome, Cents,
    CoverOutcome, MoneyLine,
};
use hangover::regress::{fit_logistic, fit_ols, logistic_gradient, sigmoid, LogisticOptions, ModelFit, ModelKind};
use hangover::report::{render_table, RegressionTable, TableLayout};

fn coord() -> impl Strategy<Value = Coordinate> {
    (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(a, b)| Coordinate::new(a, b).unwrap())
}

fn odds() -> impl Strategy<Value = MoneyLine> {
    (100i32..=10_000, any::<bool>()).prop_map(|(m, neg)| MoneyLine::new(if neg { -m } else { m }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn distance_is_symmetric(a in coord(), b in coord()) {
        prop_assert_eq!(great_circle_distance(&a, &b), great_circle_distance(&b, &a));
    }

    #[test]
    fn distance_is_zero_only_for_coincident_points(a in coord(), b in coord()) {
        prop_assert_eq!(great_circle_distance(&a, &a), 0.0);
        prop_assert_eq!(great_circle_distance(&a, &b) == 0.0, a.coincides_with(&b));
    }

    #[test]
    fn triangle_inequality(a in coord(), b in coord(), c in coord()) {
        let (ab, bc, ac) = (great_circle_distance(&a, &b), great_circle_distance(&b, &c), great_circle_distance(&a, &c));
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn bearing_in_range_and_east_west_bounded(a in coord(), b in coord(), raw in -1e6f64..1e6) {
        if !a.coincides_with(&b) {
            let brg = final_bearing(&a, &b).unwrap();
            prop_assert!((0.0..360.0).contains(&brg));
        }
        let ew = east_west_component(raw).unwrap();
        prop_assert!((-1.0..=1.0).contains(&ew));
    }

    #[test]
    fn implied_probability_complement(m in 100i32..=1_000_000) {
        let fav = implied_probability(MoneyLine::new(-m).unwrap());
        let dog = implied_probability(MoneyLine::new(m).unwrap());
        prop_assert_eq!(fav + dog, 1.0);
    }

    #[test]
    fn devig_sums_to_one_and_keeps_order(a in odds(), b in odds()) {
        let (pa, pb) = (implied_probability(a), implied_probability(b));
        prop_assume!(pa + pb >= 1.0);
        let (h, w) = devig_pair(pa, pb).unwrap();
        prop_assert!((h + w - 1.0).abs() < 1e-12);
        prop_assert_eq!(pa.partial_cmp(&pb), h.partial_cmp(&w));
    }

    #[test]
    fn half_point_spreads_never_push(margin in -80i32..=80, half in -40i32..=40) {
        let spread = f64::from(half) + 0.5;
        prop_assert_ne!(spread_cover_outcome(margin, spread), CoverOutcome::Push);
    }

    #[test]
    fn expected_value_increases_with_probability(ml in odds(), p in 0.01f64..0.98, dp in 0.001f64..0.01) {
        let stake = Cents(10_000);
        prop_assert!(expected_value_dollars(p + dp, ml, stake) > expected_value_dollars(p, ml, stake));
        prop_assert!(bet_expected_value(p + dp, ml, stake).unwrap() >= bet_expected_value(p, ml, stake).unwrap());
    }

    #[test]
    fn even_money_with_overround_loses_at_a_coin_flip(m in 101i32..=400) {
        // both sides at -m: overround 2m/(m+100) > 1
        let ml = MoneyLine::new(-m).unwrap();
        prop_assert!(2.0 * implied_probability(ml) > 1.0);
        prop_assert!(expected_value_dollars(0.5, ml, Cents(10_000)) < 0.0);
    }
}

fn random_problem(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.5..1.5) });
    let beta = DVector::from_fn(p, |_, _| rng.random_range(-0.8..0.8));
    let eta = &x * &beta;
    let y = DVector::from_fn(n, |i, _| if rng.random::<f64>() < sigmoid(eta[i]) { 1.0 } else { 0.0 });
    (x, y)
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn score_equations_hold_at_the_optimum(seed in any::<u64>()) {
        let (x, y) = random_problem(seed, 300, 4);
        let fit = fit_logistic(&x, &y, &names(4), &LogisticOptions::default()).unwrap();
        let beta = DVector::from_vec(fit.coefficients());
        let mu = (&x * &beta).map(sigmoid);
        prop_assert!((mu.mean() - y.mean()).abs() < 1e-8);
        prop_assert!(logistic_gradient(&x, &y, &beta).amax() < 1e-6);
        let trace = &fit.diagnostics.as_ref().unwrap().loglik_trace;
        prop_assert!(trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn standard_errors_match_a_finite_difference_hessian(seed in any::<u64>()) {
        let p = 6; // intercept + 5 features
        let (x, y) = random_problem(seed, 400, p);
        let fit = fit_logistic(&x, &y, &names(p), &LogisticOptions::default()).unwrap();
        let beta = DVector::from_vec(fit.coefficients());
        let h = 1e-5;
        let mut hess = DMatrix::zeros(p, p);
        for j in 0..p {
            let mut up = beta.clone();
            up[j] += h;
            let mut dn = beta.clone();
            dn[j] -= h;
            let col = (logistic_gradient(&x, &y, &up) - logistic_gradient(&x, &y, &dn)) / (2.0 * h);
            hess.set_column(j, &col);
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let cov = (-hess).try_inverse().unwrap();
        for (j, se) in fit.std_errors().iter().enumerate() {
            let fd = cov[(j, j)].sqrt();
            prop_assert!((se - fd).abs() / fd < 1e-4, "term {j}: {se} vs {fd}");
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal_to_the_design(seed in any::<u64>(), n in 10usize..120) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = 4;
        let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-5.0..5.0) });
        let y = DVector::from_fn(n, |_, _| rng.random_range(-20.0..20.0));
        let fit = fit_ols(&x, &y, &names(p)).unwrap();
        let resid = &y - &x * DVector::from_vec(fit.coefficients());
        let scale = y.amax() * n as f64;
        prop_assert!((x.transpose() * resid).amax() / scale < 1e-8);
    }
}

fn stamp(i: usize) -> DateTime<FixedOffset> {
    FixedOffset::west_opt(5 * 3600).unwrap().with_ymd_and_hms(2013, 4, 1, 19, 0, 0).unwrap() + Duration::hours(i as i64)
}

fn entry_strategy() -> impl Strategy<Value = (i32, bool, u8, i64)> {
    (100i32..=900, any::<bool>(), 0u8..3, 100i64..50_000)
}

fn build_ledger(raw: &[(i32, bool, u8, i64)]) -> BetLedger {
    let entries = raw
        .iter()
        .enumerate()
        .map(|(i, (m, neg, o, stake))| {
            let ml = MoneyLine::new(if *neg { -m } else { *m }).unwrap();
            let outcome = [BetOutcome::Win, BetOutcome::Loss, BetOutcome::Push][*o as usize];
            let stake = Cents(*stake);
            BetEntry {
                game_id: format!("G{i}"),
                timestamp: stamp(i),
                side: if i % 2 == 0 { Side::Home } else { Side::Away },
                team_id: "T".into(),
                stake,
                moneyline: ml,
                model_prob: 0.5,
                expected_value: Cents(0),
                outcome,
                pnl: settle(outcome, ml, stake),
            }
        })
        .collect();
    BetLedger::new(entries)
}

proptest! {
    #[test]
    fn worst_out_of_pocket_matches_prefix_sums(raw in prop::collection::vec(entry_strategy(), 0..200)) {
        let ledger = build_ledger(&raw);
        let mut running = 0i64;
        let mut worst = 0i64;
        for e in &ledger.entries {
            running += e.pnl.0;
            worst = worst.min(running);
        }
        prop_assert_eq!(ledger.worst_out_of_pocket(), Cents(worst));
        prop_assert_eq!(profit_curve(&ledger).worst, Cents(worst));
        prop_assert_eq!(ledger.final_profit(), Cents(running));
    }

    #[test]
    fn resettlement_is_idempotent(raw in prop::collection::vec(entry_strategy(), 0..50)) {
        let ledger = build_ledger(&raw);
        let mut again = ledger.clone();
        again.resettle();
        again.resettle();
        prop_assert_eq!(again, ledger);
    }

    #[test]
    fn table_json_round_trips_exactly(
        est in prop::collection::vec(-50.0f64..50.0, 1..6),
        ses in prop::collection::vec(0.001f64..10.0, 6),
        n in 10usize..100_000,
    ) {
        let labels: Vec<String> = (0..est.len()).map(|j| format!("f{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let fit = ModelFit::from_estimates(ModelKind::Logistic, &refs, &est, &ses[..est.len()], n, None).unwrap();
        let r = render_table(&[fit.clone(), fit], &TableLayout::new("y")).unwrap();
        let back = RegressionTable::from_json(&r.json).unwrap();
        prop_assert_eq!(back.render_text(), r.text.clone());
        for (row, e) in back.rows.iter().zip(&est) {
            prop_assert_eq!(row.cells[0].unwrap().estimate, *e);
        }
        // locale-independent: only '.' as the decimal mark, no grouping commas
        prop_assert!(!r.text.contains(','));
    }
}
