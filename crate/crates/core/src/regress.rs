//! Logistic regression by IRLS and ordinary least squares, both solved
//! through Householder QR, with Wald-style inference.

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Norm above which a diverging coefficient vector is treated as separation.
pub const SEPARATION_NORM: f64 = 1e4;
/// Linear predictors this large mean fitted probabilities are numerically 0 or 1.
pub const SEPARATION_ETA: f64 = 35.0;
/// Threshold on `|R_jj|` of the column-normalized QR factor.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    /// Relative log-likelihood change per iteration.
    pub tolerance: f64,
    /// Largest score component divided by its column's absolute sum.
    pub gradient_tolerance: f64,
    pub max_iter: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Ols,
}

pub(crate) mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One coefficient with its inference. Non-finite values serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub estimate: f64,
    #[serde(with = "nullable")]
    pub std_error: f64,
    #[serde(with = "nullable")]
    pub statistic: f64,
    #[serde(with = "nullable")]
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FStatistic {
    #[serde(with = "nullable")]
    pub value: f64,
    pub df_model: f64,
    pub df_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub loglik_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub kind: ModelKind,
    pub n_obs: usize,
    pub terms: IndexMap<String, Term>,
    #[serde(default)]
    pub log_likelihood: Option<f64>,
    #[serde(default)]
    pub aic: Option<f64>,
    #[serde(default)]
    pub residual_variance: Option<f64>,
    #[serde(default)]
    pub r_squared: Option<f64>,
    #[serde(default)]
    pub adj_r_squared: Option<f64>,
    #[serde(default)]
    pub f_statistic: Option<FStatistic>,
    /// Residual degrees of freedom when p-values come from the t distribution.
    #[serde(default)]
    pub df_residual: Option<f64>,
    #[serde(default)]
    pub diagnostics: Option<Diagnostics>,
}

impl ModelFit {
    /// Builds a fit from reported estimates and standard errors, deriving
    /// statistics and p-values. Normal reference unless `df_residual` is given.
    pub fn from_estimates(
        kind: ModelKind,
        names: &[&str],
        estimates: &[f64],
        std_errors: &[f64],
        n_obs: usize,
        df_residual: Option<f64>,
    ) -> Result<Self> {
        if names.len() != estimates.len() || names.len() != std_errors.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: estimates.len().min(std_errors.len()),
            });
        }
        let mut terms = IndexMap::new();
        for ((name, b), se) in names.iter().zip(estimates).zip(std_errors) {
            let (stat, p) = wald(*b, *se, df_residual);
            let term = Term {
                estimate: *b,
                std_error: *se,
                statistic: stat,
                p_value: p,
            };
            if terms.insert(name.to_string(), term).is_some() {
                return Err(Error::TableClash(format!("duplicate term `{name}`")));
            }
        }
        Ok(Self {
            kind,
            n_obs,
            terms,
            log_likelihood: None,
            aic: None,
            residual_variance: None,
            r_squared: None,
            adj_r_squared: None,
            f_statistic: None,
            df_residual,
            diagnostics: None,
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.terms.keys().map(String::as_str).collect()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.values().map(|t| t.estimate).collect()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        self.terms.values().map(|t| t.std_error).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.terms.values().map(|t| t.p_value).collect()
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.get(name)
    }

    /// 95% Wald interval for a named coefficient.
    pub fn confidence_interval(&self, name: &str) -> Option<(f64, f64)> {
        let t = self.term(name)?;
        let half = 1.959963984540054 * t.std_error;
        Some((t.estimate - half, t.estimate + half))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model fit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn two_sided_normal(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

fn wald(estimate: f64, se: f64, df: Option<f64>) -> (f64, f64) {
    let stat = estimate / se;
    if stat.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    let p = match df {
        Some(df) => two_sided_t(stat, df),
        None => two_sided_normal(stat),
    };
    (stat, p)
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Bernoulli log-likelihood of `y` under the logit link at `eta`.
pub fn logistic_loglik(eta: &DVector<f64>, y: &DVector<f64>) -> f64 {
    eta.iter().zip(y.iter()).map(|(e, yi)| yi * e - softplus(*e)).sum()
}

/// Change in log-likelihood moving from `eta` to `cand`, summed from
/// per-observation differences so that tiny gains near the optimum are not
/// lost to cancellation between two large totals.
fn loglik_gain(eta: &DVector<f64>, cand: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..eta.len() {
        let d = cand[i] - eta[i];
        // softplus(e + d) - softplus(e) = ln(1 + sigmoid(e) * expm1(d))
        let t = y[i] * d - (sigmoid(eta[i]) * d.exp_m1()).ln_1p();
        // Neumaier summation
        let s2 = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s2) + t } else { (t - s2) + sum };
        sum = s2;
    }
    sum + comp
}

/// Score vector `X'(y - mu)`.
pub fn logistic_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    let mu = (x * beta).map(sigmoid);
    x.transpose() * (y - mu)
}

/// Indices of columns that are (numerically) linear combinations of earlier ones.
pub fn dependent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut scaled = x.clone();
    let mut out = Vec::new();
    let mut zero = vec![false; x.ncols()];
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            zero[j] = true;
        } else {
            col /= norm;
        }
    }
    if x.nrows() < x.ncols() {
        // more columns than rows: everything past the row count is dependent
        let r = scaled.clone().qr().r();
        for j in 0..x.ncols() {
            if zero[j] || j >= x.nrows() || r[(j, j)].abs() < RANK_TOLERANCE {
                out.push(j);
            }
        }
        return out;
    }
    let r = scaled.qr().r();
    for j in 0..x.ncols() {
        if zero[j] || r[(j, j)].abs() < RANK_TOLERANCE {
            out.push(j);
        }
    }
    out
}

fn check_shapes(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: names.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::EmptySample);
    }
    if x.nrows() <= x.ncols() {
        return Err(Error::InvalidInput(format!(
            "need more observations ({}) than columns ({})",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in design or response".into()));
    }
    let dependent = dependent_columns(x);
    if !dependent.is_empty() {
        return Err(Error::RankDeficient(dependent.into_iter().map(|j| names[j].clone()).collect()));
    }
    Ok(())
}

/// Least-squares solve of `a * b = rhs` and the inverse of `R` from the same factorization.
fn qr_solve(a: DMatrix<f64>, rhs: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let k = a.ncols();
    let qr = a.qr();
    let q = qr.q();
    let r = qr.r();
    let qtb = q.transpose() * rhs;
    let sol = r.solve_upper_triangular(&qtb)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    Some((sol, r_inv))
}

fn weighted_design(x: &DMatrix<f64>, w_sqrt: &DVector<f64>) -> DMatrix<f64> {
    let mut a = x.clone();
    for (i, mut row) in a.row_iter_mut().enumerate() {
        row *= w_sqrt[i];
    }
    a
}

/// Maximum-likelihood logistic regression.
///
/// Newton/IRLS steps are computed from the QR factorization of the weighted
/// design; each step is halved until the log-likelihood does not decrease.
pub fn fit_logistic(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String], opts: &LogisticOptions) -> Result<ModelFit> {
    check_shapes(x, y, names)?;
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidInput("logistic response must be 0 or 1".into()));
    }
    let n = x.nrows();
    let k = x.ncols();
    let mut beta = DVector::<f64>::zeros(k);
    let mut eta = x * &beta;
    let mut ll = logistic_loglik(&eta, y);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    let mut polished = false;
    // score components are compared per unit of column mass, so the
    // rounding floor of a sum over many rows does not block convergence
    let col_scale: Vec<f64> = x.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>().max(1.0)).collect();

    while iterations < opts.max_iter {
        iterations += 1;
        let mu = eta.map(sigmoid);
        let w_sqrt = mu.map(|m| (m * (1.0 - m)).max(f64::MIN_POSITIVE).sqrt());
        let rhs = DVector::from_iterator(n, (0..n).map(|i| (y[i] - mu[i]) / w_sqrt[i]));
        let (step, _) = qr_solve(weighted_design(x, &w_sqrt), &rhs)
            .ok_or_else(|| Error::RankDeficient(names.to_vec()))?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &beta + &step * t;
            let cand_eta = x * &cand;
            let gain = loglik_gain(&eta, &cand_eta, y);
            if gain >= 0.0 {
                accepted = Some((cand, cand_eta, gain));
                break;
            }
            t *= 0.5;
        }
        let Some((new_beta, new_eta, gain)) = accepted else {
            // no ascent direction left at machine precision
            converged = true;
            break;
        };
        let rel = gain / (ll.abs() + 1e-300);
        beta = new_beta;
        eta = new_eta;
        ll += gain;
        trace.push(ll);

        if beta.norm() > SEPARATION_NORM {
            return Err(Error::Separation(beta.norm()));
        }
        let grad = x.transpose() * (y - eta.map(sigmoid));
        let scaled = grad.iter().zip(&col_scale).map(|(g, c)| g.abs() / c).fold(0.0, f64::max);
        let done = gain == 0.0 || (rel < opts.tolerance && scaled < opts.gradient_tolerance);
        if done {
            if polished {
                converged = true;
                break;
            }
            // one more full step after the criterion is met
            polished = true;
        }
    }
    if !converged && !polished {
        return Err(Error::NonConvergence(opts.max_iter));
    }
    // the trace accumulates exact gains; report the directly evaluated value
    ll = logistic_loglik(&eta, y);
    let max_eta = eta.amax();
    if max_eta > SEPARATION_ETA {
        return Err(Error::Separation(beta.norm()));
    }

    let mu = eta.map(sigmoid);
    let w_sqrt = mu.map(|m| (m * (1.0 - m)).max(f64::MIN_POSITIVE).sqrt());
    let a = weighted_design(x, &w_sqrt);
    let r = a.qr().r();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient(names.to_vec()))?;
    let cov = &r_inv * r_inv.transpose();
    let grad = x.transpose() * (y - &mu);

    let mut terms = IndexMap::new();
    for j in 0..k {
        let se = cov[(j, j)].max(0.0).sqrt();
        let (stat, p) = wald(beta[j], se, None);
        terms.insert(
            names[j].clone(),
            Term {
                estimate: beta[j],
                std_error: se,
                statistic: stat,
                p_value: p,
            },
        );
    }
    Ok(ModelFit {
        kind: ModelKind::Logistic,
        n_obs: n,
        terms,
        log_likelihood: Some(ll),
        aic: Some(2.0 * k as f64 - 2.0 * ll),
        residual_variance: None,
        r_squared: None,
        adj_r_squared: None,
        f_statistic: None,
        df_residual: None,
        diagnostics: Some(Diagnostics {
            iterations,
            gradient_norm: grad.amax(),
            loglik_trace: trace,
        }),
    })
}

fn has_intercept(x: &DMatrix<f64>) -> bool {
    x.column_iter().any(|c| c.iter().all(|v| *v == 1.0))
}

/// Ordinary least squares through QR. R-squared is centered when the design
/// carries a constant column.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<ModelFit> {
    check_shapes(x, y, names)?;
    let n = x.nrows();
    let k = x.ncols();
    let (beta, r_inv) = qr_solve(x.clone(), y).ok_or_else(|| Error::RankDeficient(names.to_vec()))?;
    let resid = y - x * &beta;
    let rss = resid.norm_squared();
    let df = (n - k) as f64;
    let sigma2 = rss / df;
    let cov = (&r_inv * r_inv.transpose()) * sigma2;

    let intercept = has_intercept(x);
    let tss = if intercept {
        let mean = y.mean();
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.norm_squared()
    };
    let r2 = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 0.0 };
    let df_model = if intercept { k - 1 } else { k } as f64;
    let denom_n = if intercept { (n - 1) as f64 } else { n as f64 };
    let adj = 1.0 - (1.0 - r2) * denom_n / df;
    let f_statistic = (df_model > 0.0 && tss > 0.0).then(|| FStatistic {
        value: (r2 / df_model) / ((1.0 - r2) / df),
        df_model,
        df_residual: df,
    });

    let mut terms = IndexMap::new();
    for j in 0..k {
        let se = cov[(j, j)].max(0.0).sqrt();
        let (stat, p) = if se == 0.0 && beta[j] != 0.0 {
            (beta[j].signum() * f64::INFINITY, 0.0)
        } else {
            wald(beta[j], se, Some(df))
        };
        terms.insert(
            names[j].clone(),
            Term {
                estimate: beta[j],
                std_error: se,
                statistic: stat,
                p_value: p,
            },
        );
    }
    Ok(ModelFit {
        kind: ModelKind::Ols,
        n_obs: n,
        terms,
        log_likelihood: None,
        aic: None,
        residual_variance: Some(sigma2),
        r_squared: Some(r2),
        adj_r_squared: Some(adj),
        f_statistic,
        df_residual: Some(df),
        diagnostics: None,
    })
}

pub fn linear_predictor(fit: &ModelFit, x: &[f64]) -> Result<f64> {
    if x.len() != fit.terms.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.terms.len(),
            got: x.len(),
        });
    }
    Ok(fit.terms.values().zip(x).map(|(t, v)| t.estimate * v).sum())
}

pub fn predict_prob(fit: &ModelFit, x: &[f64]) -> Result<f64> {
    Ok(sigmoid(linear_predictor(fit, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StarTier {
    None,
    One,
    Two,
    Three,
}

impl StarTier {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            StarTier::Three
        } else if p < 0.05 {
            StarTier::Two
        } else if p < 0.1 {
            StarTier::One
        } else {
            StarTier::None
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            StarTier::None => "",
            StarTier::One => "*",
            StarTier::Two => "**",
            StarTier::Three => "***",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub tier: StarTier,
}

/// Per-coefficient Wald inference. OLS fits use the t reference.
pub fn wald_summary(fit: &ModelFit) -> Result<Vec<WaldRow>> {
    fit.terms
        .iter()
        .map(|(name, t)| {
            if !(t.std_error > 0.0) {
                return Err(Error::ZeroStandardError(name.clone()));
            }
            let (stat, p) = wald(t.estimate, t.std_error, fit.df_residual);
            Ok(WaldRow {
                name: name.clone(),
                estimate: t.estimate,
                std_error: t.std_error,
                statistic: stat,
                p_value: p,
                tier: StarTier::from_p(p),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn intercept_only_is_logit_of_mean() {
        let x = DMatrix::from_element(8, 1, 1.0);
        let y = DVector::from_vec(vec![1., 1., 1., 0., 1., 1., 1., 0.]);
        let fit = fit_logistic(&x, &y, &names(1), &LogisticOptions::default()).unwrap();
        assert!((fit.coefficients()[0] - 3f64.ln()).abs() < 1e-10);
        assert!((predict_prob(&fit, &[1.0]).unwrap() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_log_odds_ratio() {
        // a = x1&y1, b = x1&y0, c = x0&y1, d = x0&y0
        let (a, b, c, d) = (30, 10, 15, 25);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (xv, yv, n) in [(1., 1., a), (1., 0., b), (0., 1., c), (0., 0., d)] {
            for _ in 0..n {
                xs.push(xv);
                ys.push(yv);
            }
        }
        let n = xs.len();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let fit = fit_logistic(&x, &DVector::from_vec(ys), &names(2), &LogisticOptions::default()).unwrap();
        let oracle = ((a * d) as f64 / (b * c) as f64).ln();
        assert!((fit.coefficients()[1] - oracle).abs() < 1e-8);
        let aic = 2.0 * 2.0 - 2.0 * fit.log_likelihood.unwrap();
        assert_eq!(fit.aic.unwrap(), aic);
    }

    #[test]
    fn separation_is_reported() {
        let xs = [-3., -2., -1., 1., 2., 3.];
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y = DVector::from_vec(vec![0., 0., 0., 1., 1., 1.]);
        let err = fit_logistic(&x, &y, &names(2), &LogisticOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Separation(_)), "{err:?}");
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let x = DMatrix::from_fn(10, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => 2.0 * i as f64 + 1.0,
        });
        let y = DVector::from_fn(10, |i, _| (i % 2) as f64);
        let names = vec!["intercept".to_string(), "a".into(), "b".into()];
        match fit_logistic(&x, &y, &names, &LogisticOptions::default()) {
            Err(Error::RankDeficient(cols)) => assert_eq!(cols, vec!["b".to_string()]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(fit_ols(&x, &y, &names), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn ols_exact_and_constant() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(6, |i, _| 2.0 + 3.0 * i as f64);
        let fit = fit_ols(&x, &y, &names(2)).unwrap();
        assert_relative_eq!(fit.r_squared.unwrap(), 1.0);
        assert_relative_eq!(fit.coefficients()[1], 3.0, epsilon = 1e-12);

        let flat = DVector::from_element(6, 4.0);
        let fit = fit_ols(&x, &flat, &names(2)).unwrap();
        assert!(fit.coefficients()[1].abs() < 1e-12);
        assert_eq!(fit.r_squared.unwrap(), 0.0);
        assert!(fit.f_statistic.is_none());
    }

    #[test]
    fn predictions() {
        let fit = ModelFit::from_estimates(ModelKind::Logistic, &["a", "b"], &[0.0, 0.0], &[1.0, 1.0], 10, None).unwrap();
        assert_eq!(predict_prob(&fit, &[1.0, 2.0]).unwrap(), 0.5);
        let fit = ModelFit::from_estimates(ModelKind::Logistic, &["a"], &[3f64.ln()], &[1.0], 10, None).unwrap();
        assert_relative_eq!(predict_prob(&fit, &[1.0]).unwrap(), 0.75, epsilon = 1e-15);
        assert!(matches!(predict_prob(&fit, &[1.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn star_fixtures() {
        let fit = ModelFit::from_estimates(
            ModelKind::Logistic,
            &["party", "continuous", "placebo"],
            &[-0.557, -0.158, 0.053],
            &[0.149, 0.095, 0.084],
            9517,
            None,
        )
        .unwrap();
        let rows = wald_summary(&fit).unwrap();
        assert!((rows[0].statistic.abs() - 3.74).abs() < 0.01);
        let tiers: Vec<_> = rows.iter().map(|r| r.tier).collect();
        assert_eq!(tiers, vec![StarTier::Three, StarTier::One, StarTier::None]);
        assert_eq!(StarTier::from_p(0.01).stars(), "**");
        assert_eq!(StarTier::from_p(0.0999).stars(), "*");
        assert_eq!(StarTier::from_p(0.1).stars(), "");

        let zero = ModelFit::from_estimates(ModelKind::Logistic, &["a"], &[1.0], &[0.0], 1, None).unwrap();
        assert!(matches!(wald_summary(&zero), Err(Error::ZeroStandardError(_))));
    }

    #[test]
    fn json_round_trip_with_nulls() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(6, |i, _| 1.0 + 0.5 * i as f64);
        let fit = fit_ols(&x, &y, &["intercept".to_string(), "slope".to_string()]).unwrap();
        let json = fit.to_json();
        let back = ModelFit::from_json(&json).unwrap();
        assert_eq!(back.terms["slope"].estimate, fit.terms["slope"].estimate);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["terms"]["slope"]["estimate"].is_number());
    }
}
