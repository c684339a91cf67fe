//! No-intercept least squares over configuration indicators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::grid::{ConfigResult, Metric};
use crate::bn::{BnConfig, Cumulative, MAX_LAG};
use crate::error::{Error, Result};

pub const N_REGRESSORS: usize = MAX_LAG + 5;

pub const REGRESSOR_NAMES: [&str; N_REGRESSORS] = [
    "lag=0",
    "lag=1",
    "lag=2",
    "lag=3",
    "lag=4",
    "TSSO",
    "Stage-Duration",
    "CST",
    "CRST",
];

/// Indicator row: one-hot lag, then TSSO, duration, CST, CRST.
pub fn design_row(config: &BnConfig) -> [f64; N_REGRESSORS] {
    let mut row = [0.0; N_REGRESSORS];
    row[config.lag] = 1.0;
    row[MAX_LAG + 1] = config.include_tsso as u8 as f64;
    row[MAX_LAG + 2] = config.include_duration as u8 as f64;
    row[MAX_LAG + 3] = (config.cumulative == Cumulative::Cst) as u8 as f64;
    row[MAX_LAG + 4] = (config.cumulative == Cumulative::Crst) as u8 as f64;
    row
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl Coefficient {
    pub fn band(&self) -> &'static str {
        significance_band(self.p_value)
    }
}

/// Ordinary least squares without an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub n_obs: usize,
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub rss: f64,
    pub f_stat: f64,
    pub df_model: usize,
    pub df_resid: usize,
    pub f_p_value: f64,
    /// Uncentered: 1 - RSS / sum(y^2).
    pub r2: f64,
    pub r2_adjusted: f64,
}

/// Solves through the SVD of `x`, refusing designs whose smallest singular
/// value is negligible.
pub fn ols_no_intercept(x: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    if n != y.len() || n == 0 {
        return Err(Error::Regression(format!("{} rows vs {} responses", n, y.len())));
    }
    let p = x[0].len();
    if x.iter().any(|r| r.len() != p) {
        return Err(Error::Regression("ragged design".into()));
    }
    if n <= p {
        return Err(Error::Regression(format!("{n} observations for {p} regressors")));
    }
    if y.iter().chain(x.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Regression("non-finite input".into()));
    }
    let xm = DMatrix::from_fn(n, p, |i, j| x[i][j]);
    let yv = DVector::from_column_slice(y);
    let svd = xm.clone().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let tol = s_max * (n.max(p) as f64) * f64::EPSILON * 10.0;
    let rank = s.iter().filter(|&&v| v > tol).count();
    if rank < p {
        return Err(Error::Regression(format!("design has rank {rank} < {p}")));
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let uty = u.transpose() * &yv;
    let scaled = DVector::from_fn(p, |i, _| uty[i] / s[i]);
    let beta = vt.transpose() * scaled;
    let fitted = &xm * &beta;
    let rss = (&yv - &fitted).norm_squared();
    let df_resid = n - p;
    let sigma2 = rss / df_resid as f64;
    // (X'X)^-1 = V diag(1/s^2) V'
    let xtx_inv = DMatrix::<f64>::from_fn(p, p, |i, j| (0..p).map(|k| vt[(k, i)] * vt[(k, j)] / (s[k] * s[k])).sum());
    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).map_err(|e| Error::Regression(e.to_string()))?;
    let mut std_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for i in 0..p {
        let se = (sigma2 * xtx_inv[(i, i)]).sqrt();
        let t = beta[i] / se;
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(if t.is_nan() { f64::NAN } else { 2.0 * t_dist.sf(t.abs()) });
    }
    let ss_model = fitted.norm_squared();
    let f_stat = (ss_model / p as f64) / sigma2;
    let f_dist = FisherSnedecor::new(p as f64, df_resid as f64).map_err(|e| Error::Regression(e.to_string()))?;
    let f_p_value = if f_stat.is_nan() { f64::NAN } else { f_dist.sf(f_stat) };
    let tss = yv.norm_squared();
    let r2 = 1.0 - rss / tss;
    let r2_adjusted = 1.0 - (1.0 - r2) * n as f64 / df_resid as f64;
    Ok(OlsFit {
        n_obs: n,
        beta: beta.iter().copied().collect(),
        std_errors,
        t_stats,
        p_values,
        rss,
        f_stat,
        df_model: p,
        df_resid,
        f_p_value,
        r2,
        r2_adjusted,
    })
}

/// `*`, `**`, `***` at 0.05, 0.01, 0.001; empty otherwise.
pub fn significance_band(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRegression {
    pub metric: Metric,
    pub design: Vec<[f64; N_REGRESSORS]>,
    /// Fold-mean metric per configuration, in percent.
    pub response: Vec<f64>,
    pub coefficients: Vec<Coefficient>,
    pub f_stat: f64,
    pub df_model: usize,
    pub df_resid: usize,
    pub f_p_value: f64,
    pub r2: f64,
    pub r2_adjusted: f64,
}

pub fn fit_meta_regression(results: &[ConfigResult], metric: Metric) -> Result<MetaRegression> {
    let design: Vec<[f64; N_REGRESSORS]> = results.iter().map(|r| design_row(&r.config)).collect();
    let response: Vec<f64> = results.iter().map(|r| 100.0 * r.value(metric)).collect();
    let rows: Vec<Vec<f64>> = design.iter().map(|r| r.to_vec()).collect();
    let fit = ols_no_intercept(&rows, &response)?;
    let coefficients = (0..N_REGRESSORS)
        .map(|i| Coefficient {
            name: REGRESSOR_NAMES[i].to_string(),
            estimate: fit.beta[i],
            std_error: fit.std_errors[i],
            t_stat: fit.t_stats[i],
            p_value: fit.p_values[i],
        })
        .collect();
    Ok(MetaRegression {
        metric,
        design,
        response,
        coefficients,
        f_stat: fit.f_stat,
        df_model: fit.df_model,
        df_resid: fit.df_resid,
        f_p_value: fit.f_p_value,
        r2: fit.r2,
        r2_adjusted: fit.r2_adjusted,
    })
}
